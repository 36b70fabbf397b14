use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the geometry, reconstruction, detection and I/O layers.
#[derive(Error, Debug)]
pub enum Error {
    /// The point lies on the camera's principal plane (zero homogeneous depth).
    #[error("degenerate projection: point lies on the principal plane (depth {depth:e})")]
    DegenerateProjection { depth: f64 },

    #[error("invalid scale {0}: must be > 0")]
    InvalidScale(f64),

    #[error("invalid camera: {0}")]
    InvalidCamera(String),

    #[error("coarsening factor {factor} does not evenly divide grid dimension {dim}")]
    NonDividingFactor { factor: usize, dim: usize },

    #[error("voxel index (iy={iy}, iz={iz}, ix={ix}) outside grid")]
    IndexOutOfGrid { iy: usize, iz: usize, ix: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid factor {0}: must be >= 1")]
    InvalidFactor(usize),

    #[error("unknown mode `{0}`")]
    UnknownMode(String),

    #[error("could not place pedestrian {placed} of {requested} after {attempts} rejections")]
    PlacementFailure {
        placed: usize,
        requested: usize,
        attempts: usize,
    },

    #[error("camera index {index} out of range ({count} cameras)")]
    InvalidCameraIndex { index: usize, count: usize },

    #[error("metric undefined without ground truth (n_gt = 0)")]
    NoGroundTruth,

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("data consistency error: {0}")]
    Data(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line tool: 2 for configuration
    /// problems, 3 for filesystem failures, 4 for inconsistent data.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 3,
            Error::Config(_)
            | Error::Json { .. }
            | Error::UnknownMode(_)
            | Error::InvalidScale(_)
            | Error::InvalidFactor(_)
            | Error::NonDividingFactor { .. }
            | Error::InvalidGrid(_)
            | Error::InvalidCamera(_)
            | Error::PlacementFailure { .. } => 2,
            _ => 4,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
