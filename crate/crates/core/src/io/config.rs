//! Run configuration shared by every subcommand.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::detect::{DEFAULT_NMS_RADIUS, DEFAULT_THRESHOLD};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::hull::{BevMode, FusionMode};
use crate::io::formats::read_json;
use crate::metrics::{Matching, DEFAULT_MATCH_DISTANCE};
use crate::pipeline::HullParams;
use crate::scene::SceneConfig;

/// Grid given either as a preset string (`"wildtrack:4"`) or in full.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridChoice {
    Preset(String),
    Explicit(GridSpec),
}

impl GridChoice {
    pub fn resolve(&self) -> Result<GridSpec> {
        match self {
            GridChoice::Preset(s) => GridSpec::from_preset(s),
            GridChoice::Explicit(g) => {
                g.validate()?;
                Ok(g.clone())
            }
        }
    }
}

/// Scene given as a path to a scene JSON file or inline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SceneSource {
    Path(PathBuf),
    Inline(SceneConfig),
}

impl SceneSource {
    pub fn load(&self) -> Result<SceneConfig> {
        match self {
            SceneSource::Path(p) => read_json(p),
            SceneSource::Inline(c) => Ok(c.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub grid: GridChoice,
    pub scene: Option<SceneSource>,
    /// Rendering supersampling per pixel axis.
    pub supersample: u32,
    pub blur_factor: usize,
    pub blur_sigma: Option<f64>,
    pub tau: f64,
    pub min_views: u32,
    pub fusion: FusionMode,
    pub bev: BevMode,
    pub threshold: f64,
    pub nms_radius: usize,
    pub matching: Matching,
    /// True-positive distance threshold in meters.
    pub match_distance: f64,
    /// Norm of a random translation added to every loaded camera before
    /// reconstruction, meters.
    pub calib_noise: f64,
    /// Directory read by the consuming commands; defaults to `out`.
    pub input: Option<PathBuf>,
    /// Optional raw `C x Y x Z x X` feature volume to fuse with the hull.
    pub features: Option<PathBuf>,
    pub detections: Option<PathBuf>,
    pub gt: Option<PathBuf>,
    pub frame: i64,
    pub out: PathBuf,
    pub seed: Option<u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let hull = HullParams::default();
        Self {
            grid: GridChoice::Preset("wildtrack:4".into()),
            scene: None,
            supersample: 4,
            blur_factor: hull.blur_factor,
            blur_sigma: hull.blur_sigma,
            tau: hull.tau,
            min_views: hull.min_views,
            fusion: hull.fusion,
            bev: hull.bev,
            threshold: DEFAULT_THRESHOLD,
            nms_radius: DEFAULT_NMS_RADIUS,
            matching: Matching::Optimal,
            match_distance: DEFAULT_MATCH_DISTANCE,
            calib_noise: 0.0,
            input: None,
            features: None,
            detections: None,
            gt: None,
            frame: 0,
            out: PathBuf::from("out"),
            seed: None,
        }
    }
}

fn field(name: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{name}: {msg}"))
}

fn check_exists(name: &str, path: &Path) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(field(name, format!("{} does not exist", path.display())))
    }
}

impl RunConfig {
    /// Loads a config file; keys not listed here are ignored.
    pub fn load(path: &Path) -> Result<Self> {
        read_json(path)
    }

    /// Range checks per field plus existence of referenced input files.
    pub fn validate(&self) -> Result<()> {
        self.grid.resolve().map_err(|e| field("grid", e))?;
        if self.supersample < 1 {
            return Err(field("supersample", "must be >= 1"));
        }
        if self.blur_factor < 1 {
            return Err(field("blur_factor", "must be >= 1"));
        }
        if let Some(s) = self.blur_sigma {
            if !s.is_finite() {
                return Err(field("blur_sigma", "must be finite"));
            }
        }
        if !(self.tau.is_finite() && self.tau >= 0.0) {
            return Err(field("tau", "must be finite and >= 0"));
        }
        if !self.threshold.is_finite() {
            return Err(field("threshold", "must be finite"));
        }
        if self.nms_radius < 1 {
            return Err(field("nms_radius", "must be >= 1"));
        }
        if !(self.match_distance.is_finite() && self.match_distance > 0.0) {
            return Err(field("match_distance", "must be finite and > 0"));
        }
        if !(self.calib_noise.is_finite() && self.calib_noise >= 0.0) {
            return Err(field("calib_noise", "must be finite and >= 0"));
        }
        if let Some(SceneSource::Path(p)) = &self.scene {
            check_exists("scene", p)?;
        }
        if let Some(p) = &self.features {
            check_exists("features", p)?;
        }
        Ok(())
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        self.grid.resolve().map_err(|e| field("grid", e))
    }

    pub fn hull_params(&self) -> HullParams {
        HullParams {
            blur_factor: self.blur_factor,
            blur_sigma: self.blur_sigma,
            tau: self.tau,
            min_views: self.min_views,
            fusion: self.fusion,
            bev: self.bev,
        }
    }

    pub fn input_dir(&self) -> &Path {
        self.input.as_deref().unwrap_or(&self.out)
    }

    pub fn scene_config(&self) -> Result<SceneConfig> {
        self.scene
            .as_ref()
            .ok_or_else(|| field("scene", "required by simulate"))?
            .load()
    }

    /// The run seed wins over a seed stored in the scene file; 0 otherwise.
    pub fn effective_seed(&self, scene: Option<&SceneConfig>) -> u64 {
        self.seed.or(scene.and_then(|s| s.seed)).unwrap_or(0)
    }
}
