//! Multi-view pedestrian occupancy from silhouettes.
//!
//! Cameras project a ground-aligned voxel grid into each view, per-view maps
//! are pulled into the grid, silhouettes are combined into a visual hull and
//! a probabilistic hull, the vertical axis is compressed to a bird's-eye
//! heatmap, and peaks are decoded and scored against ground truth.

pub mod camera;
pub mod cli;
pub mod detect;
pub mod error;
pub mod grid;
pub mod hull;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod pull;
pub mod scene;
pub mod volume;

pub use camera::{CalibrationRecord, CameraModel, PixelProjection};
pub use detect::{decode_detections, Detection};
pub use error::{Error, Result};
pub use grid::{GridSpec, VoxelIndex};
pub use hull::{
    compress_bev, fuse, preprocess_silhouette, probabilistic_visual_hull, visual_hull, BevMode,
    FusionMode, OccupancyKind, OccupancyVolume, Silhouette,
};
pub use metrics::{
    match_detections, moda, modp, precision_recall, EvalReport, MatchResult, Matching,
};
pub use pipeline::{reconstruct, HullParams, Reconstruction};
pub use pull::{bilinear_sample, pull_view};
pub use scene::{make_scene, Pedestrian, Scene, SceneConfig};
pub use volume::{BevMap, FeatureVolume, PlanarMap, ValidityVolume};
