//! Silhouettes to BEV occupancy: preprocess each view, pull it into the
//! grid, build the visual hull and the probabilistic hull, optionally fuse
//! with a feature volume, and compress the vertical axis.

use serde::{Deserialize, Serialize};

use crate::camera::CameraModel;
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::hull::{
    compress_bev, default_sigma, fuse, preprocess_silhouette_with_sigma, probabilistic_visual_hull,
    valid_view_count, visual_hull, BevMode, FusionMode, OccupancyVolume, Silhouette,
};
use crate::pull::pull_view;
use crate::volume::{BevMap, FeatureVolume, ValidityVolume};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullParams {
    /// Silhouette downsampling factor (image pixels per map pixel).
    pub blur_factor: usize,
    /// Blur before downsampling; `None` means `blur_factor / 2`, `<= 0` disables it.
    pub blur_sigma: Option<f64>,
    pub tau: f64,
    pub min_views: u32,
    pub fusion: FusionMode,
    pub bev: BevMode,
}

impl Default for HullParams {
    fn default() -> Self {
        Self {
            blur_factor: 4,
            blur_sigma: None,
            tau: 0.0,
            min_views: 1,
            fusion: FusionMode::MultConcat,
            bev: BevMode::MaxZ,
        }
    }
}

impl HullParams {
    pub fn sigma(&self) -> f64 {
        self.blur_sigma
            .unwrap_or_else(|| default_sigma(self.blur_factor))
    }

    /// Full-resolution silhouettes, no blur.
    pub fn exact() -> Self {
        Self {
            blur_factor: 1,
            blur_sigma: Some(0.0),
            ..Self::default()
        }
    }
}

pub struct Reconstruction {
    /// Per-view pulled silhouettes.
    pub occ_views: Vec<FeatureVolume>,
    pub validity: Vec<ValidityVolume>,
    pub view_counts: Vec<u32>,
    pub vh: OccupancyVolume,
    pub pvh: OccupancyVolume,
    /// Z-compressed PVH, the detection heatmap.
    pub bev: BevMap,
    /// Z-compressed fusion of a supplied feature volume with the PVH.
    pub fused_bev: Option<BevMap>,
}

/// Pulls each silhouette through its camera. Silhouettes must be at the
/// camera's native resolution; the camera is rescaled to the downsampled map.
pub fn pull_silhouettes(
    silhouettes: &[Silhouette],
    cameras: &[CameraModel],
    grid: &GridSpec,
    params: &HullParams,
) -> Result<(Vec<FeatureVolume>, Vec<ValidityVolume>)> {
    if silhouettes.len() != cameras.len() {
        return Err(Error::Data(format!(
            "{} silhouettes for {} cameras",
            silhouettes.len(),
            cameras.len()
        )));
    }
    if silhouettes.is_empty() {
        return Err(Error::Data("no views to reconstruct from".into()));
    }
    let mut occ = Vec::with_capacity(cameras.len());
    let mut val = Vec::with_capacity(cameras.len());
    for (sil, cam) in silhouettes.iter().zip(cameras) {
        if (sil.width(), sil.height()) != (cam.image_width() as usize, cam.image_height() as usize)
        {
            return Err(Error::Data(format!(
                "camera {}: silhouette is {}x{} but calibration says {}x{}",
                cam.name(),
                sil.width(),
                sil.height(),
                cam.image_width(),
                cam.image_height()
            )));
        }
        let small = preprocess_silhouette_with_sigma(sil, params.blur_factor, params.sigma())?;
        let scaled = cam
            .adjust_intrinsics(1.0 / params.blur_factor as f64, 0.0, 0.0)?
            .with_image_size(small.width() as u32, small.height() as u32)?;
        let (o, v) = pull_view(small.map(), &scaled, grid);
        occ.push(o);
        val.push(v);
    }
    Ok((occ, val))
}

pub fn reconstruct(
    silhouettes: &[Silhouette],
    cameras: &[CameraModel],
    grid: &GridSpec,
    params: &HullParams,
    features: Option<&FeatureVolume>,
) -> Result<Reconstruction> {
    let (occ_views, validity) = pull_silhouettes(silhouettes, cameras, grid, params)?;
    let view_counts = valid_view_count(&validity)?;
    let vh = visual_hull(&occ_views, &validity, params.tau, params.min_views)?;
    let pvh = probabilistic_visual_hull(&occ_views, &validity, &vh)?;
    let bev = compress_bev(pvh.volume(), params.bev);
    let fused_bev = match features {
        Some(f) => Some(compress_bev(&fuse(f, &pvh, params.fusion)?, params.bev)),
        None => None,
    };
    Ok(Reconstruction {
        occ_views,
        validity,
        view_counts,
        vh,
        pvh,
        bev,
        fused_bev,
    })
}
