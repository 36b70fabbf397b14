//! Voxel feature pulling: every voxel center is projected into a view and
//! the view's map is bilinearly sampled there. Voxels outside the view
//! frustum (behind the camera or off the image) stay zero.
//!
//! The sampler works in node coordinates where node `(i, j)` is pixel
//! `(i, j)`'s value. Continuous image coordinates put that value at the
//! pixel center `(i + 0.5, j + 0.5)`, so [`pull_view`] samples at
//! `(u - 0.5, v - 0.5)`.

use nalgebra::Point3;
use rayon::prelude::*;

use crate::camera::CameraModel;
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::volume::{FeatureVolume, PlanarMap, ValidityVolume};

/// Bilinear interpolation between the four nodes around `(u, v)`; coordinates
/// beyond `[0, width-1] x [0, height-1]` clamp to the edge.
pub fn bilinear_sample(map: &PlanarMap, u: f64, v: f64, channel: usize) -> f64 {
    let w = map.width();
    let h = map.height();
    let u = u.clamp(0.0, (w - 1) as f64);
    let v = v.clamp(0.0, (h - 1) as f64);
    let x0 = (u.floor() as usize).min(w - 1);
    let y0 = (v.floor() as usize).min(h - 1);
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let ax = u - x0 as f64;
    let ay = v - y0 as f64;
    let top = (1.0 - ax) * map.get(channel, y0, x0) as f64 + ax * map.get(channel, y0, x1) as f64;
    let bottom =
        (1.0 - ax) * map.get(channel, y1, x0) as f64 + ax * map.get(channel, y1, x1) as f64;
    (1.0 - ay) * top + ay * bottom
}

/// Continuous image coordinate to sampler node coordinate.
#[inline]
pub fn image_to_node(coord: f64) -> f64 {
    coord - 0.5
}

/// Pixel coordinates of every voxel center that is valid for `cam`.
fn project_grid(
    cam: &CameraModel,
    grid: &GridSpec,
    bounds_w: f64,
    bounds_h: f64,
) -> Vec<Option<(f64, f64)>> {
    (0..grid.voxel_count())
        .into_par_iter()
        .map(|i| {
            let center = grid.center_unchecked(grid.unlinear(i));
            project_if_valid(cam, &center, bounds_w, bounds_h)
        })
        .collect()
}

#[inline]
fn project_if_valid(
    cam: &CameraModel,
    p: &Point3<f64>,
    bounds_w: f64,
    bounds_h: f64,
) -> Option<(f64, f64)> {
    if !cam.is_valid(p, bounds_w, bounds_h) {
        return None;
    }
    cam.project_point(p).ok().map(|pp| (pp.u, pp.v))
}

pub fn compute_validity(
    cam: &CameraModel,
    grid: &GridSpec,
    bounds_w: f64,
    bounds_h: f64,
) -> ValidityVolume {
    let data = (0..grid.voxel_count())
        .into_par_iter()
        .map(|i| cam.is_valid(&grid.center_unchecked(grid.unlinear(i)), bounds_w, bounds_h))
        .collect();
    ValidityVolume::from_data(grid.ny, grid.nz, grid.nx, data).expect("sized from grid")
}

/// Lifts one view's map into the grid. `cam` must already be expressed in
/// the map's pixel frame (see [`CameraModel::adjust_intrinsics`]); the
/// validity bounds are the map's width and height.
pub fn pull_view(
    map: &PlanarMap,
    cam: &CameraModel,
    grid: &GridSpec,
) -> (FeatureVolume, ValidityVolume) {
    let projections = project_grid(cam, grid, map.width() as f64, map.height() as f64);
    let mut volume = FeatureVolume::for_grid(map.channels(), grid);
    for c in 0..map.channels() {
        volume
            .channel_mut(c)
            .par_iter_mut()
            .zip(projections.par_iter())
            .for_each(|(out, proj)| {
                if let Some((u, v)) = proj {
                    *out = bilinear_sample(map, image_to_node(*u), image_to_node(*v), c) as f32;
                }
            });
    }
    let validity = ValidityVolume::from_data(
        grid.ny,
        grid.nz,
        grid.nx,
        projections.iter().map(Option::is_some).collect(),
    )
    .expect("sized from grid");
    (volume, validity)
}

/// Per-voxel mean over the views that see the voxel; zero where no view does.
pub fn aggregate_valid_mean(
    volumes: &[FeatureVolume],
    validity: &[ValidityVolume],
) -> Result<FeatureVolume> {
    let first = volumes
        .first()
        .ok_or_else(|| Error::DimensionMismatch("no volumes to aggregate".into()))?;
    if volumes.len() != validity.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} volumes but {} validity masks",
            volumes.len(),
            validity.len()
        )));
    }
    for (i, (vol, val)) in volumes.iter().zip(validity).enumerate() {
        first.check_same_shape(vol, &format!("view {i}"))?;
        if val.dims() != first.dims() {
            return Err(Error::DimensionMismatch(format!(
                "validity {i} dims {:?} vs volume dims {:?}",
                val.dims(),
                first.dims()
            )));
        }
    }

    let (ny, nz, nx) = first.dims();
    let n = first.voxels();
    let counts: Vec<u32> = (0..n)
        .into_par_iter()
        .map(|i| validity.iter().filter(|v| v.data()[i]).count() as u32)
        .collect();
    let mut out = FeatureVolume::zeros(first.channels(), ny, nz, nx);
    for c in 0..first.channels() {
        out.channel_mut(c)
            .par_iter_mut()
            .enumerate()
            .for_each(|(i, o)| {
                if counts[i] == 0 {
                    return;
                }
                let sum: f64 = volumes
                    .iter()
                    .zip(validity)
                    .filter(|(_, val)| val.data()[i])
                    .map(|(vol, _)| vol.channel(c)[i] as f64)
                    .sum();
                *o = (sum / counts[i] as f64) as f32;
            });
    }
    Ok(out)
}
