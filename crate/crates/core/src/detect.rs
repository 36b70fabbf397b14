//! Heatmap decoding: local-maximum suppression over a square window,
//! thresholding, and optional sub-cell offsets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::volume::BevMap;

pub const DEFAULT_THRESHOLD: f64 = 0.4;
pub const DEFAULT_NMS_RADIUS: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    /// Ground-plane position in meters.
    pub position: [f64; 2],
    pub score: f64,
}

/// Whether cell `(iy, ix)` beats every other cell in its window: strictly
/// greater, or equal with a larger linear index.
fn is_window_max(values: &[f32], ny: usize, nx: usize, iy: usize, ix: usize, r: usize) -> bool {
    let here = values[iy * nx + ix];
    let me = iy * nx + ix;
    for y in iy.saturating_sub(r)..=(iy + r).min(ny - 1) {
        for x in ix.saturating_sub(r)..=(ix + r).min(nx - 1) {
            let other = y * nx + x;
            if other == me {
                continue;
            }
            let v = values[other];
            if v > here || (v == here && other < me) {
                return false;
            }
        }
    }
    true
}

/// Peaks of a one-channel heatmap, sorted by descending score.
///
/// `offset_map`, when given, carries `(dx, dy)` in cells and is added to the
/// peak cell's center.
pub fn decode_detections(
    heatmap: &BevMap,
    grid: &GridSpec,
    threshold: f64,
    nms_radius: usize,
    offset_map: Option<&BevMap>,
) -> Result<Vec<Detection>> {
    let (ny, nx) = heatmap.dims();
    if heatmap.channels() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "heatmap must have 1 channel, got {}",
            heatmap.channels()
        )));
    }
    if (ny, nx) != (grid.ny, grid.nx) {
        return Err(Error::DimensionMismatch(format!(
            "heatmap {ny}x{nx} vs grid {}x{}",
            grid.ny, grid.nx
        )));
    }
    if let Some(off) = offset_map {
        if off.channels() != 2 || off.dims() != (ny, nx) {
            return Err(Error::DimensionMismatch(format!(
                "offset map must be 2x{ny}x{nx}, got {}x{:?}",
                off.channels(),
                off.dims()
            )));
        }
    }
    if nms_radius < 1 {
        return Err(Error::Config("nms radius must be >= 1".into()));
    }

    let values = heatmap.channel(0);
    let mut dets = Vec::new();
    for iy in 0..ny {
        for ix in 0..nx {
            let score = values[iy * nx + ix] as f64;
            if score < threshold || !is_window_max(values, ny, nx, iy, ix, nms_radius) {
                continue;
            }
            let [mut x, mut y] = grid.ground_cell_center(iy, ix);
            if let Some(off) = offset_map {
                x += off.get(0, iy, ix) as f64 * grid.cell_xy;
                y += off.get(1, iy, ix) as f64 * grid.cell_xy;
            }
            dets.push(Detection {
                position: [x, y],
                score,
            });
        }
    }
    // stable sort keeps raster order among equal scores
    dets.sort_by(|a, b| b.score.total_cmp(&a.score));
    Ok(dets)
}
