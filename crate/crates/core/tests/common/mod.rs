#![allow(dead_code)]

use nalgebra::{Point3, Vector3};
use pvh_detect::camera::CameraModel;
use pvh_detect::detect::Detection;
use pvh_detect::grid::GridSpec;
use pvh_detect::hull::Silhouette;
use pvh_detect::scene::Scene;
use pvh_detect::volume::{FeatureVolume, PlanarMap, ValidityVolume};

/// Four-corner bilinear interpolation written from the textbook formula,
/// with edge clamping.
pub fn four_corner(map: &PlanarMap, u: f64, v: f64, c: usize) -> f64 {
    let (w, h) = (map.width(), map.height());
    let u = u.max(0.0).min((w - 1) as f64);
    let v = v.max(0.0).min((h - 1) as f64);
    let x0 = u.floor() as usize;
    let y0 = v.floor() as usize;
    let x1 = if x0 + 1 < w { x0 + 1 } else { x0 };
    let y1 = if y0 + 1 < h { y0 + 1 } else { y0 };
    let fx = u - x0 as f64;
    let fy = v - y0 as f64;
    let q = |y: usize, x: usize| map.get(c, y, x) as f64;
    q(y0, x0) * (1.0 - fx) * (1.0 - fy)
        + q(y0, x1) * fx * (1.0 - fy)
        + q(y1, x0) * (1.0 - fx) * fy
        + q(y1, x1) * fx * fy
}

/// World position of voxel `(iy, iz, ix)`'s center from the grid fields.
pub fn voxel_center(g: &GridSpec, iy: usize, iz: usize, ix: usize) -> Point3<f64> {
    Point3::new(
        g.origin[0] + (ix as f64 + 0.5) * g.cell_xy,
        g.origin[1] + (iy as f64 + 0.5) * g.cell_xy,
        g.origin[2] + (iz as f64 + 0.5) * g.cell_z,
    )
}

/// `(u, v, depth)` through the 3x4 projection matrix in homogeneous form.
pub fn project_homogeneous(cam: &CameraModel, p: &Point3<f64>) -> (f64, f64, f64) {
    let m = cam.projection_matrix();
    let x = [p.x, p.y, p.z, 1.0];
    let row = |r: usize| (0..4).map(|k| m[(r, k)] * x[k]).sum::<f64>();
    let (a, b, w) = (row(0), row(1), row(2));
    (a / w, b / w, w)
}

/// Per-voxel project-then-sample oracle for one view.
pub fn pull_oracle(map: &PlanarMap, cam: &CameraModel, g: &GridSpec) -> (Vec<Vec<f64>>, Vec<bool>) {
    let (w, h) = (map.width() as f64, map.height() as f64);
    let mut vals = vec![Vec::new(); map.channels()];
    let mut valid = Vec::new();
    for iy in 0..g.ny {
        for iz in 0..g.nz {
            for ix in 0..g.nx {
                let (u, v, d) = project_homogeneous(cam, &voxel_center(g, iy, iz, ix));
                let ok = d > 0.0 && (0.0..=w).contains(&u) && (0.0..=h).contains(&v);
                valid.push(ok);
                for (c, out) in vals.iter_mut().enumerate() {
                    out.push(if ok {
                        four_corner(map, u - 0.5, v - 0.5, c)
                    } else {
                        0.0
                    });
                }
            }
        }
    }
    (vals, valid)
}

pub fn render_all(scene: &Scene, supersample: u32) -> Vec<Silhouette> {
    (0..scene.cameras.len())
        .map(|i| scene.render_view(i, supersample).unwrap())
        .collect()
}

/// Exact binary silhouette evaluated at every voxel: 1 where the camera ray
/// through the voxel center touches a pedestrian, for voxels valid in the
/// camera's full-resolution image.
pub fn exact_binary_views(
    scene: &Scene,
    g: &GridSpec,
) -> (Vec<FeatureVolume>, Vec<ValidityVolume>) {
    let mut occ = Vec::new();
    let mut val = Vec::new();
    for cam in &scene.cameras {
        let (w, h) = (cam.image_width() as f64, cam.image_height() as f64);
        let origin = cam.center();
        let mut data = Vec::with_capacity(g.voxel_count());
        let mut valid = Vec::with_capacity(g.voxel_count());
        for iy in 0..g.ny {
            for iz in 0..g.nz {
                for ix in 0..g.nx {
                    let p = voxel_center(g, iy, iz, ix);
                    let ok = cam.is_valid(&p, w, h);
                    let dir: Vector3<f64> = (p - origin).normalize();
                    let hit = ok
                        && scene
                            .pedestrians
                            .iter()
                            .any(|q| q.intersects_ray(&origin, &dir));
                    data.push(if hit { 1.0 } else { 0.0 });
                    valid.push(ok);
                }
            }
        }
        occ.push(FeatureVolume::from_data(1, g.ny, g.nz, g.nx, data).unwrap());
        val.push(ValidityVolume::from_data(g.ny, g.nz, g.nx, valid).unwrap());
    }
    (occ, val)
}

/// Best one-to-one matching by enumeration: most pairs within `t` first,
/// then least total distance. Returns `(pairs, total distance)`.
pub fn exhaustive_matching(dets: &[Detection], gts: &[[f64; 2]], t: f64) -> (usize, f64) {
    fn go(
        i: usize,
        dist: &[Vec<f64>],
        t: f64,
        used: &mut Vec<bool>,
        count: usize,
        total: f64,
        best: &mut (usize, f64),
    ) {
        if i == dist.len() {
            if count > best.0 || (count == best.0 && total < best.1) {
                *best = (count, total);
            }
            return;
        }
        go(i + 1, dist, t, used, count, total, best);
        for j in 0..used.len() {
            if !used[j] && dist[i][j] < t {
                used[j] = true;
                go(i + 1, dist, t, used, count + 1, total + dist[i][j], best);
                used[j] = false;
            }
        }
    }
    let dist: Vec<Vec<f64>> = dets
        .iter()
        .map(|d| {
            gts.iter()
                .map(|g| ((d.position[0] - g[0]).powi(2) + (d.position[1] - g[1]).powi(2)).sqrt())
                .collect()
        })
        .collect();
    let mut best = (0, 0.0);
    go(0, &dist, t, &mut vec![false; gts.len()], 0, 0.0, &mut best);
    best
}
