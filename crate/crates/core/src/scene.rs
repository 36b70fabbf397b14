//! Synthetic multi-camera scenes.
//!
//! Pedestrians are vertical capsules standing on the `z = 0` ground plane.
//! Silhouettes are rendered analytically by casting one ray per (sub)pixel
//! and testing it against every capsule's cylinder body and spherical caps.

use nalgebra::{Matrix3, Point3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::camera::{CalibrationRecord, CameraModel};
use crate::error::{Error, Result};
use crate::grid::{self, GridSpec};
use crate::hull::Silhouette;
use crate::volume::PlanarMap;

pub const DEFAULT_RADIUS: f64 = 0.25;
pub const DEFAULT_HEIGHT: f64 = 1.7;
pub const DEFAULT_MIN_DIST: f64 = 0.5;
pub const DEFAULT_LOOK_HEIGHT: f64 = 1.0;
pub const MAX_REJECTIONS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pedestrian {
    pub foot: [f64; 2],
    pub radius: f64,
    pub height: f64,
}

impl Pedestrian {
    pub fn new(x: f64, y: f64, radius: f64, height: f64) -> Result<Self> {
        if !(radius > 0.0 && height > radius) {
            return Err(Error::Config(format!(
                "pedestrian needs radius > 0 and height > radius (radius={radius}, height={height})"
            )));
        }
        Ok(Self {
            foot: [x, y],
            radius,
            height,
        })
    }

    /// End points of the capsule's axis segment.
    pub fn axis(&self) -> (Point3<f64>, Point3<f64>) {
        let [x, y] = self.foot;
        (
            Point3::new(x, y, self.radius),
            Point3::new(x, y, self.height - self.radius),
        )
    }

    pub fn contains(&self, p: &Point3<f64>) -> bool {
        let (a, b) = self.axis();
        let z = p.z.clamp(a.z, b.z);
        let dx = p.x - a.x;
        let dy = p.y - a.y;
        let dz = p.z - z;
        dx * dx + dy * dy + dz * dz <= self.radius * self.radius
    }

    /// Whether the ray `origin + s * dir`, `s > 0`, touches the capsule.
    pub fn intersects_ray(&self, origin: &Point3<f64>, dir: &Vector3<f64>) -> bool {
        let (a, b) = self.axis();
        let r2 = self.radius * self.radius;

        // cylinder side, restricted to the axis segment's z range
        let ox = origin.x - a.x;
        let oy = origin.y - a.y;
        let qa = dir.x * dir.x + dir.y * dir.y;
        if qa > 1e-18 {
            let qb = 2.0 * (ox * dir.x + oy * dir.y);
            let qc = ox * ox + oy * oy - r2;
            let disc = qb * qb - 4.0 * qa * qc;
            if disc >= 0.0 {
                let root = disc.sqrt();
                for s in [(-qb - root) / (2.0 * qa), (-qb + root) / (2.0 * qa)] {
                    let z = origin.z + s * dir.z;
                    if s > 0.0 && z >= a.z && z <= b.z {
                        return true;
                    }
                }
            }
        }

        // end caps
        [a, b].iter().any(|c| {
            let oc = origin - c;
            let half_b = dir.dot(&oc) / dir.norm_squared();
            let cc = (oc.norm_squared() - r2) / dir.norm_squared();
            let disc = half_b * half_b - cc;
            disc >= 0.0 && -half_b + disc.sqrt() > 0.0
        })
    }
}

/// Pinhole intrinsics shared by a camera ring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

impl Intrinsics {
    /// Principal point at the image center.
    pub fn centered(fx: f64, fy: f64, width: u32, height: u32) -> Self {
        Self {
            fx,
            fy,
            cx: width as f64 / 2.0,
            cy: height as f64 / 2.0,
            width,
            height,
        }
    }
}

/// Camera at `eye` looking at `target`, image `v` pointing toward world down.
pub fn look_at(
    name: impl Into<String>,
    eye: Point3<f64>,
    target: Point3<f64>,
    k: &Intrinsics,
) -> Result<CameraModel> {
    let forward = (target - eye)
        .try_normalize(1e-12)
        .ok_or_else(|| Error::InvalidCamera("look-at target coincides with camera".into()))?;
    let up = Vector3::z();
    let right = forward
        .cross(&up)
        .try_normalize(1e-9)
        .ok_or_else(|| Error::InvalidCamera("look-at direction is vertical".into()))?;
    let down = forward.cross(&right);
    let rotation = Matrix3::from_rows(&[right.transpose(), down.transpose(), forward.transpose()]);
    let translation = -(rotation * eye.coords);
    CameraModel::new(
        name,
        k.fx,
        k.fy,
        k.cx,
        k.cy,
        rotation,
        translation,
        k.width,
        k.height,
    )
}

/// `n` cameras evenly spaced on a circle of `ring_radius` around `center`
/// at `cam_height`, all looking at `center` one meter above the ground.
pub fn ring_cameras(
    n: usize,
    center: [f64; 2],
    ring_radius: f64,
    cam_height: f64,
    intrinsics: &Intrinsics,
) -> Result<Vec<CameraModel>> {
    ring_cameras_looking_at(
        n,
        center,
        ring_radius,
        cam_height,
        DEFAULT_LOOK_HEIGHT,
        intrinsics,
    )
}

pub fn ring_cameras_looking_at(
    n: usize,
    center: [f64; 2],
    ring_radius: f64,
    cam_height: f64,
    look_height: f64,
    intrinsics: &Intrinsics,
) -> Result<Vec<CameraModel>> {
    if n == 0 {
        return Err(Error::Config(
            "camera ring needs at least one camera".into(),
        ));
    }
    if ring_radius.is_nan() || ring_radius <= 0.0 {
        return Err(Error::Config(format!(
            "ring radius must be > 0, got {ring_radius}"
        )));
    }
    let target = Point3::new(center[0], center[1], look_height);
    (0..n)
        .map(|i| {
            let angle = std::f64::consts::TAU * i as f64 / n as f64;
            let eye = Point3::new(
                center[0] + ring_radius * angle.cos(),
                center[1] + ring_radius * angle.sin(),
                cam_height,
            );
            look_at(format!("cam{i}"), eye, target, intrinsics)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub pedestrians: Vec<Pedestrian>,
    pub cameras: Vec<CameraModel>,
    pub rng_seed: u64,
}

impl Scene {
    pub fn new(
        pedestrians: Vec<Pedestrian>,
        cameras: Vec<CameraModel>,
        rng_seed: u64,
    ) -> Result<Self> {
        if cameras.is_empty() {
            return Err(Error::Config("scene needs at least one camera".into()));
        }
        Ok(Self {
            pedestrians,
            cameras,
            rng_seed,
        })
    }

    pub fn point_in_pedestrian(&self, p: &Point3<f64>) -> bool {
        self.pedestrians.iter().any(|ped| ped.contains(p))
    }

    /// Foot positions in pedestrian order.
    pub fn ground_truth(&self) -> Vec<[f64; 2]> {
        self.pedestrians.iter().map(|p| p.foot).collect()
    }

    /// Silhouette rendered at the camera's own image size.
    pub fn render_view(&self, cam_index: usize, supersample: u32) -> Result<Silhouette> {
        let cam = self.camera(cam_index)?;
        self.render_silhouette(
            cam_index,
            cam.image_width() as usize,
            cam.image_height() as usize,
            supersample,
        )
    }

    pub fn camera(&self, index: usize) -> Result<&CameraModel> {
        self.cameras.get(index).ok_or(Error::InvalidCameraIndex {
            index,
            count: self.cameras.len(),
        })
    }

    /// Fraction of each pixel's `supersample x supersample` sub-rays that hit
    /// a pedestrian. With `supersample == 1` the single ray passes through
    /// the pixel center and the mask is binary.
    pub fn render_silhouette(
        &self,
        cam_index: usize,
        width: usize,
        height: usize,
        supersample: u32,
    ) -> Result<Silhouette> {
        let cam = self.camera(cam_index)?;
        if supersample == 0 {
            return Err(Error::Config("supersample must be >= 1".into()));
        }
        if width == 0 || height == 0 {
            return Err(Error::InvalidMap(
                "silhouette size must be at least 1x1".into(),
            ));
        }
        let origin = cam.center();
        let boxes: Vec<Option<[f64; 4]>> = self
            .pedestrians
            .iter()
            .map(|p| screen_bounds(cam, p))
            .collect();
        let ss = supersample as usize;
        let step = 1.0 / ss as f64;
        let per_pixel = (ss * ss) as f32;

        let mut data = vec![0.0f32; width * height];
        data.par_chunks_mut(width)
            .enumerate()
            .for_each(|(iy, row)| {
                let (row_top, row_bottom) = (iy as f64, iy as f64 + 1.0);
                let candidates: Vec<usize> = boxes
                    .iter()
                    .enumerate()
                    .filter(|(_, b)| b.is_none_or(|b| b[3] >= row_top && b[1] <= row_bottom))
                    .map(|(i, _)| i)
                    .collect();
                if candidates.is_empty() {
                    return;
                }
                for (ix, out) in row.iter_mut().enumerate() {
                    let (px0, px1) = (ix as f64, ix as f64 + 1.0);
                    let local: Vec<&Pedestrian> = candidates
                        .iter()
                        .filter(|&&i| boxes[i].is_none_or(|b| b[2] >= px0 && b[0] <= px1))
                        .map(|&i| &self.pedestrians[i])
                        .collect();
                    if local.is_empty() {
                        continue;
                    }
                    let mut hits = 0u32;
                    for sy in 0..ss {
                        let v = iy as f64 + (sy as f64 + 0.5) * step;
                        for sx in 0..ss {
                            let u = ix as f64 + (sx as f64 + 0.5) * step;
                            let dir = cam.ray_direction(u, v);
                            if local.iter().any(|p| p.intersects_ray(&origin, &dir)) {
                                hits += 1;
                            }
                        }
                    }
                    *out = hits as f32 / per_pixel;
                }
            });
        let map = PlanarMap::new(1, height, width, data)?;
        Silhouette::new(map, cam.name())
    }
}

/// Conservative image-space box `[u_min, v_min, u_max, v_max]` of a capsule,
/// or `None` when part of its bounding box is behind or near the camera.
fn screen_bounds(cam: &CameraModel, p: &Pedestrian) -> Option<[f64; 4]> {
    let [x, y] = p.foot;
    let r = p.radius;
    let mut b = [
        f64::INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::NEG_INFINITY,
    ];
    for dx in [-r, r] {
        for dy in [-r, r] {
            for z in [0.0, p.height] {
                let q = cam.project_point(&Point3::new(x + dx, y + dy, z)).ok()?;
                if q.depth < 1e-6 {
                    return None;
                }
                b[0] = b[0].min(q.u);
                b[1] = b[1].min(q.v);
                b[2] = b[2].max(q.u);
                b[3] = b[3].max(q.v);
            }
        }
    }
    Some(b)
}

/// Pedestrian source of a scene file: explicit list or random placement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PedestrianSpec {
    Explicit(Vec<PedestrianRecord>),
    Random(RandomPlacement),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PedestrianRecord {
    pub x: f64,
    pub y: f64,
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default = "default_height")]
    pub height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomPlacement {
    pub random_count: usize,
    #[serde(default = "default_min_dist")]
    pub min_dist: f64,
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default = "default_height")]
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CameraSpec {
    Inline(Vec<CalibrationRecord>),
    Ring { ring: RingSpec },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingSpec {
    pub count: usize,
    pub center: [f64; 2],
    pub ring_radius: f64,
    pub cam_height: f64,
    #[serde(default = "default_look_height")]
    pub look_height: f64,
    #[serde(flatten)]
    pub intrinsics: Intrinsics,
}

/// Scene file contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneConfig {
    pub pedestrians: PedestrianSpec,
    pub cameras: CameraSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Placement area `[x_min, y_min, x_max, y_max]`; defaults to the run grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extent: Option<[f64; 4]>,
}

fn default_radius() -> f64 {
    DEFAULT_RADIUS
}
fn default_height() -> f64 {
    DEFAULT_HEIGHT
}
fn default_min_dist() -> f64 {
    DEFAULT_MIN_DIST
}
fn default_look_height() -> f64 {
    DEFAULT_LOOK_HEIGHT
}

/// Square test area used by [`SceneConfig::ring_benchmark`], meters.
pub const BENCHMARK_SIDE: f64 = 12.0;

impl SceneConfig {
    /// `count` random pedestrians on a `BENCHMARK_SIDE` square seen by a ring
    /// of `cameras` 640x480 cameras 16 m from the center and 12 m up, so
    /// that every point of the square is inside every frustum.
    pub fn ring_benchmark(count: usize, min_dist: f64, cameras: usize) -> Self {
        let half = BENCHMARK_SIDE / 2.0;
        SceneConfig {
            pedestrians: PedestrianSpec::Random(RandomPlacement {
                random_count: count,
                min_dist,
                radius: DEFAULT_RADIUS,
                height: DEFAULT_HEIGHT,
            }),
            cameras: CameraSpec::Ring {
                ring: RingSpec {
                    count: cameras,
                    center: [half, half],
                    ring_radius: 16.0,
                    cam_height: 12.0,
                    look_height: DEFAULT_LOOK_HEIGHT,
                    intrinsics: Intrinsics::centered(450.0, 450.0, 640, 480),
                },
            },
            seed: None,
            extent: Some([0.0, 0.0, BENCHMARK_SIDE, BENCHMARK_SIDE]),
        }
    }
}

/// Grid over the benchmark square with `cell` meter ground cells and the
/// default 0 to 2 m vertical extent.
pub fn benchmark_grid(cell: f64) -> Result<GridSpec> {
    let n = (BENCHMARK_SIDE / cell).round() as usize;
    let cell_z = grid::DEFAULT_HEIGHT / grid::DEFAULT_NZ as f64;
    GridSpec::new([0.0, 0.0, 0.0], cell, cell_z, n, n, grid::DEFAULT_NZ)
}

impl CameraSpec {
    pub fn build(&self) -> Result<Vec<CameraModel>> {
        match self {
            CameraSpec::Inline(records) => {
                records.iter().cloned().map(CameraModel::try_from).collect()
            }
            CameraSpec::Ring { ring } => ring_cameras_looking_at(
                ring.count,
                ring.center,
                ring.ring_radius,
                ring.cam_height,
                ring.look_height,
                &ring.intrinsics,
            ),
        }
    }
}

/// Builds a scene. Random placement is uniform over `extent` shrunk by the
/// pedestrian radius, rejecting draws closer than `min_dist` to an earlier
/// foot; the same seed always yields the same scene.
pub fn make_scene(config: &SceneConfig, extent: [f64; 4], seed: u64) -> Result<Scene> {
    let cameras = config.cameras.build()?;
    let pedestrians = match &config.pedestrians {
        PedestrianSpec::Explicit(list) => list
            .iter()
            .map(|p| Pedestrian::new(p.x, p.y, p.radius, p.height))
            .collect::<Result<Vec<_>>>()?,
        PedestrianSpec::Random(rp) => place_random(rp, config.extent.unwrap_or(extent), seed)?,
    };
    Scene::new(pedestrians, cameras, seed)
}

fn place_random(rp: &RandomPlacement, extent: [f64; 4], seed: u64) -> Result<Vec<Pedestrian>> {
    let [x0, y0, x1, y1] = extent;
    if !(x1 > x0 && y1 > y0) {
        return Err(Error::Config(format!("empty placement extent {extent:?}")));
    }
    // keep the whole body footprint inside the extent when it fits
    let margin = |lo: f64, hi: f64| {
        if hi - lo > 2.0 * rp.radius {
            (lo + rp.radius, hi - rp.radius)
        } else {
            (lo, hi)
        }
    };
    let (xa, xb) = margin(x0, x1);
    let (ya, yb) = margin(y0, y1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut placed: Vec<Pedestrian> = Vec::with_capacity(rp.random_count);
    let min_d2 = rp.min_dist * rp.min_dist;
    while placed.len() < rp.random_count {
        let mut rejections = 0;
        loop {
            let x = rng.random_range(xa..xb);
            let y = rng.random_range(ya..yb);
            let clear = placed.iter().all(|p| {
                let (dx, dy) = (p.foot[0] - x, p.foot[1] - y);
                dx * dx + dy * dy >= min_d2
            });
            if clear {
                placed.push(Pedestrian::new(x, y, rp.radius, rp.height)?);
                break;
            }
            rejections += 1;
            if rejections >= MAX_REJECTIONS {
                return Err(Error::PlacementFailure {
                    placed: placed.len(),
                    requested: rp.random_count,
                    attempts: rejections,
                });
            }
        }
    }
    Ok(placed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k() -> Intrinsics {
        Intrinsics::centered(400.0, 400.0, 320, 240)
    }

    fn ring_config(count: usize, min_dist: f64) -> SceneConfig {
        SceneConfig {
            pedestrians: PedestrianSpec::Random(RandomPlacement {
                random_count: count,
                min_dist,
                radius: DEFAULT_RADIUS,
                height: DEFAULT_HEIGHT,
            }),
            cameras: CameraSpec::Ring {
                ring: RingSpec {
                    count: 4,
                    center: [6.0, 18.0],
                    ring_radius: 20.0,
                    cam_height: 5.0,
                    look_height: 1.0,
                    intrinsics: k(),
                },
            },
            seed: None,
            extent: None,
        }
    }

    const WILDTRACK_EXTENT: [f64; 4] = [0.0, 0.0, 36.0, 12.0];

    #[test]
    fn empty_and_deterministic_scenes() {
        let s = make_scene(&ring_config(0, 0.5), WILDTRACK_EXTENT, 1).unwrap();
        assert!(s.pedestrians.is_empty());
        assert!(s.ground_truth().is_empty());
        let a = make_scene(&ring_config(12, 0.5), WILDTRACK_EXTENT, 9).unwrap();
        let b = make_scene(&ring_config(12, 0.5), WILDTRACK_EXTENT, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.ground_truth().len(), 12);
        let c = make_scene(&ring_config(12, 0.5), WILDTRACK_EXTENT, 10).unwrap();
        assert_ne!(a.pedestrians, c.pedestrians);
    }

    #[test]
    fn random_placement_respects_min_distance() {
        let s = make_scene(&ring_config(20, 0.5), WILDTRACK_EXTENT, 4).unwrap();
        let feet = s.ground_truth();
        for (i, &[x, y]) in feet.iter().enumerate() {
            assert!((0.0..36.0).contains(&x) && (0.0..12.0).contains(&y));
            for (j, other) in feet[..i].iter().enumerate() {
                let d = ((other[0] - x).powi(2) + (other[1] - y).powi(2)).sqrt();
                assert!(d >= 0.5, "pair {i},{j} at {d}");
            }
        }
    }

    #[test]
    fn overcrowding_fails() {
        let err = make_scene(&ring_config(50, 5.0), [0.0, 0.0, 4.0, 4.0], 1).unwrap_err();
        assert!(matches!(err, Error::PlacementFailure { requested: 50, .. }));
    }

    #[test]
    fn explicit_ground_truth() {
        let cfg: SceneConfig = serde_json::from_str(
            r#"{"pedestrians":[{"x":3,"y":4}],"cameras":{"ring":{"count":2,"center":[0,0],"ring_radius":5,"cam_height":3,"fx":100,"fy":100,"cx":50,"cy":40,"width":100,"height":80}}}"#,
        )
        .unwrap();
        let s = make_scene(&cfg, [0.0, 0.0, 1.0, 1.0], 0).unwrap();
        assert_eq!(s.ground_truth(), vec![[3.0, 4.0]]);
        assert_eq!(s.pedestrians[0].radius, DEFAULT_RADIUS);
        assert_eq!(s.cameras.len(), 2);
    }

    #[test]
    fn point_membership() {
        let p = Pedestrian::new(1.0, 2.0, 0.3, 1.8).unwrap();
        let s = Scene::new(vec![p], vec![CameraModel::identity(4, 4)], 0).unwrap();
        assert!(s.point_in_pedestrian(&Point3::new(1.0, 2.0, 0.9)));
        assert!(!s.point_in_pedestrian(&Point3::new(1.6, 2.0, 0.9)));
        assert!(s.point_in_pedestrian(&Point3::new(1.0, 2.0, 0.0)));
        assert!(!s.point_in_pedestrian(&Point3::new(1.0, 2.0, -0.01)));
        assert!(!s.point_in_pedestrian(&Point3::new(1.0, 2.0, 1.81)));
    }

    #[test]
    fn membership_matches_segment_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let p = Pedestrian::new(0.5, -0.5, 0.25, 1.7).unwrap();
        let (a, b) = p.axis();
        for _ in 0..1000 {
            let q = Point3::new(
                rng.random_range(-0.5..1.5),
                rng.random_range(-1.5..0.5),
                rng.random_range(-0.5..2.2),
            );
            // projection parameter onto ab, clamped
            let ab = b - a;
            let t = ((q - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
            let d = (q - (a + ab * t)).norm();
            if (d - 0.25).abs() < 1e-12 {
                continue;
            }
            assert_eq!(p.contains(&q), d <= 0.25);
        }
    }

    #[test]
    fn ring_geometry() {
        let cams = ring_cameras(4, [1.0, 2.0], 10.0, 4.0, &k()).unwrap();
        let centers: Vec<Point3<f64>> = cams.iter().map(|c| c.center()).collect();
        for i in 0..4 {
            let a = centers[i] - Point3::new(1.0, 2.0, 4.0);
            let b = centers[(i + 1) % 4] - Point3::new(1.0, 2.0, 4.0);
            assert!((a.norm() - 10.0).abs() < 1e-9);
            assert!((a.angle(&b) - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
        }
        for c in &cams {
            let r = c.rotation();
            assert!((r * r.transpose() - Matrix3::identity()).amax() < 1e-9);
            assert!((r.determinant() - 1.0).abs() < 1e-9);
        }
        let one = ring_cameras(1, [1.0, 2.0], 10.0, 4.0, &k()).unwrap();
        let p = one[0].project_point(&Point3::new(1.0, 2.0, 1.0)).unwrap();
        assert!((p.u - 160.0).abs() < 1e-9 && (p.v - 120.0).abs() < 1e-9);
        assert!(p.depth > 0.0);
        // world up maps to image up
        let above = one[0].project_point(&Point3::new(1.0, 2.0, 2.0)).unwrap();
        assert!(above.v < p.v);
    }

    #[test]
    fn empty_scene_renders_black() {
        let cams = ring_cameras(1, [0.0, 0.0], 8.0, 3.0, &k()).unwrap();
        let s = Scene::new(vec![], cams, 0).unwrap();
        let sil = s.render_view(0, 2).unwrap();
        assert!(sil.map().data().iter().all(|&v| v == 0.0));
        assert!(matches!(
            s.render_view(3, 1),
            Err(Error::InvalidCameraIndex { .. })
        ));
    }

    #[test]
    fn centered_capsule_blob() {
        let cams = ring_cameras(1, [0.0, 0.0], 8.0, 1.0, &k()).unwrap();
        let ped = Pedestrian::new(0.0, 0.0, 0.25, 1.7).unwrap();
        let s = Scene::new(vec![ped], cams, 0).unwrap();
        let sil = s.render_view(0, 1).unwrap();
        let m = sil.map();
        let mid = s.cameras[0]
            .project_point(&Point3::new(0.0, 0.0, 0.85))
            .unwrap();
        assert_eq!(m.get(0, mid.v as usize, mid.u as usize), 1.0);

        let (mut u0, mut u1, mut v0, mut v1) = (usize::MAX, 0, usize::MAX, 0);
        for y in 0..m.height() {
            for x in 0..m.width() {
                let v = m.get(0, y, x);
                assert!(v == 0.0 || v == 1.0);
                if v > 0.0 {
                    u0 = u0.min(x);
                    u1 = u1.max(x);
                    v0 = v0.min(y);
                    v1 = v1.max(y);
                }
            }
        }
        assert!(
            v1 - v0 > 2 * (u1 - u0),
            "blob should be tall: {u0}..{u1} x {v0}..{v1}"
        );
        let mid_u = (u0 + u1) as f64 / 2.0;
        assert!((mid_u - 160.0).abs() <= 1.0);
    }

    // March along the ray in 1 mm steps and test membership directly.
    fn march(p: &Pedestrian, o: &Point3<f64>, d: &Vector3<f64>, far: f64) -> (bool, f64) {
        let (a, b) = p.axis();
        let mut closest = f64::INFINITY;
        let mut hit = false;
        let n = (far / 1e-3) as usize;
        for i in 1..=n {
            let q = o + d * (i as f64 * 1e-3);
            let z = q.z.clamp(a.z, b.z);
            let dist = ((q.x - a.x).powi(2) + (q.y - a.y).powi(2) + (q.z - z).powi(2)).sqrt();
            closest = closest.min(dist);
            hit |= dist <= p.radius;
        }
        (hit, closest)
    }

    #[test]
    fn ray_hits_match_ray_march() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let p = Pedestrian::new(0.0, 0.0, 0.25, 1.7).unwrap();
        let mut checked = 0;
        let mut hits = 0;
        while checked < 200 {
            let o = Point3::new(
                rng.random_range(-4.0..4.0),
                rng.random_range(-4.0..4.0),
                rng.random_range(-1.0..3.0),
            );
            if p.contains(&o) {
                continue;
            }
            // aim near the capsule so that roughly half the rays hit
            let target = Point3::new(
                rng.random_range(-0.5..0.5),
                rng.random_range(-0.5..0.5),
                rng.random_range(-0.3..2.0),
            );
            let d = (target - o).normalize();
            let (marched, closest) = march(&p, &o, &d, 10.0);
            if (closest - p.radius).abs() < 2e-3 {
                // grazing ray: 1 mm steps cannot resolve it
                continue;
            }
            assert_eq!(p.intersects_ray(&o, &d), marched, "origin {o:?} dir {d:?}");
            hits += marched as usize;
            checked += 1;
        }
        assert!(hits > 40 && hits < 160, "{hits} hits");
    }

    #[test]
    fn rays_behind_origin_do_not_count() {
        let p = Pedestrian::new(0.0, 0.0, 0.25, 1.7).unwrap();
        let o = Point3::new(3.0, 0.0, 1.0);
        assert!(p.intersects_ray(&o, &Vector3::new(-1.0, 0.0, 0.0)));
        assert!(!p.intersects_ray(&o, &Vector3::new(1.0, 0.0, 0.0)));
        // straight down onto the head cap
        let above = Point3::new(0.1, 0.0, 5.0);
        assert!(p.intersects_ray(&above, &Vector3::new(0.0, 0.0, -1.0)));
    }

    #[test]
    fn supersampled_values_and_union_monotonicity() {
        let cams = ring_cameras(1, [0.0, 0.0], 6.0, 2.0, &k()).unwrap();
        let a = Pedestrian::new(0.0, 0.0, 0.25, 1.7).unwrap();
        let b = Pedestrian::new(0.4, 0.7, 0.25, 1.7).unwrap();
        let one = Scene::new(vec![a], cams.clone(), 0)
            .unwrap()
            .render_view(0, 3)
            .unwrap();
        let two = Scene::new(vec![a, b], cams, 0)
            .unwrap()
            .render_view(0, 3)
            .unwrap();
        let mut soft = 0;
        for (x, y) in one.map().data().iter().zip(two.map().data()) {
            assert!((0.0..=1.0).contains(x));
            assert!(y >= x);
            soft += (*x > 0.0 && *x < 1.0) as usize;
        }
        assert!(soft > 0);
    }
}
