//! The five subcommands. Each reads its inputs from `RunConfig::input_dir`
//! (or explicit paths) and writes into `RunConfig::out`.
//!
//! Layout of a run directory:
//! `silhouettes/<camera>.pgm`, `calibration.json`, `gt.jsonl`, `scene.json`
//! from `simulate`; `bev.pgm`, `bev.raw` (+ `bev.json`), optional
//! `fused_bev.raw`, `manifest.json` from `reconstruct`; `detections.jsonl`
//! from `detect`; `eval.json` from `eval`; `overlay.ppm` from `render`.

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::camera::{CalibrationRecord, CameraModel};
use crate::detect::decode_detections;
use crate::detect::Detection;
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::hull::Silhouette;
use crate::io::config::RunConfig;
use crate::io::formats::{
    detections_to_records, group_by_frame, points_to_records, read_bev_raw, read_calibration,
    read_jsonl, read_pgm_map, read_volume_raw, write_bev_pgm16, write_bev_raw, write_calibration,
    write_json, write_jsonl, write_pgm8, write_ppm, PointRecord,
};
use crate::metrics::{match_detections, EvalReport, MatchResult};
use crate::pipeline::reconstruct;
use crate::scene::{make_scene, CameraSpec, PedestrianRecord, PedestrianSpec, Scene, SceneConfig};
use crate::volume::BevMap;

pub const SILHOUETTE_DIR: &str = "silhouettes";
pub const CALIBRATION_FILE: &str = "calibration.json";
pub const GT_FILE: &str = "gt.jsonl";
pub const SCENE_FILE: &str = "scene.json";
pub const BEV_PGM: &str = "bev.pgm";
pub const BEV_RAW: &str = "bev.raw";
pub const FUSED_BEV_RAW: &str = "fused_bev.raw";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const DETECTIONS_FILE: &str = "detections.jsonl";
pub const EVAL_FILE: &str = "eval.json";
pub const OVERLAY_FILE: &str = "overlay.ppm";

pub fn silhouette_path(dir: &Path, camera: &str) -> PathBuf {
    dir.join(SILHOUETTE_DIR).join(format!("{camera}.pgm"))
}

fn check_unique_names(cameras: &[CameraModel]) -> Result<()> {
    let mut seen = HashSet::new();
    for c in cameras {
        if !seen.insert(c.name()) {
            return Err(Error::Config(format!(
                "cameras: duplicate camera name `{}`",
                c.name()
            )));
        }
    }
    Ok(())
}

/// Renders the configured scene and writes silhouettes, calibration, ground
/// truth and the fully resolved scene.
pub fn cmd_simulate(config: &RunConfig) -> Result<Scene> {
    config.validate()?;
    let grid = config.grid_spec()?;
    let scene_cfg = config.scene_config()?;
    let seed = config.effective_seed(Some(&scene_cfg));
    let scene = make_scene(&scene_cfg, grid.ground_extent(), seed)?;
    check_unique_names(&scene.cameras)?;
    let out = &config.out;
    for (i, cam) in scene.cameras.iter().enumerate() {
        let sil = scene.render_view(i, config.supersample)?;
        write_pgm8(&silhouette_path(out, cam.name()), sil.map())?;
    }
    write_calibration(&out.join(CALIBRATION_FILE), &scene.cameras)?;
    write_jsonl(
        &out.join(GT_FILE),
        &points_to_records(config.frame, &scene.ground_truth()),
    )?;
    let resolved = SceneConfig {
        pedestrians: PedestrianSpec::Explicit(
            scene
                .pedestrians
                .iter()
                .map(|p| PedestrianRecord {
                    x: p.foot[0],
                    y: p.foot[1],
                    radius: p.radius,
                    height: p.height,
                })
                .collect(),
        ),
        cameras: CameraSpec::Inline(scene.cameras.iter().map(CalibrationRecord::from).collect()),
        seed: Some(seed),
        extent: scene_cfg.extent,
    };
    write_json(&out.join(SCENE_FILE), &resolved)?;
    Ok(scene)
}

/// Shifts every camera center by `noise` meters in a seeded random direction.
pub fn perturb_cameras(cameras: &[CameraModel], noise: f64, seed: u64) -> Vec<CameraModel> {
    if noise == 0.0 {
        return cameras.to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    cameras
        .iter()
        .map(|c| {
            let theta = rng.random_range(0.0..std::f64::consts::TAU);
            let cos_phi: f64 = rng.random_range(-1.0..1.0);
            let sin_phi = (1.0 - cos_phi * cos_phi).sqrt();
            let dir = Vector3::new(sin_phi * theta.cos(), sin_phi * theta.sin(), cos_phi);
            c.perturb_extrinsics(&(dir * noise))
        })
        .collect()
}

/// Everything `reconstruct` used, loadable again as a [`RunConfig`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(flatten)]
    pub config: RunConfig,
    pub resolved_grid: GridSpec,
    pub blur_sigma_used: f64,
    pub cameras: Vec<String>,
    pub visual_hull_voxels: usize,
    pub bev_max: f32,
}

pub fn cmd_reconstruct(config: &RunConfig) -> Result<Manifest> {
    config.validate()?;
    let grid = config.grid_spec()?;
    let params = config.hull_params();
    let input = config.input_dir();
    let cameras = read_calibration(&input.join(CALIBRATION_FILE))?;
    check_unique_names(&cameras)?;
    let silhouettes = cameras
        .iter()
        .map(|c| {
            let map = read_pgm_map(&silhouette_path(input, c.name()))?;
            Silhouette::new(map, c.name())
                .map_err(|e| Error::Data(format!("camera {}: {e}", c.name())))
        })
        .collect::<Result<Vec<_>>>()?;
    let cameras = perturb_cameras(&cameras, config.calib_noise, config.seed.unwrap_or(0));
    let features = config
        .features
        .as_deref()
        .map(read_volume_raw)
        .transpose()?;
    let rec = reconstruct(&silhouettes, &cameras, &grid, &params, features.as_ref())?;

    let out = &config.out;
    write_bev_pgm16(&out.join(BEV_PGM), &rec.bev)?;
    write_bev_raw(&out.join(BEV_RAW), &rec.bev, Some(&grid))?;
    if let Some(fused) = &rec.fused_bev {
        write_bev_raw(&out.join(FUSED_BEV_RAW), fused, Some(&grid))?;
    }
    let manifest = Manifest {
        config: config.clone(),
        resolved_grid: grid,
        blur_sigma_used: params.sigma(),
        cameras: cameras.iter().map(|c| c.name().to_string()).collect(),
        visual_hull_voxels: rec.vh.occupied(),
        bev_max: rec.bev.max_value(),
    };
    write_json(&out.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

/// Loads the BEV from the input directory and checks it against the grid
/// stored in its sidecar, falling back to the configured grid.
fn load_bev(config: &RunConfig) -> Result<(BevMap, GridSpec)> {
    let (bev, sidecar) = read_bev_raw(&config.input_dir().join(BEV_RAW))?;
    let grid = match sidecar.grid {
        Some(g) => g,
        None => config.grid_spec()?,
    };
    if bev.dims() != (grid.ny, grid.nx) {
        return Err(Error::Data(format!(
            "BEV is {:?} but grid is {}x{}",
            bev.dims(),
            grid.ny,
            grid.nx
        )));
    }
    Ok((bev, grid))
}

pub fn cmd_detect(config: &RunConfig) -> Result<Vec<Detection>> {
    config.validate()?;
    let (bev, grid) = load_bev(config)?;
    let heat = if bev.channels() == 1 {
        bev
    } else {
        BevMap::from_data(1, grid.ny, grid.nx, bev.channel(0).to_vec())?
    };
    let dets = decode_detections(&heat, &grid, config.threshold, config.nms_radius, None)?;
    write_jsonl(
        &config.out.join(DETECTIONS_FILE),
        &detections_to_records(config.frame, &dets),
    )?;
    Ok(dets)
}

fn detections_path(config: &RunConfig) -> PathBuf {
    config
        .detections
        .clone()
        .unwrap_or_else(|| config.input_dir().join(DETECTIONS_FILE))
}

fn gt_path(config: &RunConfig) -> PathBuf {
    config
        .gt
        .clone()
        .unwrap_or_else(|| config.input_dir().join(GT_FILE))
}

/// Matches per frame and accumulates counts over frames. A frame that has
/// detections but no ground-truth entry is an error; ground-truth frames
/// without detections count as misses.
pub fn evaluate_records(
    dets: &[PointRecord],
    gts: &[PointRecord],
    t: f64,
    matching: crate::metrics::Matching,
) -> Result<EvalReport> {
    let det_frames = group_by_frame(dets);
    let gt_frames = group_by_frame(gts);
    if let Some(f) = det_frames.keys().find(|f| !gt_frames.contains_key(f)) {
        return Err(Error::Data(format!(
            "detections contain frame {f} absent from ground truth"
        )));
    }
    let mut total = MatchResult::from_counts(0, 0, 0);
    for (frame, gt) in &gt_frames {
        let frame_dets: Vec<Detection> = det_frames
            .get(frame)
            .map(|v| {
                v.iter()
                    .map(|r| Detection {
                        position: [r.x, r.y],
                        score: r.score.unwrap_or(1.0),
                    })
                    .collect()
            })
            .unwrap_or_default();
        let gt_points: Vec<[f64; 2]> = gt.iter().map(|r| [r.x, r.y]).collect();
        total.merge(match_detections(&frame_dets, &gt_points, t, matching)?);
    }
    EvalReport::from_match(&total, t)
}

pub fn cmd_eval(config: &RunConfig) -> Result<EvalReport> {
    config.validate()?;
    let dets = read_jsonl(&detections_path(config))?;
    let gts = read_jsonl(&gt_path(config))?;
    let report = evaluate_records(&dets, &gts, config.match_distance, config.matching)?;
    write_json(&config.out.join(EVAL_FILE), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderKind {
    Bev,
    Overlay,
}

impl FromStr for RenderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bev" => Ok(RenderKind::Bev),
            "overlay" => Ok(RenderKind::Overlay),
            other => Err(Error::UnknownMode(other.to_string())),
        }
    }
}

pub const GT_COLOR: [u8; 3] = [0, 255, 0];
pub const DETECTION_COLOR: [u8; 3] = [255, 0, 0];

/// Image pixel of a ground position: one pixel per cell, row 0 at the
/// largest Y index, matching the BEV PGM.
pub fn overlay_pixel(grid: &GridSpec, x: f64, y: f64) -> Option<(usize, usize)> {
    grid.ground_cell(x, y)
        .map(|(iy, ix)| (grid.ny - 1 - iy, ix))
}

/// BEV in gray with ground-truth crosses and detection dots on top.
pub fn render_overlay(
    bev: &BevMap,
    grid: &GridSpec,
    dets: &[PointRecord],
    gts: &[PointRecord],
) -> Vec<[u8; 3]> {
    let (ny, nx) = (grid.ny, grid.nx);
    let scale = bev.max_value().max(f32::MIN_POSITIVE);
    let mut rgb: Vec<[u8; 3]> = (0..ny * nx)
        .map(|i| {
            let (row, ix) = (i / nx, i % nx);
            let g = (bev.get(0, ny - 1 - row, ix) / scale * 255.0)
                .round()
                .clamp(0.0, 255.0) as u8;
            [g, g, g]
        })
        .collect();
    let mut put = |row: isize, col: isize, color: [u8; 3]| {
        if row >= 0 && col >= 0 && (row as usize) < ny && (col as usize) < nx {
            rgb[row as usize * nx + col as usize] = color;
        }
    };
    for g in gts {
        if let Some((r, c)) = overlay_pixel(grid, g.x, g.y) {
            let (r, c) = (r as isize, c as isize);
            for d in -2..=2 {
                put(r + d, c, GT_COLOR);
                put(r, c + d, GT_COLOR);
            }
        }
    }
    for d in dets {
        if let Some((r, c)) = overlay_pixel(grid, d.x, d.y) {
            let (r, c) = (r as isize, c as isize);
            for (dr, dc) in [(0, 0), (-1, 0), (1, 0), (0, -1), (0, 1)] {
                put(r + dr, c + dc, DETECTION_COLOR);
            }
        }
    }
    rgb
}

pub fn cmd_render(config: &RunConfig, kind: &str) -> Result<PathBuf> {
    let kind: RenderKind = kind.parse()?;
    config.validate()?;
    let (bev, grid) = load_bev(config)?;
    match kind {
        RenderKind::Bev => {
            let path = config.out.join(BEV_PGM);
            write_bev_pgm16(&path, &bev)?;
            Ok(path)
        }
        RenderKind::Overlay => {
            let dets = read_jsonl(&detections_path(config))?;
            let gt_file = gt_path(config);
            let gts = if gt_file.exists() {
                read_jsonl(&gt_file)?
            } else {
                Vec::new()
            };
            let frame_of = |r: &&PointRecord| r.frame == config.frame;
            let dets: Vec<PointRecord> = dets.iter().filter(frame_of).copied().collect();
            let gts: Vec<PointRecord> = gts.iter().filter(frame_of).copied().collect();
            let rgb = render_overlay(&bev, &grid, &dets, &gts);
            let path = config.out.join(OVERLAY_FILE);
            write_ppm(&path, grid.nx, grid.ny, &rgb)?;
            Ok(path)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::Matching;

    fn rec(frame: i64, x: f64, y: f64) -> PointRecord {
        PointRecord {
            frame,
            x,
            y,
            score: Some(0.9),
        }
    }

    #[test]
    fn eval_accumulates_frames() {
        let gts = [rec(0, 0.0, 0.0), rec(0, 5.0, 5.0), rec(1, 1.0, 1.0)];
        // frame 0: one hit and one miss; frame 1: one hit and one false alarm
        let dets = [rec(0, 0.1, 0.0), rec(1, 1.0, 1.0), rec(1, 9.0, 9.0)];
        let r = evaluate_records(&dets, &gts, 0.5, Matching::Optimal).unwrap();
        assert_eq!((r.tp, r.fp, r.fn_, r.n_gt), (2, 1, 1, 3));
        assert!((r.moda - (1.0 - 2.0 / 3.0)).abs() < 1e-12);
        assert!((r.modp - (0.8 + 1.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn eval_rejects_unknown_frames() {
        let gts = [rec(0, 0.0, 0.0)];
        let dets = [rec(3, 0.0, 0.0)];
        let err = evaluate_records(&dets, &gts, 0.5, Matching::Optimal).unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }

    #[test]
    fn render_kind_parse() {
        assert_eq!("bev".parse::<RenderKind>().unwrap(), RenderKind::Bev);
        assert!(matches!(
            "heat".parse::<RenderKind>(),
            Err(Error::UnknownMode(_))
        ));
    }

    #[test]
    fn overlay_marks_cells() {
        let grid = GridSpec::new([0.0; 3], 0.1, 0.25, 20, 10, 8).unwrap();
        let bev = BevMap::zeros(1, 10, 20);
        let gt = rec(0, 0.55, 0.35);
        let det = rec(0, 1.55, 0.75);
        let rgb = render_overlay(&bev, &grid, &[det], &[gt]);
        let (r, c) = overlay_pixel(&grid, det.x, det.y).unwrap();
        assert_eq!((r, c), (10 - 1 - 7, 15));
        assert_eq!(rgb[r * 20 + c], DETECTION_COLOR);
        let (r, c) = overlay_pixel(&grid, gt.x, gt.y).unwrap();
        assert_eq!(rgb[r * 20 + c], GT_COLOR);
        assert_eq!(rgb[0], [0, 0, 0]);
    }

    #[test]
    fn perturbation_moves_centers_by_noise() {
        let cams = vec![
            CameraModel::identity(10, 10),
            CameraModel::identity(10, 10).with_name("b"),
        ];
        let moved = perturb_cameras(&cams, 0.2, 4);
        for (a, b) in cams.iter().zip(&moved) {
            assert!(((a.center() - b.center()).norm() - 0.2).abs() < 1e-12);
        }
        assert_eq!(perturb_cameras(&cams, 0.2, 4), moved);
        assert_eq!(perturb_cameras(&cams, 0.0, 4), cams);
    }
}
