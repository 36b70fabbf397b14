//! End-to-end acceptance checks, one line per criterion. Runs as a plain
//! binary so the report prints whether or not anything fails.

mod common;

use std::time::{Duration, Instant};

use nalgebra::Point3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pvh_detect::detect::Detection;
use pvh_detect::grid::{GridSpec, BENCHMARK_CELL};
use pvh_detect::hull::{
    fuse, probabilistic_visual_hull, visual_hull, FusionMode, OccupancyKind, OccupancyVolume,
};
use pvh_detect::io::commands::{cmd_detect, cmd_eval, cmd_reconstruct, cmd_simulate};
use pvh_detect::io::config::{GridChoice, RunConfig, SceneSource};
use pvh_detect::metrics::{
    match_detections, moda, modp, precision_recall, MatchResult, MatchedPair, Matching,
};
use pvh_detect::pipeline::{reconstruct, HullParams};
use pvh_detect::pull::{bilinear_sample, pull_view};
use pvh_detect::scene::{
    benchmark_grid, look_at, make_scene, CameraSpec, Intrinsics, Scene, SceneConfig,
};
use pvh_detect::volume::{FeatureVolume, PlanarMap};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(limit: Duration, elapsed: Duration) -> bool {
    elapsed < limit
}

fn grid_fidelity() -> Outcome {
    let t0 = Instant::now();
    let w = GridSpec::wildtrack(1).unwrap();
    let m = GridSpec::multiviewx(1).unwrap();
    let elapsed = t0.elapsed();
    let ok = (w.ny, w.nx) == (480, 1440)
        && (m.ny, m.nx) == (640, 1000)
        && w.cell_xy == BENCHMARK_CELL
        && m.cell_xy == BENCHMARK_CELL
        && BENCHMARK_CELL == 0.025;
    outcome(
        ok && within(Duration::from_millis(1), elapsed),
        format!(
            "wildtrack {}x{}, multiviewx {}x{}, {elapsed:?}",
            w.ny, w.nx, m.ny, m.nx
        ),
    )
}

fn sampling_oracle() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_bilinear = 0.0f64;
    for _ in 0..10_000 {
        let (h, w) = (rng.random_range(1..12), rng.random_range(1..12));
        let c = rng.random_range(1..3);
        let map = PlanarMap::new(
            c,
            h,
            w,
            (0..c * h * w)
                .map(|_| rng.random_range(-10.0..10.0))
                .collect(),
        )
        .unwrap();
        let u = rng.random_range(-1.5..w as f64 + 1.5);
        let v = rng.random_range(-1.5..h as f64 + 1.5);
        let ch = rng.random_range(0..c);
        worst_bilinear = worst_bilinear
            .max((bilinear_sample(&map, u, v, ch) - common::four_corner(&map, u, v, ch)).abs());
    }

    // 20 x 4 x 20 grid seen partly by a 96 x 72 camera
    let grid = GridSpec::new([-1.0, -1.0, 0.0], 0.1, 0.5, 20, 20, 4).unwrap();
    let mut worst_pull = 0.0f64;
    let mut validity_agrees = true;
    let mut valid_total = 0;
    for _ in 0..5 {
        let eye = Point3::new(
            rng.random_range(-4.0..4.0),
            rng.random_range(-4.0..4.0),
            rng.random_range(2.0..4.0),
        );
        let target = Point3::new(
            rng.random_range(-0.5..0.5),
            rng.random_range(-0.5..0.5),
            0.5,
        );
        let cam = look_at(
            "c",
            eye,
            target,
            &Intrinsics::centered(150.0, 150.0, 96, 72),
        )
        .unwrap();
        let map = PlanarMap::new(
            2,
            72,
            96,
            (0..2 * 72 * 96)
                .map(|_| rng.random_range(0.0..1.0))
                .collect(),
        )
        .unwrap();
        let (vol, val) = pull_view(&map, &cam, &grid);
        let (oracle, oracle_valid) = common::pull_oracle(&map, &cam, &grid);
        validity_agrees &= val.data() == oracle_valid.as_slice();
        valid_total += val.count();
        for (c, want_ch) in oracle.iter().enumerate() {
            for (got, want) in vol.channel(c).iter().zip(want_ch) {
                // volumes store f32, so compare against the oracle at storage precision
                worst_pull = worst_pull.max((*got as f64 - *want as f32 as f64).abs());
            }
        }
    }
    let elapsed = t0.elapsed();
    let partial = valid_total > 0 && valid_total < 5 * grid.voxel_count();
    outcome(
        worst_bilinear <= 1e-12 && worst_pull <= 1e-10 && validity_agrees && partial && within(Duration::from_secs(5), elapsed),
        format!(
            "bilinear max err {worst_bilinear:.1e}, pull max err {worst_pull:.1e}, validity agrees {validity_agrees} ({valid_total}/{} valid), {elapsed:?}",
            5 * grid.voxel_count()
        ),
    )
}

struct HullScene {
    scene: Scene,
    grid: GridSpec,
}

/// 20 scenes with 4 to 7 ring cameras at varied radius and height, 1 to 20
/// pedestrians and grid cells from 0.1 m to 0.25 m.
fn hull_scenes() -> Vec<HullScene> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    (0..20)
        .map(|s| {
            let cams = rng.random_range(4..=7);
            let peds = rng.random_range(1..=20);
            let mut cfg = SceneConfig::ring_benchmark(peds, 0.6, cams);
            if let CameraSpec::Ring { ring } = &mut cfg.cameras {
                ring.ring_radius = rng.random_range(10.0..18.0);
                ring.cam_height = rng.random_range(5.0..12.0);
                ring.intrinsics = Intrinsics::centered(400.0, 400.0, 480, 360);
            }
            let cell = [0.1, 0.15, 0.2, 0.25][rng.random_range(0..4)];
            let grid = benchmark_grid(cell).unwrap();
            let scene = make_scene(&cfg, grid.ground_extent(), 100 + s).unwrap();
            HullScene { scene, grid }
        })
        .collect()
}

struct HullRun {
    occ: Vec<FeatureVolume>,
    validity: Vec<pvh_detect::volume::ValidityVolume>,
    counts: Vec<u32>,
    vh: OccupancyVolume,
}

fn binary_hull(hs: &HullScene) -> HullRun {
    let sils = common::render_all(&hs.scene, 1);
    let rec = reconstruct(
        &sils,
        &hs.scene.cameras,
        &hs.grid,
        &HullParams::exact(),
        None,
    )
    .unwrap();
    HullRun {
        occ: rec.occ_views,
        validity: rec.validity,
        counts: rec.view_counts,
        vh: rec.vh,
    }
}

fn conservativeness(scenes: &[HullScene], runs: &[HullRun]) -> Outcome {
    let (mut checked, mut carved) = (0usize, 0usize);
    for (hs, run) in scenes.iter().zip(runs) {
        let n = hs.scene.cameras.len() as u32;
        for i in 0..hs.grid.voxel_count() {
            if run.counts[i] != n {
                continue;
            }
            let idx = hs.grid.unlinear(i);
            if hs
                .scene
                .point_in_pedestrian(&hs.grid.voxel_center(idx).unwrap())
            {
                checked += 1;
                if run.vh.data()[i] != 1.0 {
                    carved += 1;
                }
            }
        }
    }
    outcome(
        checked > 0 && carved == 0,
        format!("{checked} interior voxels checked, {carved} carved away"),
    )
}

fn view_monotonicity(scenes: &[HullScene], runs: &[HullRun]) -> Outcome {
    let (mut subsets, mut violations) = (0usize, 0usize);
    for (hs, run) in scenes.iter().zip(runs) {
        let n = run.occ.len();
        let all_valid: Vec<bool> = run.counts.iter().map(|&c| c as usize == n).collect();
        for mask in 1..(1u32 << n) - 1 {
            let pick = |i: &usize| mask & (1 << i) != 0;
            let occ: Vec<_> = (0..n).filter(pick).map(|i| run.occ[i].clone()).collect();
            let val: Vec<_> = (0..n)
                .filter(pick)
                .map(|i| run.validity[i].clone())
                .collect();
            let sub = visual_hull(&occ, &val, 0.0, 1).unwrap();
            subsets += 1;
            violations += (0..hs.grid.voxel_count())
                .filter(|&i| all_valid[i] && run.vh.data()[i] == 1.0 && sub.data()[i] != 1.0)
                .count();
        }
    }
    outcome(
        violations == 0,
        format!("{subsets} strict subsets, {violations} violations"),
    )
}

fn binary_collapse(scenes: &[HullScene]) -> Outcome {
    let mut exact_mismatch = 0usize;
    let mut dominance_violations = 0usize;
    let mut soft_voxels = 0usize;
    for hs in scenes {
        let (occ, val) = common::exact_binary_views(&hs.scene, &hs.grid);
        let vh = visual_hull(&occ, &val, 0.0, 1).unwrap();
        let pvh = probabilistic_visual_hull(&occ, &val, &vh).unwrap();
        exact_mismatch += vh
            .data()
            .iter()
            .zip(pvh.data())
            .filter(|(a, b)| a != b)
            .count();

        let sils = common::render_all(&hs.scene, 1);
        for tau in [0.0, 0.01] {
            let params = HullParams {
                tau,
                ..HullParams::default()
            };
            let rec = reconstruct(&sils, &hs.scene.cameras, &hs.grid, &params, None).unwrap();
            dominance_violations += rec
                .vh
                .data()
                .iter()
                .zip(rec.pvh.data())
                .filter(|(&v, &p)| !(0.0 <= p && p <= v))
                .count();
            soft_voxels += rec
                .pvh
                .data()
                .iter()
                .filter(|&&p| p > 0.0 && p < 1.0)
                .count();
        }
    }
    outcome(
        exact_mismatch == 0 && dominance_violations == 0 && soft_voxels > 0,
        format!(
            "binary PVH != VH at {exact_mismatch} voxels; blurred 0<=PVH<=VH violated at {dominance_violations} ({soft_voxels} fractional voxels)"
        ),
    )
}

struct SceneScore {
    moda: f64,
    modp: f64,
}

fn bench_config(dir: &std::path::Path, seed: u64) -> RunConfig {
    RunConfig {
        grid: GridChoice::Explicit(benchmark_grid(0.1).unwrap()),
        scene: Some(SceneSource::Inline(SceneConfig::ring_benchmark(20, 1.0, 6))),
        out: dir.to_path_buf(),
        seed: Some(seed),
        ..RunConfig::default()
    }
}

fn detect_and_eval(config: &RunConfig) -> SceneScore {
    cmd_reconstruct(config).unwrap();
    let stage = RunConfig {
        input: Some(config.out.clone()),
        ..config.clone()
    };
    cmd_detect(&stage).unwrap();
    let report = cmd_eval(&RunConfig {
        gt: Some(config.input_dir().join("gt.jsonl")),
        ..stage
    })
    .unwrap();
    SceneScore {
        moda: report.moda,
        modp: report.modp,
    }
}

fn end_to_end(root: &std::path::Path) -> (Outcome, Vec<SceneScore>) {
    let t0 = Instant::now();
    let mut scores = Vec::new();
    for seed in 0..10 {
        let cfg = bench_config(&root.join(format!("clean{seed}")), seed);
        cmd_simulate(&cfg).unwrap();
        scores.push(detect_and_eval(&cfg));
    }
    let elapsed = t0.elapsed();
    let ok = scores.iter().all(|s| s.moda == 1.0 && s.modp >= 0.8);
    let worst_modp = scores.iter().map(|s| s.modp).fold(f64::INFINITY, f64::min);
    let worst_moda = scores.iter().map(|s| s.moda).fold(f64::INFINITY, f64::min);
    (
        outcome(
            ok && within(Duration::from_secs(120), elapsed),
            format!(
                "10 scenes of 20: min MODA {worst_moda:.3}, min MODP {worst_modp:.3}, {elapsed:?}"
            ),
        ),
        scores,
    )
}

fn degradation(root: &std::path::Path, clean: &[SceneScore]) -> Outcome {
    let mut noisy = Vec::new();
    for seed in 0..10 {
        let clean_dir = root.join(format!("clean{seed}"));
        let cfg = RunConfig {
            input: Some(clean_dir),
            calib_noise: 0.2,
            ..bench_config(&root.join(format!("noisy{seed}")), seed)
        };
        noisy.push(detect_and_eval(&cfg));
    }
    let mean = |s: &[SceneScore]| s.iter().map(|x| x.modp).sum::<f64>() / s.len() as f64;
    let (c, n) = (mean(clean), mean(&noisy));
    outcome(
        n < c,
        format!("mean MODP clean {c:.4} vs 0.2 m noise {n:.4}"),
    )
}

fn fusion_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (c, ny, nz, nx) = (3, 5, 4, 6);
    let n = ny * nz * nx;
    let f = FeatureVolume::from_data(
        c,
        ny,
        nz,
        nx,
        (0..c * n).map(|_| rng.random_range(-2.0..2.0)).collect(),
    )
    .unwrap();
    let ones = OccupancyVolume::new(
        FeatureVolume::from_data(1, ny, nz, nx, vec![1.0; n]).unwrap(),
        OccupancyKind::Binary,
    )
    .unwrap();
    let p_data: Vec<f32> = (0..n).map(|_| rng.random_range(0.0..=1.0)).collect();
    let p = OccupancyVolume::new(
        FeatureVolume::from_data(1, ny, nz, nx, p_data.clone()).unwrap(),
        OccupancyKind::Probabilistic,
    )
    .unwrap();

    let mult_identity = fuse(&f, &ones, FusionMode::Mult).unwrap() == f;
    let mc = fuse(&f, &p, FusionMode::MultConcat).unwrap();
    let ma = fuse(&f, &p, FusionMode::MultAdd).unwrap();
    let mut worst = 0.0f64;
    for ch in 0..c {
        for (i, &pv) in p_data.iter().enumerate().take(n) {
            let want = f.channel(ch)[i] as f64 * (1.0 + pv as f64);
            worst = worst.max((ma.channel(ch)[i] as f64 - want).abs());
        }
    }
    outcome(
        mult_identity && mc.channels() == 2 * c && worst <= 1e-6,
        format!(
            "mult identity {mult_identity}, mult_concat channels {}, mult_add max err {worst:.1e}",
            mc.channels()
        ),
    )
}

fn metric_formulas() -> Outcome {
    let m = MatchResult::from_counts(8, 1, 2);
    let moda_ok = moda(&m).unwrap() == 0.7;
    let one = MatchResult::from_pairs(
        vec![MatchedPair {
            det: 0,
            gt: 0,
            distance: 0.25,
        }],
        1,
        1,
    );
    let modp_ok = modp(&one, 0.5) == 0.5;
    let (precision, _) = precision_recall(&MatchResult::from_counts(9, 1, 0)).unwrap();
    let (_, recall) = precision_recall(&MatchResult::from_counts(8, 0, 2)).unwrap();
    let hand = moda_ok && modp_ok && precision == 0.9 && recall == 0.8;

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut disagreements = 0;
    for _ in 0..500 {
        let nd = rng.random_range(0..=6);
        let ng = rng.random_range(0..=6);
        // dense 2 m box so gating and competition both occur
        let dets: Vec<Detection> = (0..nd)
            .map(|_| Detection {
                position: [rng.random_range(0.0..2.0), rng.random_range(0.0..2.0)],
                score: 1.0,
            })
            .collect();
        let gts: Vec<[f64; 2]> = (0..ng)
            .map(|_| [rng.random_range(0.0..2.0), rng.random_range(0.0..2.0)])
            .collect();
        let m = match_detections(&dets, &gts, 0.5, Matching::Optimal).unwrap();
        let (count, total) = common::exhaustive_matching(&dets, &gts, 0.5);
        if m.tp != count || (m.total_distance() - total).abs() > 1e-9 {
            disagreements += 1;
        }
    }
    outcome(
        hand && disagreements == 0,
        format!(
            "hand cases moda {moda_ok} modp {modp_ok} precision {precision} recall {recall}; {disagreements}/500 matching disagreements"
        ),
    )
}

fn main() {
    let tmp = tempfile::tempdir().expect("temp dir");
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    results.push(("1 grid fidelity", grid_fidelity()));
    results.push(("2 sampling oracle", sampling_oracle()));

    let t0 = Instant::now();
    let scenes = hull_scenes();
    let runs: Vec<HullRun> = scenes.iter().map(binary_hull).collect();
    let mut c3 = conservativeness(&scenes, &runs);
    let elapsed = t0.elapsed();
    c3.pass &= within(Duration::from_secs(60), elapsed);
    c3.detail.push_str(&format!(", {elapsed:?}"));
    results.push(("3 hull conservativeness", c3));
    results.push(("4 view monotonicity", view_monotonicity(&scenes, &runs)));
    results.push(("5 binary collapse", binary_collapse(&scenes)));

    let (c6, clean) = end_to_end(tmp.path());
    results.push(("6 end-to-end detection", c6));
    results.push(("7 fusion algebra", fusion_algebra()));
    results.push(("8 metric formulas", metric_formulas()));
    results.push(("9 calibration degradation", degradation(tmp.path(), &clean)));

    let mut failed = 0;
    for (name, o) in &results {
        println!(
            "[{}] {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
