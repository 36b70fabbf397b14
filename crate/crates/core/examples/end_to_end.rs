//! The command pipeline on a synthetic scene: simulate, reconstruct,
//! detect, evaluate and render, then the same with noisy calibration.
//! Outputs go to `end_to_end_out/`.

use std::path::PathBuf;

use pvh_detect::io::commands::{cmd_detect, cmd_eval, cmd_reconstruct, cmd_render, cmd_simulate};
use pvh_detect::io::config::{GridChoice, RunConfig, SceneSource};
use pvh_detect::scene::{benchmark_grid, SceneConfig};

fn main() -> pvh_detect::Result<()> {
    let root = PathBuf::from("end_to_end_out");
    let clean = RunConfig {
        grid: GridChoice::Explicit(benchmark_grid(0.1)?),
        scene: Some(SceneSource::Inline(SceneConfig::ring_benchmark(15, 1.0, 6))),
        out: root.join("clean"),
        seed: Some(2024),
        ..RunConfig::default()
    };
    let scene = cmd_simulate(&clean)?;
    println!(
        "{} pedestrians, {} cameras",
        scene.pedestrians.len(),
        scene.cameras.len()
    );

    let noisy = RunConfig {
        input: Some(clean.out.clone()),
        out: root.join("noisy"),
        calib_noise: 0.2,
        ..clean.clone()
    };
    for (label, cfg) in [
        ("clean calibration", &clean),
        ("0.2 m camera noise", &noisy),
    ] {
        let manifest = cmd_reconstruct(cfg)?;
        let stage = RunConfig {
            input: Some(cfg.out.clone()),
            gt: Some(clean.out.join("gt.jsonl")),
            ..cfg.clone()
        };
        let dets = cmd_detect(&stage)?;
        let report = cmd_eval(&stage)?;
        let overlay = cmd_render(&stage, "overlay")?;
        println!(
            "\n{label}: hull {} voxels, {} detections, overlay {}\n{report}",
            manifest.visual_hull_voxels,
            dets.len(),
            overlay.display()
        );
    }
    Ok(())
}
