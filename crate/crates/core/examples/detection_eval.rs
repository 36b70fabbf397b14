//! Decode peaks from a heatmap and score them against ground truth.

use pvh_detect::detect::decode_detections;
use pvh_detect::grid::GridSpec;
use pvh_detect::metrics::{match_detections, EvalReport, Matching};
use pvh_detect::volume::BevMap;

fn main() -> pvh_detect::Result<()> {
    let grid = GridSpec::new([0.0, 0.0, 0.0], 0.1, 0.25, 40, 30, 8)?;
    let mut heat = BevMap::zeros(1, 30, 40);
    // two blobs and one weak bump below threshold
    for (cy, cx, peak) in [(10usize, 10usize, 0.9f32), (20, 30, 0.7), (5, 35, 0.3)] {
        for dy in -2i32..=2 {
            for dx in -2i32..=2 {
                let v = peak * (1.0 - 0.15 * (dy.abs() + dx.abs()) as f32);
                heat.set(0, (cy as i32 + dy) as usize, (cx as i32 + dx) as usize, v);
            }
        }
    }
    let dets = decode_detections(&heat, &grid, 0.4, 1, None)?;
    for d in &dets {
        println!(
            "detection at ({:.2}, {:.2}) score {:.2}",
            d.position[0], d.position[1], d.score
        );
    }

    let gt = [[1.0, 1.1], [3.2, 2.0], [0.5, 2.5]];
    for matching in [Matching::Optimal, Matching::Greedy] {
        let m = match_detections(&dets, &gt, 0.5, matching)?;
        println!(
            "\n{matching} matching:\n{}",
            EvalReport::from_match(&m, 0.5)?
        );
    }
    Ok(())
}
