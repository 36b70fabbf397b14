//! Random pedestrians, a camera ring and rendered silhouettes, written as
//! PGM images into `synthetic_scene_out/`.

use std::path::Path;

use pvh_detect::io::formats::{write_calibration, write_pgm8};
use pvh_detect::scene::{benchmark_grid, make_scene, SceneConfig};

fn main() -> pvh_detect::Result<()> {
    let grid = benchmark_grid(0.1)?;
    let scene = make_scene(
        &SceneConfig::ring_benchmark(12, 1.0, 4),
        grid.ground_extent(),
        42,
    )?;
    for (i, p) in scene.pedestrians.iter().enumerate() {
        println!(
            "pedestrian {i:>2}: foot ({:.2}, {:.2}), radius {}, height {}",
            p.foot[0], p.foot[1], p.radius, p.height
        );
    }

    let out = Path::new("synthetic_scene_out");
    for (i, cam) in scene.cameras.iter().enumerate() {
        let sil = scene.render_view(i, 4)?;
        let lit = sil.map().data().iter().filter(|&&v| v > 0.0).count();
        write_pgm8(&out.join(format!("{}.pgm", cam.name())), sil.map())?;
        println!("{}: {lit} lit pixels", cam.name());
    }
    write_calibration(&out.join("calibration.json"), &scene.cameras)?;
    println!("wrote {}", out.display());
    Ok(())
}
