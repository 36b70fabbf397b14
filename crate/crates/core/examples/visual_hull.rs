//! Silhouettes to visual hull, probabilistic hull, feature fusion and
//! bird's-eye compression.

use pvh_detect::hull::{compress_bev, fuse, BevMode, FusionMode};
use pvh_detect::pipeline::{reconstruct, HullParams};
use pvh_detect::scene::{benchmark_grid, make_scene, SceneConfig};
use pvh_detect::volume::FeatureVolume;

fn main() -> pvh_detect::Result<()> {
    let grid = benchmark_grid(0.1)?;
    let scene = make_scene(
        &SceneConfig::ring_benchmark(6, 1.0, 6),
        grid.ground_extent(),
        1,
    )?;
    let silhouettes = (0..scene.cameras.len())
        .map(|i| scene.render_view(i, 4))
        .collect::<pvh_detect::Result<Vec<_>>>()?;

    for params in [HullParams::exact(), HullParams::default()] {
        let rec = reconstruct(&silhouettes, &scene.cameras, &grid, &params, None)?;
        println!(
            "blur factor {}, sigma {}: VH {} voxels, PVH max {:.3}, BEV max {:.3}",
            params.blur_factor,
            params.sigma(),
            rec.vh.occupied(),
            rec.pvh.data().iter().cloned().fold(0.0, f32::max),
            rec.bev.max_value()
        );
    }

    let rec = reconstruct(
        &silhouettes,
        &scene.cameras,
        &grid,
        &HullParams::default(),
        None,
    )?;
    let features = FeatureVolume::from_data(
        2,
        grid.ny,
        grid.nz,
        grid.nx,
        vec![1.0; 2 * grid.voxel_count()],
    )?;
    for mode in [
        FusionMode::Concat,
        FusionMode::Mult,
        FusionMode::MultAdd,
        FusionMode::MultConcat,
    ] {
        let fused = fuse(&features, &rec.pvh, mode)?;
        for bev in [BevMode::MaxZ, BevMode::MeanZ, BevMode::SumZ] {
            let map = compress_bev(&fused, bev);
            println!(
                "{mode:>11} + {bev:<6}: {} channels, max {:.3}",
                map.channels(),
                map.max_value()
            );
        }
    }
    Ok(())
}
