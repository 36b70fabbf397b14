//! Benchmark ground grids and voxel indexing.

use nalgebra::Point3;
use pvh_detect::grid::{GridSpec, VoxelIndex};

fn main() -> pvh_detect::Result<()> {
    for preset in ["wildtrack:1", "wildtrack:4", "multiviewx:1", "multiviewx:4"] {
        let g = GridSpec::from_preset(preset)?;
        println!(
            "{preset:>14}: {} x {} ground cells of {} m, {} height cells, extent {:?}",
            g.ny,
            g.nx,
            g.cell_xy,
            g.nz,
            g.ground_extent()
        );
    }

    let g = GridSpec::wildtrack(4)?;
    let idx = VoxelIndex::new(10, 3, 200);
    let c = g.voxel_center(idx)?;
    println!(
        "voxel {idx:?} has center {c:?} and linear index {}",
        g.linear(idx)
    );
    println!("world_to_cell(center) = {:?}", g.world_to_cell(&c));
    println!(
        "outside point maps to {:?}",
        g.world_to_cell(&Point3::new(-1.0, 0.0, 0.0))
    );

    match GridSpec::wildtrack(7) {
        Err(e) => println!("wildtrack:7 rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
