//! Lift a 2-D feature map into the voxel grid of one camera and average
//! several views over the voxels each one sees.

use nalgebra::Point3;
use pvh_detect::grid::GridSpec;
use pvh_detect::pull::{aggregate_valid_mean, bilinear_sample, pull_view};
use pvh_detect::scene::{look_at, Intrinsics};
use pvh_detect::volume::PlanarMap;

fn main() -> pvh_detect::Result<()> {
    let two = PlanarMap::new(1, 2, 2, vec![0.0, 1.0, 2.0, 3.0])?;
    println!(
        "bilinear at (0.5, 0.5) = {}",
        bilinear_sample(&two, 0.5, 0.5, 0)
    );

    let grid = GridSpec::new([-2.0, -2.0, 0.0], 0.1, 0.25, 40, 40, 8)?;
    let k = Intrinsics::centered(200.0, 200.0, 160, 120);
    // horizontal ramp feature: value = column / width
    let ramp = PlanarMap::from_fn(120, 160, |x, _| x as f32 / 160.0)?;

    let mut volumes = Vec::new();
    let mut validity = Vec::new();
    for (i, eye) in [Point3::new(0.0, -8.0, 4.0), Point3::new(8.0, 0.0, 4.0)]
        .into_iter()
        .enumerate()
    {
        let cam = look_at(format!("cam{i}"), eye, Point3::new(0.0, 0.0, 1.0), &k)?;
        let (vol, val) = pull_view(&ramp, &cam, &grid);
        println!(
            "{}: {} of {} voxels valid",
            cam.name(),
            val.count(),
            grid.voxel_count()
        );
        volumes.push(vol);
        validity.push(val);
    }
    let mean = aggregate_valid_mean(&volumes, &validity)?;
    let covered = mean.data().iter().filter(|&&v| v > 0.0).count();
    println!("aggregated volume has {covered} non-zero voxels");
    Ok(())
}
