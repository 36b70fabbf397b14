//! Project world points through a pinhole camera, check validity, and
//! rescale the intrinsics for a downsampled image.

use nalgebra::Point3;
use pvh_detect::scene::{look_at, Intrinsics};

fn main() -> pvh_detect::Result<()> {
    let k = Intrinsics::centered(800.0, 800.0, 1920, 1080);
    let cam = look_at(
        "front",
        Point3::new(0.0, -10.0, 3.0),
        Point3::new(0.0, 0.0, 1.0),
        &k,
    )?;
    println!("P =\n{:.3}", cam.projection_matrix());
    println!("center = {:?}", cam.center());

    for p in [
        Point3::new(0.0, 0.0, 1.0),
        Point3::new(2.0, 1.0, 0.0),
        Point3::new(0.0, -20.0, 1.0),
    ] {
        let valid = cam.is_valid(&p, 1920.0, 1080.0);
        match cam.project_point(&p) {
            Ok(q) => println!(
                "{p:?} -> u {:.2}, v {:.2}, depth {:.2}, valid {valid}",
                q.u, q.v, q.depth
            ),
            Err(e) => println!("{p:?} -> {e}"),
        }
    }

    // a quarter-resolution image: same geometry, scaled pixels
    let small = cam.adjust_intrinsics(0.25, 0.0, 0.0)?;
    let q = small.project_point(&Point3::new(0.0, 0.0, 1.0))?;
    println!(
        "quarter-res projection of the target: ({:.2}, {:.2})",
        q.u, q.v
    );
    Ok(())
}
