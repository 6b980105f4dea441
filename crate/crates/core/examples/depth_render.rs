//! Render a 2.5D depth cloud of a procedural mug from an orbiting camera.

use nalgebra::Point3;
use visuotactile::cloud::xyz;
use visuotactile::synth::corpus::{gen_object, ObjectFamily};
use visuotactile::synth::{render_depth, CameraModel};

fn main() -> visuotactile::Result<()> {
    let mug = gen_object(ObjectFamily::Mug, 7, 48)?;
    let (lo, hi) = mug.bounds().expect("non-empty mesh");
    let target = nalgebra::center(&lo, &hi);
    for (i, az) in [0.0f64, 90.0, 180.0, 270.0].into_iter().enumerate() {
        let cam = CameraModel::orbit(target, 0.8, az.to_radians(), 30f64.to_radians())?;
        let cloud = render_depth(&mug, &cam)?;
        let (clo, chi) = cloud.bounds().unwrap_or((Point3::origin(), Point3::origin()));
        println!("view {i}: {:>5} points, world z span [{:.3}, {:.3}]", cloud.len(), clo.z, chi.z);
        if i == 0 {
            let path = std::env::temp_dir().join("mug_view0.xyz");
            xyz::write(&path, &cloud)?;
            println!("        wrote {}", path.display());
        }
    }
    Ok(())
}
