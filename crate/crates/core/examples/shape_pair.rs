//! Two-primitive fusion shapes: a front and a back half sharing one
//! cross-section, stitched into a single watertight mesh.

use nalgebra::Point3;
use visuotactile::mesh::io::write_obj;
use visuotactile::synth::{gen_shape_pair, ShapePairSpec, ShapeRanges};

fn main() -> visuotactile::Result<()> {
    for seed in 0..6 {
        let spec = ShapePairSpec::sample(seed, &ShapeRanges::default(), Point3::new(0.0, 0.0, 0.8));
        let mesh = gen_shape_pair(&spec)?;
        println!(
            "seed {seed}: {:?}/{:?}  {} faces  watertight {}  volume {:.2e} m^3",
            spec.front.kind,
            spec.back.kind,
            mesh.faces.len(),
            mesh.is_watertight(),
            mesh.volume()
        );
        if seed == 0 {
            let path = std::env::temp_dir().join("shape_pair_0.obj");
            write_obj(&path, &mesh)?;
            println!("        wrote {}", path.display());
        }
    }
    Ok(())
}
