//! The procedural object corpus used by the desk benchmark.

use visuotactile::mesh::io::write_obj;
use visuotactile::synth::corpus::{gen_object, ObjectFamily};

fn main() -> visuotactile::Result<()> {
    let dir = std::env::temp_dir().join("vtg_corpus");
    std::fs::create_dir_all(&dir)?;
    for family in ObjectFamily::ALL {
        let mesh = gen_object(family, 0, 48)?;
        let (lo, hi) = mesh.bounds().expect("non-empty mesh");
        let ext = hi - lo;
        println!(
            "{:<9} {:>6} faces  {:.0}x{:.0}x{:.0} mm  watertight {}",
            family.as_str(),
            mesh.faces.len(),
            ext.x * 1e3,
            ext.y * 1e3,
            ext.z * 1e3,
            mesh.is_watertight()
        );
        write_obj(&dir.join(format!("{}.obj", family.as_str())), &mesh)?;
    }
    println!("meshes in {}", dir.display());
    Ok(())
}
