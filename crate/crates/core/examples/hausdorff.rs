//! Symmetric mean surface distance between two meshes, reported in mm.

use nalgebra::{Point3, Vector3};
use visuotactile::meshing::hausdorff;
use visuotactile::TriMesh;

fn main() -> visuotactile::Result<()> {
    let cube = TriMesh::cuboid(Point3::new(0.0, 0.0, 0.0), Point3::new(0.1, 0.1, 0.1));
    for shift_mm in [0.0, 1.0, 5.0, 20.0] {
        let moved = cube.translated(Vector3::new(shift_mm * 1e-3, 0.0, 0.0));
        let h = hausdorff(&cube, &moved, 20_000, 0)?;
        println!(
            "shift {shift_mm:>4} mm: symmetric mean {:.3} mm, max {:.3} mm",
            h.symmetric_mean,
            h.max_a_to_b.max(h.max_b_to_a)
        );
    }
    Ok(())
}
