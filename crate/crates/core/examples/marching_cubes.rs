//! Extract a closed isosurface from a scalar field and check its topology.

use nalgebra::Point3;
use visuotactile::meshing::{marching_cubes_closed, SmoothParams};
use visuotactile::{GridFrame, ScalarGrid};

fn main() -> visuotactile::Result<()> {
    let frame = GridFrame::cube(Point3::origin(), 2.0, 40)?;
    // A torus: genus 1, so the Euler characteristic is 0.
    let torus = ScalarGrid::from_fn(frame, |p| {
        let q = ((p.x * p.x + p.y * p.y).sqrt() - 0.6, p.z);
        0.25 - (q.0 * q.0 + q.1 * q.1).sqrt()
    });
    let sphere = ScalarGrid::from_fn(frame, |p| 0.7 - p.coords.norm());
    for (name, field) in [("sphere", &sphere), ("torus", &torus)] {
        let mesh = marching_cubes_closed(field, 0.0);
        let smooth = SmoothParams::default().apply(&mesh);
        println!(
            "{name:<6} {:>5} faces  watertight {}  manifold {}  euler {}  volume {:.3} (smoothed {:.3})",
            mesh.faces.len(),
            mesh.is_watertight(),
            mesh.vertices_manifold(),
            mesh.euler_characteristic(),
            mesh.volume(),
            smooth.volume()
        );
    }
    Ok(())
}
