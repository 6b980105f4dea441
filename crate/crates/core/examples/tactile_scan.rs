//! Simulated guarded moves: first-hit scans along -z over a ground-truth grid.

use nalgebra::Point3;
use visuotactile::synth::{sample_tactile, TactileSampleConfig};
use visuotactile::voxel::voxelize_mesh;
use visuotactile::{GridFrame, TriMesh};

fn main() -> visuotactile::Result<()> {
    let body = TriMesh::cuboid(Point3::new(-0.06, -0.04, 0.74), Point3::new(0.06, 0.04, 0.86));
    let frame = GridFrame::cube(Point3::new(0.0, 0.0, 0.8), 0.2, 20)?;
    let gt = voxelize_mesh(&body, &frame)?.grid;
    for npts in [10, 40, 160] {
        let contacts = sample_tactile(&gt, &TactileSampleConfig::new(npts, 1))?;
        println!("npts {npts:>3}: {:>3} contacts", contacts.len());
    }
    let contacts = sample_tactile(&gt, &TactileSampleConfig::new(40, 1))?;
    let zmax = contacts.points.iter().map(|p| p.z).fold(f64::MIN, f64::max);
    println!("deepest contact z = {zmax:.4} (far face at 0.86)");
    Ok(())
}
