//! Voxelize a closed mesh and a point cloud, then write both grids.
//!
//! ```text
//! cargo run --example voxelize -- /tmp/vox
//! ```

use nalgebra::Point3;
use visuotactile::voxel::io::{read_vtg, write_vtg};
use visuotactile::voxel::{jaccard, voxelize_mesh, voxelize_points};
use visuotactile::{GridFrame, PointCloud, TriMesh};

fn main() -> visuotactile::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| std::env::temp_dir().display().to_string());
    let out = std::path::Path::new(&out);
    std::fs::create_dir_all(out)?;

    let sphere = TriMesh::icosphere(Point3::new(0.0, 0.0, 0.8), 0.08, 3);
    // Files store the frame in single precision; quantize up front so the
    // round trip is exact.
    let frame = GridFrame::cube(Point3::new(0.0, 0.0, 0.8), 0.2, 32)?.quantized();
    let solid = voxelize_mesh(&sphere, &frame)?;
    println!("sphere: {} of {} voxels occupied, watertight = {}", solid.grid.count(), frame.len(), solid.watertight);

    let cloud = PointCloud::new(sphere.vertices.clone());
    let shell = voxelize_points(&cloud, &frame)?;
    println!("vertex cloud: {} voxels, {} points outside the frame", shell.grid.count(), shell.dropped);
    println!("jaccard(shell, solid) = {:.3}", jaccard(&shell.grid, &solid.grid)?);

    let path = out.join("sphere.vtg");
    write_vtg(&path, &solid.grid)?;
    assert_eq!(read_vtg(&path)?, solid.grid);
    println!("wrote {}", path.display());
    Ok(())
}
