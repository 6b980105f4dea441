use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::mesh::TriMesh;
use crate::meshing::{marching_cubes_closed, SmoothParams};
use crate::voxel::{voxelize_points, GridFrame};

/// Meshes the occupancy of the combined clouds in `frame` directly.
pub fn partial_completion(depth: &PointCloud, tactile: &PointCloud, frame: &GridFrame, smooth: SmoothParams) -> Result<TriMesh> {
    let cloud = depth.concat(tactile);
    if cloud.is_empty() {
        return Err(Error::invalid("partial completion needs at least one point"));
    }
    let vox = voxelize_points(&cloud, frame)?;
    let mesh = marching_cubes_closed(&vox.grid.to_scalar(), 0.5);
    Ok(smooth.apply(&mesh))
}
