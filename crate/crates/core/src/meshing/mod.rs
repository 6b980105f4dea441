//! Isosurface extraction, smoothing, mesh-to-grid evaluation and the
//! symmetric mean Hausdorff metric.

mod hausdorff;
mod marching_cubes;
mod smooth;

pub use hausdorff::{hausdorff, sample_surface, HausdorffReport, DEFAULT_HAUSDORFF_SAMPLES};
pub use marching_cubes::{marching_cubes, marching_cubes_closed};
pub use smooth::{laplacian_smooth, SmoothParams};

use crate::error::Result;
use crate::mesh::TriMesh;
use crate::voxel::{voxelize_mesh, GridFrame, MeshVoxelization};

/// Default evaluation resolution for completed meshes.
pub const EVAL_DIM: usize = 80;

/// Voxelizes a completion (or ground-truth) mesh on the evaluation frame.
pub fn mesh_to_eval_grid(mesh: &TriMesh, frame: &GridFrame) -> Result<MeshVoxelization> {
    voxelize_mesh(mesh, frame)
}
