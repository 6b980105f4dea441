use crate::error::Result;
use crate::mesh::TriMesh;
use crate::meshing::{marching_cubes_closed, SmoothParams};
use crate::net::{forward, InputMode, NetParams};
use crate::voxel::{merge_grids, VoxelGrid};

/// Runs the network on the mode-selected input and meshes the probability
/// field at 0.5.
pub fn cnn_completion(params: &NetParams, depth: &VoxelGrid, tactile: &VoxelGrid, mode: InputMode, smooth: SmoothParams) -> Result<TriMesh> {
    cnn_completion_at(params, depth, tactile, mode, 0.5, smooth)
}

/// As [`cnn_completion`] with the isosurface at `iso`.
pub fn cnn_completion_at(params: &NetParams, depth: &VoxelGrid, tactile: &VoxelGrid, mode: InputMode, iso: f64, smooth: SmoothParams) -> Result<TriMesh> {
    let input = match mode {
        InputMode::DepthOnly => depth.clone(),
        InputMode::TactileAndDepth => merge_grids(depth, tactile)?,
        InputMode::TactileOnly => tactile.clone(),
    };
    let prob = forward(params, &input)?;
    Ok(smooth.apply(&marching_cubes_closed(&prob, iso)))
}
