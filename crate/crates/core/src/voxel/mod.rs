//! Voxel grids on a metric lattice: occupancy, scalar fields, voxelization,
//! fusion and the Jaccard metric.

mod frame;
mod grid;
pub mod io;
mod ops;
mod voxelize;

pub use frame::GridFrame;
pub use grid::{ScalarGrid, VoxelGrid};
pub use ops::{jaccard, merge_grids};
pub use voxelize::{voxelize_mesh, voxelize_points, MeshVoxelization, PointVoxelization};
