//! Visual-tactile shape completion on voxel occupancy grids.
//!
//! Depth renders and simulated tactile contacts of an object are voxelized
//! into a shared occupancy grid, completed by a small 3D convolutional
//! network, and compared against partial, convex-hull and Gaussian-process
//! implicit-surface completions with Jaccard and Hausdorff metrics.

pub mod baselines;
pub mod bench;
pub mod cloud;
pub mod error;
pub mod mesh;
pub mod net;
pub mod meshing;
pub mod rng;
pub mod synth;
pub mod voxel;

pub use cloud::PointCloud;
pub use error::{Error, Result};
pub use mesh::TriMesh;
pub use voxel::{GridFrame, ScalarGrid, VoxelGrid};
