//! Indexed triangle meshes, their file formats, and spatial queries.

pub mod bvh;
pub mod geometry;
pub mod io;
mod trimesh;

pub use bvh::Bvh;
pub use trimesh::{EdgeReport, TriMesh};
