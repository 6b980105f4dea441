//! Alternative completion methods: partial surface, convex hull, GPIS and
//! the CNN wrapper that turns network output into a mesh.

mod cnn;
mod gpis;
mod hull;
mod normals;
mod partial;

pub use cnn::{cnn_completion, cnn_completion_at};
pub use gpis::{downsample, fit_gpis, fit_surface, gpis_completion, gpis_field, observations, GpisConfig, GpisModel};
pub use hull::{convex_hull, convex_hull_completion};
pub use normals::{estimate_normals, tactile_normals, EstimatedNormals};
pub use partial::partial_completion;
