//! Synthetic observations: depth rendering, simulated tactile contacts,
//! procedural shapes, and (depth, tactile, ground truth) triplets.

mod camera;
pub mod corpus;
mod render;
mod shapes;
mod tactile;
mod triplet;

pub use camera::{CameraModel, DEFAULT_OBJECT_DISTANCE};
pub use render::render_depth;
pub use shapes::{gen_shape_pair, PrimitiveKind, PrimitiveSpec, ShapePairSpec, ShapeRanges};
pub use tactile::{sample_tactile, sample_tactile_columns, TactileSampleConfig, DEFAULT_NPTS};
pub use triplet::{frame_for_mesh, make_triplet, ObservationTriplet, SplitTag, TripletMeta, TripletParts};
