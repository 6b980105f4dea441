use serde::{Deserialize, Serialize};

use super::render::render_camera_frame;
use super::{sample_tactile, CameraModel, TactileSampleConfig};
use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::mesh::TriMesh;
use crate::voxel::{voxelize_mesh, voxelize_points, GridFrame, VoxelGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitTag {
    TrainView,
    HoldoutView,
    HoldoutMesh,
}

impl SplitTag {
    pub const ALL: [SplitTag; 3] = [SplitTag::TrainView, SplitTag::HoldoutView, SplitTag::HoldoutMesh];

    pub fn as_str(self) -> &'static str {
        match self {
            SplitTag::TrainView => "train_view",
            SplitTag::HoldoutView => "holdout_view",
            SplitTag::HoldoutMesh => "holdout_mesh",
        }
    }
}

impl std::fmt::Display for SplitTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripletMeta {
    pub mesh_id: String,
    pub view_id: u32,
    pub seed: u64,
    pub split: SplitTag,
}

/// One training/evaluation sample: depth, tactile and ground-truth
/// occupancy on a shared camera-aligned frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationTriplet {
    pub depth: VoxelGrid,
    pub tactile: VoxelGrid,
    pub ground_truth: VoxelGrid,
    pub meta: TripletMeta,
}

impl ObservationTriplet {
    pub fn frame(&self) -> &GridFrame {
        self.ground_truth.frame()
    }
}

/// Cubic frame centered on the mesh centroid with edge 1.1× the largest
/// bounding-box extent.
pub fn frame_for_mesh(mesh: &TriMesh, dim: usize) -> Result<GridFrame> {
    let (lo, hi) = mesh
        .bounds()
        .ok_or_else(|| Error::invalid("cannot frame an empty mesh"))?;
    let ext = hi - lo;
    let edge = 1.1 * ext.x.max(ext.y).max(ext.z);
    let center = mesh.centroid().unwrap_or_else(|| nalgebra::center(&lo, &hi));
    GridFrame::cube(center, edge, dim)
}

/// Everything `make_triplet` produces, including the intermediate clouds
/// in camera coordinates.
#[derive(Debug, Clone)]
pub struct TripletParts {
    pub triplet: ObservationTriplet,
    pub depth_cloud: PointCloud,
    pub tactile_cloud: PointCloud,
    pub mesh_cam: TriMesh,
    pub dropped_depth_points: usize,
}

/// Builds a triplet. `frame` is expressed in the camera frame of `cam`
/// (z = viewing axis); the mesh is given in world coordinates.
pub fn make_triplet(
    mesh: &TriMesh,
    cam: &CameraModel,
    cfg: &TactileSampleConfig,
    frame: &GridFrame,
    meta: TripletMeta,
) -> Result<TripletParts> {
    frame.validate()?;
    let mesh_cam = mesh.transformed(&cam.pose);
    let depth_cloud = PointCloud::new(render_camera_frame(&mesh_cam, cam)?);
    let depth = voxelize_points(&depth_cloud, frame)?;
    let gt = voxelize_mesh(&mesh_cam, frame)?;
    let tactile_cloud = sample_tactile(&gt.grid, cfg)?;
    let tactile = voxelize_points(&tactile_cloud, frame)?;
    debug_assert!(tactile.grid.is_subset_of(&gt.grid).unwrap_or(false));
    Ok(TripletParts {
        triplet: ObservationTriplet {
            depth: depth.grid,
            tactile: tactile.grid,
            ground_truth: gt.grid,
            meta,
        },
        depth_cloud,
        tactile_cloud,
        mesh_cam,
        dropped_depth_points: depth.dropped,
    })
}
