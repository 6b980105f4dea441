use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::rng::{rand_ints, seeded};
use crate::voxel::VoxelGrid;

/// Number of probed columns per object.
pub const DEFAULT_NPTS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TactileSampleConfig {
    pub npts: usize,
    pub seed: u64,
}

impl TactileSampleConfig {
    pub fn new(npts: usize, seed: u64) -> Self {
        Self { npts, seed }
    }

    pub fn validate(&self, grid: &VoxelGrid) -> Result<()> {
        let [dx, dy, _] = grid.dims();
        if self.npts == 0 || self.npts > dx * dy {
            return Err(Error::invalid(format!(
                "npts = {} must be in 1..={}",
                self.npts,
                dx * dy
            )));
        }
        Ok(())
    }
}

/// Simulated guarded moves: draws `npts` random (x, y) columns and, for
/// each, scans z downward from the top layer, keeping only the first
/// occupied voxel. Contacts are returned as voxel-center points.
///
/// `vox_gt` must already be expressed in the depth camera's frame so that
/// the scan runs from the far side of the object toward the camera.
pub fn sample_tactile(vox_gt: &VoxelGrid, cfg: &TactileSampleConfig) -> Result<PointCloud> {
    cfg.validate(vox_gt)?;
    let [dx, dy, _] = vox_gt.dims();
    let mut rng = seeded(cfg.seed);
    let xs = rand_ints(&mut rng, 0, dx - 1, cfg.npts);
    let ys = rand_ints(&mut rng, 0, dy - 1, cfg.npts);
    let columns: Vec<(usize, usize)> = xs.into_iter().zip(ys).collect();
    Ok(sample_tactile_columns(vox_gt, &columns))
}

/// First-hit scan along −z for an explicit list of columns. Repeated
/// columns yield one contact.
pub fn sample_tactile_columns(vox_gt: &VoxelGrid, columns: &[(usize, usize)]) -> PointCloud {
    let [dx, dy, dz] = vox_gt.dims();
    let mut contacts: Vec<[usize; 3]> = Vec::new();
    for &(x, y) in columns {
        if x >= dx || y >= dy {
            continue;
        }
        if let Some(z) = (0..dz).rev().find(|&z| vox_gt.get([x, y, z])) {
            let v = [x, y, z];
            if !contacts.contains(&v) {
                contacts.push(v);
            }
        }
    }
    let frame = vox_gt.frame();
    PointCloud::new(contacts.into_iter().map(|c| frame.voxel_center(c)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::voxel::{voxelize_points, GridFrame};
    use nalgebra::Point3;

    fn frame3() -> GridFrame {
        GridFrame::new([3; 3], 1.0, Point3::origin()).unwrap()
    }

    #[test]
    fn empty_grid_no_contacts() {
        let g = VoxelGrid::empty(frame3());
        assert!(sample_tactile(&g, &TactileSampleConfig::new(9, 1)).unwrap().is_empty());
    }

    #[test]
    fn first_hit_only() {
        // Column (1,1) occupied at z = 0 and z = 2: only (1,1,2) is touched.
        let mut g = VoxelGrid::empty(frame3());
        g.set([1, 1, 0], true);
        g.set([1, 1, 2], true);
        let c = sample_tactile_columns(&g, &[(1, 1)]);
        assert_eq!(c.points, vec![Point3::new(1.5, 1.5, 2.5)]);
    }

    #[test]
    fn full_grid_touches_top_layer() {
        let g = VoxelGrid::full(frame3());
        let cols: Vec<_> = (0..3).flat_map(|x| (0..3).map(move |y| (x, y))).collect();
        let c = sample_tactile_columns(&g, &cols);
        assert_eq!(c.len(), 9);
        let v = voxelize_points(&c, g.frame()).unwrap().grid;
        assert!(v.iter_occupied().all(|[_, _, z]| z == 2));
    }

    #[test]
    fn duplicates_are_merged_and_npts_checked() {
        let g = VoxelGrid::full(frame3());
        let c = sample_tactile_columns(&g, &[(0, 0), (0, 0), (2, 1)]);
        assert_eq!(c.len(), 2);
        assert!(sample_tactile(&g, &TactileSampleConfig::new(10, 0)).is_err());
        assert!(sample_tactile(&g, &TactileSampleConfig::new(0, 0)).is_err());
    }
}
