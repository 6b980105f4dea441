use nalgebra::{Point3, Vector3};

use super::{GridFrame, VoxelGrid};
use crate::cloud::PointCloud;
use crate::error::Result;
use crate::mesh::geometry::{ray_triangle, triangle_box_overlap, Aabb};
use crate::mesh::TriMesh;

/// Occupancy from a point cloud plus the number of out-of-frame points.
#[derive(Debug, Clone, PartialEq)]
pub struct PointVoxelization {
    pub grid: VoxelGrid,
    pub dropped: usize,
}

/// Occupancy from a mesh. `watertight == false` means only surface voxels
/// were marked because parity filling is meaningless on an open mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshVoxelization {
    pub grid: VoxelGrid,
    pub watertight: bool,
}

pub fn voxelize_points(cloud: &PointCloud, frame: &GridFrame) -> Result<PointVoxelization> {
    frame.validate()?;
    cloud.check_finite()?;
    let mut grid = VoxelGrid::empty(*frame);
    let mut dropped = 0;
    for p in &cloud.points {
        match frame.voxel_of(p) {
            Some(c) => grid.set(c, true),
            None => dropped += 1,
        }
    }
    Ok(PointVoxelization { grid, dropped })
}

// Cells are shrunk by this fraction so that faces lying exactly on a cell
// boundary do not mark the neighbouring cell (overlap must have volume).
const CELL_SHRINK: f64 = 1e-6;
// Parity rays are offset off the voxel-center lattice to avoid grazing
// mesh edges and vertices that sit on lattice lines.
const RAY_JITTER: [f64; 2] = [1.234_567e-6, 2.718_281e-6];

/// Marks every voxel whose cell meets the solid bounded by `mesh`:
/// triangle/box overlap for the surface layer plus parity ray casting along
/// +z for the interior.
pub fn voxelize_mesh(mesh: &TriMesh, frame: &GridFrame) -> Result<MeshVoxelization> {
    frame.validate()?;
    let mut grid = VoxelGrid::empty(*frame);
    if mesh.is_empty() {
        return Ok(MeshVoxelization {
            grid,
            watertight: true,
        });
    }
    let watertight = mesh.is_watertight();
    if !watertight {
        log::warn!("voxelize_mesh: mesh is not watertight, marking surface voxels only");
    }
    let s = frame.voxel_size;
    let half = Vector3::repeat(0.5 * s * (1.0 - CELL_SHRINK));
    let dims = frame.dims;
    let clamp_range = |lo: f64, hi: f64, axis: usize| -> Option<(usize, usize)> {
        let o = frame.origin[axis];
        let a = ((lo - o) / s).floor() as i64;
        let b = ((hi - o) / s).floor() as i64;
        let a = a.max(0);
        let b = b.min(dims[axis] as i64 - 1);
        (a <= b).then_some((a as usize, b as usize))
    };

    // Triangles bucketed by the parity-ray columns they can hit.
    let mut columns: Vec<Vec<usize>> = vec![Vec::new(); dims[0] * dims[1]];

    for (ti, tri) in mesh.triangles().enumerate() {
        let bb = Aabb::of_triangle(&tri);
        let ranges = [
            clamp_range(bb.min.x, bb.max.x, 0),
            clamp_range(bb.min.y, bb.max.y, 1),
            clamp_range(bb.min.z, bb.max.z, 2),
        ];
        if let [Some((x0, x1)), Some((y0, y1)), Some((z0, z1))] = ranges {
            for z in z0..=z1 {
                for y in y0..=y1 {
                    for x in x0..=x1 {
                        if grid.get([x, y, z]) {
                            continue;
                        }
                        let c = frame.voxel_center([x, y, z]);
                        if triangle_box_overlap(&c, &half, &tri) {
                            grid.set([x, y, z], true);
                        }
                    }
                }
            }
        }
        if watertight {
            // Columns whose (jittered) ray xy lies inside the triangle's xy bounds.
            let col = |v: f64, axis: usize| ((v - frame.origin[axis]) / s - 0.5 - RAY_JITTER[axis]).ceil() as i64;
            let cx0 = col(bb.min.x, 0).max(0);
            let cx1 = (col(bb.max.x, 0) + 1).min(dims[0] as i64);
            let cy0 = col(bb.min.y, 1).max(0);
            let cy1 = (col(bb.max.y, 1) + 1).min(dims[1] as i64);
            for y in cy0..cy1 {
                for x in cx0..cx1 {
                    columns[x as usize + dims[0] * y as usize].push(ti);
                }
            }
        }
    }

    if watertight {
        let z_start = frame.origin[2] - s;
        let dir = Vector3::z();
        let mut hits = Vec::new();
        for y in 0..dims[1] {
            for x in 0..dims[0] {
                let tris = &columns[x + dims[0] * y];
                if tris.is_empty() {
                    continue;
                }
                let c = frame.voxel_center([x, y, 0]);
                let o = Point3::new(
                    c.x + RAY_JITTER[0] * s,
                    c.y + RAY_JITTER[1] * s,
                    z_start,
                );
                hits.clear();
                hits.extend(
                    tris.iter()
                        .filter_map(|&ti| ray_triangle(&o, &dir, &mesh.triangle(ti)))
                        .map(|t| z_start + t),
                );
                if hits.len() < 2 {
                    continue;
                }
                hits.sort_by(f64::total_cmp);
                let mut k = 0;
                for z in 0..dims[2] {
                    let zc = frame.origin[2] + (z as f64 + 0.5) * s;
                    while k < hits.len() && hits[k] < zc {
                        k += 1;
                    }
                    if k % 2 == 1 {
                        grid.set([x, y, z], true);
                    }
                }
            }
        }
    }
    Ok(MeshVoxelization { grid, watertight })
}
