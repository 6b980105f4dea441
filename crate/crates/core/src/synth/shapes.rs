//! Two-primitive objects: the camera-facing half of one primitive glued to
//! the occluded half of another across a shared mid-plane.
//!
//! Both halves are height fields over the same rectangular cross-section
//! `[-a, a] × [-b, b]` in the mid-plane (normal to the viewing axis z). The
//! front surface sits at `z = -depth_front · f_front(x, y)` and the back at
//! `z = +depth_back · f_back(x, y)`, where each profile `f` is 1 in the
//! middle of the cross-section and is 0 or 1 on its boundary.

use nalgebra::{Point3, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::TriMesh;
use crate::rng::seeded;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrimitiveKind {
    Box,
    /// Half-cylinder with its axis along x.
    Cylinder,
    /// Dome with circular sections along both cross-section axes.
    Sphere,
    /// Triangular prism with its ridge along x.
    Wedge,
}

impl PrimitiveKind {
    pub const ALL: [PrimitiveKind; 4] = [Self::Box, Self::Cylinder, Self::Sphere, Self::Wedge];

    /// Height profile over normalized cross-section coordinates `u, v ∈ [-1, 1]`.
    pub fn profile(self, u: f64, v: f64) -> f64 {
        let clamp = |t: f64| (1.0 - t * t).max(0.0);
        match self {
            PrimitiveKind::Box => 1.0,
            PrimitiveKind::Cylinder => clamp(v).sqrt(),
            PrimitiveKind::Sphere => (clamp(u) * clamp(v)).sqrt(),
            PrimitiveKind::Wedge => (1.0 - v.abs()).max(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveSpec {
    pub kind: PrimitiveKind,
    /// Cross-section half widths (x, y) in meters.
    pub half_extents: [f64; 2],
    /// Extent normal to the mid-plane, in meters.
    pub depth: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapePairSpec {
    pub front: PrimitiveSpec,
    pub back: PrimitiveSpec,
    /// World position of the cross-section center on the mid-plane.
    pub center: [f64; 3],
    /// Cells per cross-section axis in the tessellation (rounded up to even).
    pub resolution: usize,
    pub seed: u64,
}

/// Sampling ranges for random shape pairs, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeRanges {
    pub half_extent: [f64; 2],
    pub depth: [f64; 2],
}

impl Default for ShapeRanges {
    fn default() -> Self {
        Self {
            half_extent: [0.05, 0.10],
            depth: [0.03, 0.10],
        }
    }
}

impl ShapePairSpec {
    /// Random kinds and scales; the shared cross-section is drawn once so
    /// the halves always stitch.
    pub fn sample(seed: u64, ranges: &ShapeRanges, center: Point3<f64>) -> Self {
        let mut rng = seeded(seed);
        let mut pick = |r: [f64; 2]| rng.random_range(r[0]..=r[1]);
        let half = [pick(ranges.half_extent), pick(ranges.half_extent)];
        let df = pick(ranges.depth);
        let db = pick(ranges.depth);
        let kf = PrimitiveKind::ALL[rng.random_range(0..4)];
        let kb = PrimitiveKind::ALL[rng.random_range(0..4)];
        Self {
            front: PrimitiveSpec {
                kind: kf,
                half_extents: half,
                depth: df,
            },
            back: PrimitiveSpec {
                kind: kb,
                half_extents: half,
                depth: db,
            },
            center: center.into(),
            resolution: 32,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("front", &self.front), ("back", &self.back)] {
            if !(p.half_extents.iter().all(|&h| h > 0.0 && h.is_finite()) && p.depth > 0.0 && p.depth.is_finite()) {
                return Err(Error::Generation(format!("{name} primitive needs positive finite scales")));
            }
        }
        let (a, b) = (self.front.half_extents, self.back.half_extents);
        let tol = 1e-9 * a[0].max(a[1]);
        if (a[0] - b[0]).abs() > tol || (a[1] - b[1]).abs() > tol {
            return Err(Error::Generation(format!(
                "cross-sections differ ({a:?} vs {b:?}); halves cannot be stitched watertight"
            )));
        }
        if self.resolution < 2 {
            return Err(Error::Generation("tessellation resolution must be at least 2".into()));
        }
        if !self.center.iter().all(|c| c.is_finite()) {
            return Err(Error::Generation("center must be finite".into()));
        }
        Ok(())
    }

    /// Largest distance from the center along any axis.
    pub fn max_half_extent(&self) -> f64 {
        let h = self.front.half_extents;
        h[0].max(h[1]).max(self.front.depth).max(self.back.depth)
    }
}

/// Builds the watertight two-primitive mesh. Boundary points where both
/// halves have zero height are welded into a single vertex.
pub fn gen_shape_pair(spec: &ShapePairSpec) -> Result<TriMesh> {
    spec.validate()?;
    let n = spec.resolution + spec.resolution % 2;
    let [a, b] = spec.front.half_extents;
    let c = Vector3::from(spec.center);
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let on_boundary = |i: usize, j: usize| i == 0 || j == 0 || i == n || j == n;

    let mut vertices = Vec::new();
    let mut front = vec![0usize; (n + 1) * (n + 1)];
    let mut back = vec![0usize; (n + 1) * (n + 1)];
    for j in 0..=n {
        for i in 0..=n {
            let u = -1.0 + 2.0 * i as f64 / n as f64;
            let v = -1.0 + 2.0 * j as f64 / n as f64;
            let (x, y) = (a * u, b * v);
            let zf = -spec.front.depth * spec.front.kind.profile(u, v);
            let zb = spec.back.depth * spec.back.kind.profile(u, v);
            let weld = on_boundary(i, j) && zf == 0.0 && zb == 0.0;
            front[idx(i, j)] = vertices.len();
            vertices.push(Point3::new(x, y, zf) + c);
            if weld {
                back[idx(i, j)] = front[idx(i, j)];
            } else {
                back[idx(i, j)] = vertices.len();
                vertices.push(Point3::new(x, y, zb) + c);
            }
        }
    }

    let mut faces = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let (p00, p10, p11, p01) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            // Back surface faces +z, front surface faces -z. A diagonal
            // between two boundary points could be shared by all four faces
            // when both are welded, so such cells split the other way.
            if on_boundary(i, j) && on_boundary(i + 1, j + 1) {
                faces.push([back[p00], back[p10], back[p01]]);
                faces.push([back[p10], back[p11], back[p01]]);
                faces.push([front[p00], front[p01], front[p10]]);
                faces.push([front[p10], front[p01], front[p11]]);
            } else {
                faces.push([back[p00], back[p10], back[p11]]);
                faces.push([back[p00], back[p11], back[p01]]);
                faces.push([front[p00], front[p11], front[p10]]);
                faces.push([front[p00], front[p01], front[p11]]);
            }
        }
    }

    // Side walls along the boundary loop, counterclockwise seen from +z.
    let mut ring = Vec::with_capacity(4 * n);
    ring.extend((0..n).map(|i| (i, 0)));
    ring.extend((0..n).map(|j| (n, j)));
    ring.extend((1..=n).rev().map(|i| (i, n)));
    ring.extend((1..=n).rev().map(|j| (0, j)));
    for k in 0..ring.len() {
        let p = idx(ring[k].0, ring[k].1);
        let q = idx(ring[(k + 1) % ring.len()].0, ring[(k + 1) % ring.len()].1);
        let (fp, fq, bp, bq) = (front[p], front[q], back[p], back[q]);
        if fq != bq {
            faces.push([fp, fq, bq]);
        }
        if fp != bp {
            faces.push([fp, bq, bp]);
        }
    }
    let mesh = TriMesh::new(vertices, faces)?;
    debug_assert!(mesh.is_watertight(), "{:?}", mesh.edge_report());
    Ok(mesh)
}
