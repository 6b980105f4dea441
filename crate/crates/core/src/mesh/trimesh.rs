use std::collections::HashMap;

use nalgebra::{Isometry3, Point3, Vector3};

use crate::cloud::bounds_of;
use crate::error::{Error, Result};

/// Indexed triangle mesh in metric coordinates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<Point3<f64>>,
    pub faces: Vec<[usize; 3]>,
}

/// Edge incidence summary used for watertightness checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeReport {
    pub edges: usize,
    pub boundary_edges: usize,
    pub nonmanifold_edges: usize,
    pub misoriented_edges: usize,
}

impl EdgeReport {
    pub fn is_closed_oriented(&self) -> bool {
        self.boundary_edges == 0 && self.nonmanifold_edges == 0 && self.misoriented_edges == 0
    }
}

impl TriMesh {
    pub fn new(vertices: Vec<Point3<f64>>, faces: Vec<[usize; 3]>) -> Result<Self> {
        for (fi, f) in faces.iter().enumerate() {
            if f.iter().any(|&i| i >= vertices.len()) {
                return Err(Error::invalid(format!("face {fi} indexes past the vertex list")));
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::invalid(format!("face {fi} repeats a vertex")));
            }
        }
        Ok(Self { vertices, faces })
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn triangle(&self, f: usize) -> [Point3<f64>; 3] {
        let [a, b, c] = self.faces[f];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn triangles(&self) -> impl Iterator<Item = [Point3<f64>; 3]> + '_ {
        (0..self.faces.len()).map(move |f| self.triangle(f))
    }

    pub fn face_area(&self, f: usize) -> f64 {
        let [a, b, c] = self.triangle(f);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    pub fn area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    /// Signed enclosed volume (positive for outward-oriented closed meshes).
    pub fn volume(&self) -> f64 {
        self.triangles()
            .map(|[a, b, c]| a.coords.dot(&b.coords.cross(&c.coords)) / 6.0)
            .sum()
    }

    pub fn bounds(&self) -> Option<(Point3<f64>, Point3<f64>)> {
        if self.faces.is_empty() {
            return None;
        }
        bounds_of(&self.vertices)
    }

    /// Volume centroid for closed meshes, falling back to the bounding-box
    /// center when the enclosed volume vanishes.
    pub fn centroid(&self) -> Option<Point3<f64>> {
        let (lo, hi) = self.bounds()?;
        let vol = self.volume();
        let bbox_center = nalgebra::center(&lo, &hi);
        if vol.abs() < 1e-15 {
            return Some(bbox_center);
        }
        // Tetrahedra against a local reference keep the sums well conditioned.
        let r = bbox_center;
        let mut acc = Vector3::zeros();
        let mut total = 0.0;
        for [a, b, c] in self.triangles() {
            let (a, b, c) = (a - r, b - r, c - r);
            let v = a.dot(&b.cross(&c)) / 6.0;
            acc += v * (a + b + c) / 4.0;
            total += v;
        }
        Some(r + acc / total)
    }

    pub fn transformed(&self, iso: &Isometry3<f64>) -> TriMesh {
        TriMesh {
            vertices: self.vertices.iter().map(|p| iso * p).collect(),
            faces: self.faces.clone(),
        }
    }

    pub fn scaled(&self, s: f64) -> TriMesh {
        TriMesh {
            vertices: self.vertices.iter().map(|p| Point3::from(p.coords * s)).collect(),
            faces: self.faces.clone(),
        }
    }

    pub fn translated(&self, t: Vector3<f64>) -> TriMesh {
        TriMesh {
            vertices: self.vertices.iter().map(|p| p + t).collect(),
            faces: self.faces.clone(),
        }
    }

    /// Flips every face orientation.
    pub fn flipped(&self) -> TriMesh {
        TriMesh {
            vertices: self.vertices.clone(),
            faces: self.faces.iter().map(|&[a, b, c]| [a, c, b]).collect(),
        }
    }

    pub fn append(&mut self, other: &TriMesh) {
        let off = self.vertices.len();
        self.vertices.extend_from_slice(&other.vertices);
        self.faces
            .extend(other.faces.iter().map(|f| [f[0] + off, f[1] + off, f[2] + off]));
    }

    pub fn edge_report(&self) -> EdgeReport {
        // Undirected edge -> (count, sum of directions) where a->b with a<b is +1.
        let mut edges: HashMap<(usize, usize), (u32, i32)> = HashMap::new();
        for f in &self.faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                let (key, dir) = if a < b { ((a, b), 1) } else { ((b, a), -1) };
                let e = edges.entry(key).or_insert((0, 0));
                e.0 += 1;
                e.1 += dir;
            }
        }
        let mut report = EdgeReport {
            edges: edges.len(),
            boundary_edges: 0,
            nonmanifold_edges: 0,
            misoriented_edges: 0,
        };
        for &(count, dir) in edges.values() {
            match count {
                1 => report.boundary_edges += 1,
                2 if dir != 0 => report.misoriented_edges += 1,
                2 => {}
                _ => report.nonmanifold_edges += 1,
            }
        }
        report
    }

    /// Closed, edge-manifold, consistently oriented.
    pub fn is_watertight(&self) -> bool {
        !self.faces.is_empty() && self.edge_report().is_closed_oriented()
    }

    /// Every referenced vertex has a single fan of incident faces (disc link).
    pub fn vertices_manifold(&self) -> bool {
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); self.vertices.len()];
        for (fi, f) in self.faces.iter().enumerate() {
            for &v in f {
                incident[v].push(fi);
            }
        }
        for (v, faces) in incident.iter().enumerate() {
            if faces.is_empty() {
                continue;
            }
            // Link edges: for each incident face the opposite edge (u, w).
            let mut next: HashMap<usize, usize> = HashMap::new();
            for &fi in faces {
                let f = self.faces[fi];
                let k = f.iter().position(|&x| x == v).unwrap();
                let (u, w) = (f[(k + 1) % 3], f[(k + 2) % 3]);
                if next.insert(u, w).is_some() {
                    return false;
                }
            }
            // Walk the link cycle from an arbitrary start.
            let start = *next.keys().next().unwrap();
            let mut cur = start;
            let mut steps = 0;
            loop {
                match next.get(&cur) {
                    Some(&n) => cur = n,
                    None => return false,
                }
                steps += 1;
                if cur == start {
                    break;
                }
                if steps > faces.len() {
                    return false;
                }
            }
            if steps != faces.len() {
                return false;
            }
        }
        true
    }

    /// V − E + F over referenced vertices.
    pub fn euler_characteristic(&self) -> i64 {
        let mut used = vec![false; self.vertices.len()];
        for f in &self.faces {
            for &v in f {
                used[v] = true;
            }
        }
        let v = used.iter().filter(|&&u| u).count() as i64;
        let e = self.edge_report().edges as i64;
        v - e + self.faces.len() as i64
    }

    /// Number of edge-connected face components.
    pub fn components(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.vertices.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for f in &self.faces {
            let a = find(&mut parent, f[0]);
            for &v in &f[1..] {
                let b = find(&mut parent, v);
                if a != b {
                    parent[b] = a;
                }
            }
        }
        let mut roots = std::collections::HashSet::new();
        for f in &self.faces {
            roots.insert(find(&mut parent, f[0]));
        }
        roots.len()
    }

    /// Drops faces whose area is below `min_area` and vertices no face uses.
    pub fn cleaned(&self, min_area: f64) -> TriMesh {
        let keep: Vec<[usize; 3]> = (0..self.faces.len())
            .filter(|&f| self.face_area(f) > min_area)
            .map(|f| self.faces[f])
            .collect();
        let mut remap = vec![usize::MAX; self.vertices.len()];
        let mut vertices = Vec::new();
        let faces = keep
            .iter()
            .map(|f| {
                f.map(|v| {
                    if remap[v] == usize::MAX {
                        remap[v] = vertices.len();
                        vertices.push(self.vertices[v]);
                    }
                    remap[v]
                })
            })
            .collect();
        TriMesh { vertices, faces }
    }

    /// Vertex adjacency lists (1-ring), sorted and deduplicated.
    pub fn vertex_neighbors(&self) -> Vec<Vec<usize>> {
        let mut nb: Vec<Vec<usize>> = vec![Vec::new(); self.vertices.len()];
        for f in &self.faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                nb[a].push(b);
                nb[b].push(a);
            }
        }
        for n in &mut nb {
            n.sort_unstable();
            n.dedup();
        }
        nb
    }

    /// Axis-aligned box `[lo, hi]` with outward-facing triangles.
    pub fn cuboid(lo: Point3<f64>, hi: Point3<f64>) -> TriMesh {
        let c = |i: usize| {
            Point3::new(
                if i & 1 == 0 { lo.x } else { hi.x },
                if i & 2 == 0 { lo.y } else { hi.y },
                if i & 4 == 0 { lo.z } else { hi.z },
            )
        };
        let vertices = (0..8).map(c).collect();
        let faces = vec![
            [0, 2, 1],
            [1, 2, 3], // z = lo
            [4, 5, 6],
            [5, 7, 6], // z = hi
            [0, 1, 4],
            [1, 5, 4], // y = lo
            [2, 6, 3],
            [3, 6, 7], // y = hi
            [0, 4, 2],
            [2, 4, 6], // x = lo
            [1, 3, 5],
            [3, 7, 5], // x = hi
        ];
        TriMesh { vertices, faces }
    }

    /// Geodesic sphere from a subdivided icosahedron.
    pub fn icosphere(center: Point3<f64>, radius: f64, subdivisions: usize) -> TriMesh {
        let t = (1.0 + 5f64.sqrt()) / 2.0;
        let mut verts: Vec<Vector3<f64>> = [
            [-1.0, t, 0.0],
            [1.0, t, 0.0],
            [-1.0, -t, 0.0],
            [1.0, -t, 0.0],
            [0.0, -1.0, t],
            [0.0, 1.0, t],
            [0.0, -1.0, -t],
            [0.0, 1.0, -t],
            [t, 0.0, -1.0],
            [t, 0.0, 1.0],
            [-t, 0.0, -1.0],
            [-t, 0.0, 1.0],
        ]
        .iter()
        .map(|v| Vector3::new(v[0], v[1], v[2]).normalize())
        .collect();
        let mut faces: Vec<[usize; 3]> = vec![
            [0, 11, 5],
            [0, 5, 1],
            [0, 1, 7],
            [0, 7, 10],
            [0, 10, 11],
            [1, 5, 9],
            [5, 11, 4],
            [11, 10, 2],
            [10, 7, 6],
            [7, 1, 8],
            [3, 9, 4],
            [3, 4, 2],
            [3, 2, 6],
            [3, 6, 8],
            [3, 8, 9],
            [4, 9, 5],
            [2, 4, 11],
            [6, 2, 10],
            [8, 6, 7],
            [9, 8, 1],
        ];
        for _ in 0..subdivisions {
            let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
            let mut midpoint = |a: usize, b: usize, verts: &mut Vec<Vector3<f64>>| {
                let key = (a.min(b), a.max(b));
                *mid.entry(key).or_insert_with(|| {
                    verts.push(((verts[a] + verts[b]) * 0.5).normalize());
                    verts.len() - 1
                })
            };
            let mut next = Vec::with_capacity(faces.len() * 4);
            for &[a, b, c] in &faces {
                let ab = midpoint(a, b, &mut verts);
                let bc = midpoint(b, c, &mut verts);
                let ca = midpoint(c, a, &mut verts);
                next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
            }
            faces = next;
        }
        TriMesh {
            vertices: verts.into_iter().map(|v| center + v * radius).collect(),
            faces,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unit_cube_measures() {
        let m = TriMesh::cuboid(Point3::origin(), Point3::new(1.0, 1.0, 1.0));
        assert_relative_eq!(m.volume(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(m.area(), 6.0, epsilon = 1e-12);
        assert!(m.is_watertight());
        assert!(m.vertices_manifold());
        assert_eq!(m.euler_characteristic(), 2);
        let c = m.centroid().unwrap();
        assert_relative_eq!(c, Point3::new(0.5, 0.5, 0.5), epsilon = 1e-12);
    }

    #[test]
    fn icosphere_is_closed_and_outward() {
        let m = TriMesh::icosphere(Point3::new(1.0, 2.0, 3.0), 0.5, 3);
        assert!(m.is_watertight());
        assert_eq!(m.euler_characteristic(), 2);
        let exact = 4.0 / 3.0 * std::f64::consts::PI * 0.125;
        assert!(m.volume() > 0.95 * exact && m.volume() < exact);
    }

    #[test]
    fn rejects_bad_faces() {
        let v = vec![Point3::origin(); 3];
        assert!(TriMesh::new(v.clone(), vec![[0, 1, 3]]).is_err());
        assert!(TriMesh::new(v, vec![[0, 1, 1]]).is_err());
    }

    #[test]
    fn open_mesh_reports_boundary() {
        let mut m = TriMesh::cuboid(Point3::origin(), Point3::new(1.0, 1.0, 1.0));
        m.faces.pop();
        let r = m.edge_report();
        assert_eq!(r.boundary_edges, 3);
        assert!(!m.is_watertight());
    }

    #[test]
    fn cleaning_drops_slivers() {
        let m = TriMesh {
            vertices: vec![
                Point3::origin(),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(2.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
            ],
            faces: vec![[0, 1, 2], [0, 1, 3]],
        };
        let c = m.cleaned(1e-12);
        assert_eq!(c.faces.len(), 1);
        assert_eq!(c.vertices.len(), 3);
    }
}
