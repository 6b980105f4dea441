use serde::{Deserialize, Serialize};

use crate::mesh::TriMesh;

/// Uniform-weight Laplacian smoothing parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SmoothParams {
    pub iterations: usize,
    pub lambda: f64,
}

impl Default for SmoothParams {
    fn default() -> Self {
        Self {
            iterations: 3,
            lambda: 0.5,
        }
    }
}

impl SmoothParams {
    pub fn none() -> Self {
        Self {
            iterations: 0,
            lambda: 0.5,
        }
    }

    pub fn apply(&self, mesh: &TriMesh) -> TriMesh {
        laplacian_smooth(mesh, self.iterations, self.lambda)
    }
}

/// `iterations` Jacobi sweeps of `v ← v + λ (mean(1-ring) − v)`.
/// Connectivity is untouched; isolated vertices stay put.
pub fn laplacian_smooth(mesh: &TriMesh, iterations: usize, lambda: f64) -> TriMesh {
    let mut out = mesh.clone();
    if iterations == 0 || mesh.faces.is_empty() {
        return out;
    }
    let neighbors = mesh.vertex_neighbors();
    let mut next = out.vertices.clone();
    for _ in 0..iterations {
        for (i, nb) in neighbors.iter().enumerate() {
            if nb.is_empty() {
                continue;
            }
            let mean = nb.iter().fold(nalgebra::Vector3::zeros(), |acc, &j| acc + out.vertices[j].coords)
                / nb.len() as f64;
            let v = out.vertices[i];
            next[i] = v + lambda * (mean - v.coords);
        }
        std::mem::swap(&mut out.vertices, &mut next);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Point3;

    fn grid_patch(n: usize) -> TriMesh {
        let mut vertices = Vec::new();
        for j in 0..n {
            for i in 0..n {
                vertices.push(Point3::new(i as f64, j as f64, 0.0));
            }
        }
        let mut faces = Vec::new();
        for j in 0..n - 1 {
            for i in 0..n - 1 {
                let a = j * n + i;
                faces.push([a, a + 1, a + n + 1]);
                faces.push([a, a + n + 1, a + n]);
            }
        }
        TriMesh { vertices, faces }
    }

    #[test]
    fn zero_iterations_is_identity() {
        let m = TriMesh::icosphere(Point3::origin(), 1.0, 2);
        assert_eq!(laplacian_smooth(&m, 0, 0.5), m);
    }

    #[test]
    fn regular_patch_interior_is_fixed() {
        // Every interior vertex of this triangulation has the six neighbours
        // (±1,0), (0,±1), (1,1), (−1,−1), whose mean is the vertex itself.
        let m = grid_patch(7);
        let s = laplacian_smooth(&m, 1, 0.5);
        for j in 1..6 {
            for i in 1..6 {
                let k = j * 7 + i;
                assert!((s.vertices[k] - m.vertices[k]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn icosphere_shrinks() {
        let m = TriMesh::icosphere(Point3::origin(), 1.0, 2);
        let s = laplacian_smooth(&m, 3, 0.5);
        assert!(s.volume() < m.volume());
        assert_eq!(s.faces, m.faces);
        assert_eq!(s.vertices.len(), m.vertices.len());
    }
}
