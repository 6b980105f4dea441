//! Bounding volume hierarchy over mesh triangles.

use nalgebra::{Point3, Vector3};

use super::geometry::{closest_point_on_triangle, ray_triangle, Aabb};
use super::TriMesh;

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone)]
struct Node {
    bounds: Aabb,
    // Leaf: `count > 0`, triangles `order[start..start + count]`.
    // Inner: children at `left` and `left + 1`... stored explicitly.
    start: usize,
    count: usize,
    left: usize,
    right: usize,
}

/// Read-only acceleration structure; cheap to share across threads.
#[derive(Debug, Clone)]
pub struct Bvh {
    tris: Vec<[Point3<f64>; 3]>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

/// Result of a nearest-surface query.
#[derive(Debug, Clone, Copy)]
pub struct Nearest {
    pub point: Point3<f64>,
    pub distance: f64,
    pub triangle: usize,
}

impl Bvh {
    pub fn new(mesh: &TriMesh) -> Self {
        let tris: Vec<_> = mesh.triangles().collect();
        let mut order: Vec<usize> = (0..tris.len()).collect();
        let boxes: Vec<Aabb> = tris.iter().map(Aabb::of_triangle).collect();
        let centers: Vec<Point3<f64>> = boxes.iter().map(|b| b.center()).collect();
        let mut nodes = Vec::new();
        if !tris.is_empty() {
            build(&boxes, &centers, &mut order, 0, tris.len(), &mut nodes);
        }
        Self { tris, order, nodes }
    }

    pub fn is_empty(&self) -> bool {
        self.tris.is_empty()
    }

    pub fn nearest(&self, p: &Point3<f64>) -> Option<Nearest> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best = Nearest {
            point: *p,
            distance: f64::INFINITY,
            triangle: usize::MAX,
        };
        let mut best_d2 = f64::INFINITY;
        let mut stack = vec![0usize];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            if node.bounds.distance_squared(p) >= best_d2 {
                continue;
            }
            if node.count > 0 {
                for &ti in &self.order[node.start..node.start + node.count] {
                    let q = closest_point_on_triangle(p, &self.tris[ti]);
                    let d2 = (q - p).norm_squared();
                    if d2 < best_d2 || (d2 == best_d2 && ti < best.triangle) {
                        best_d2 = d2;
                        best = Nearest {
                            point: q,
                            distance: 0.0,
                            triangle: ti,
                        };
                    }
                }
            } else {
                let dl = self.nodes[node.left].bounds.distance_squared(p);
                let dr = self.nodes[node.right].bounds.distance_squared(p);
                // Visit the closer child first.
                if dl < dr {
                    stack.push(node.right);
                    stack.push(node.left);
                } else {
                    stack.push(node.left);
                    stack.push(node.right);
                }
            }
        }
        best.distance = best_d2.sqrt();
        Some(best)
    }

    /// Nearest hit with ray parameter in `(t_min, t_max]`.
    pub fn ray_cast(&self, origin: &Point3<f64>, dir: &Vector3<f64>, t_min: f64, t_max: f64) -> Option<(f64, usize)> {
        if self.nodes.is_empty() {
            return None;
        }
        let inv = Vector3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut best: Option<(f64, usize)> = None;
        let mut limit = t_max;
        let mut stack = vec![0usize];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            if node.bounds.ray_entry(origin, &inv, t_min, limit).is_none() {
                continue;
            }
            if node.count > 0 {
                for &ti in &self.order[node.start..node.start + node.count] {
                    if let Some(t) = ray_triangle(origin, dir, &self.tris[ti]) {
                        if t > t_min && t <= limit {
                            let better = match best {
                                None => true,
                                Some((bt, bi)) => t < bt || (t == bt && ti < bi),
                            };
                            if better {
                                best = Some((t, ti));
                                limit = t;
                            }
                        }
                    }
                }
            } else {
                stack.push(node.right);
                stack.push(node.left);
            }
        }
        best
    }

    /// All hits along the ray (unsorted), used for parity tests.
    pub fn ray_hits(&self, origin: &Point3<f64>, dir: &Vector3<f64>) -> Vec<f64> {
        let mut hits = Vec::new();
        if self.nodes.is_empty() {
            return hits;
        }
        let inv = Vector3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut stack = vec![0usize];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            if node.bounds.ray_entry(origin, &inv, 0.0, f64::INFINITY).is_none() {
                continue;
            }
            if node.count > 0 {
                for &ti in &self.order[node.start..node.start + node.count] {
                    if let Some(t) = ray_triangle(origin, dir, &self.tris[ti]) {
                        hits.push(t);
                    }
                }
            } else {
                stack.push(node.left);
                stack.push(node.right);
            }
        }
        hits
    }
}

fn build(
    boxes: &[Aabb],
    centers: &[Point3<f64>],
    order: &mut [usize],
    start: usize,
    end: usize,
    nodes: &mut Vec<Node>,
) -> usize {
    let mut bounds = Aabb::empty();
    let mut cbounds = Aabb::empty();
    for &i in &order[start..end] {
        bounds = bounds.merge(&boxes[i]);
        cbounds.grow(&centers[i]);
    }
    let idx = nodes.len();
    nodes.push(Node {
        bounds,
        start,
        count: end - start,
        left: 0,
        right: 0,
    });
    if end - start <= LEAF_SIZE {
        return idx;
    }
    let ext = cbounds.max - cbounds.min;
    let axis = if ext.x >= ext.y && ext.x >= ext.z {
        0
    } else if ext.y >= ext.z {
        1
    } else {
        2
    };
    if ext[axis] <= 0.0 {
        return idx;
    }
    let mid = (start + end) / 2;
    order[start..end].sort_by(|&a, &b| {
        centers[a][axis]
            .total_cmp(&centers[b][axis])
            .then(a.cmp(&b))
    });
    let left = build(boxes, centers, order, start, mid, nodes);
    let right = build(boxes, centers, order, mid, end, nodes);
    let node = &mut nodes[idx];
    node.count = 0;
    node.left = left;
    node.right = right;
    idx
}
