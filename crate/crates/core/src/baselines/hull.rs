use std::collections::HashMap;

use nalgebra::{Point3, Vector3};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::mesh::TriMesh;
use crate::meshing::SmoothParams;

struct Face {
    v: [usize; 3],
    normal: Vector3<f64>,
    offset: f64,
    outside: Vec<usize>,
    alive: bool,
}

impl Face {
    fn new(pts: &[Point3<f64>], v: [usize; 3]) -> Self {
        let n = (pts[v[1]] - pts[v[0]]).cross(&(pts[v[2]] - pts[v[0]]));
        let normal = n.normalize();
        Self {
            v,
            normal,
            offset: normal.dot(&pts[v[0]].coords),
            outside: Vec::new(),
            alive: true,
        }
    }

    fn distance(&self, p: &Point3<f64>) -> f64 {
        self.normal.dot(&p.coords) - self.offset
    }
}

/// Exact 3D convex hull by quickhull. Points within a scale-relative
/// tolerance of a face plane count as on the hull. The result has only hull
/// vertices, outward-facing triangles, and is watertight.
pub fn convex_hull(points: &[Point3<f64>]) -> Result<TriMesh> {
    if points.len() < 4 {
        return Err(Error::Degenerate(format!("convex hull needs 4 points, got {}", points.len())));
    }
    if points.iter().any(|p| !p.coords.iter().all(|c| c.is_finite())) {
        return Err(Error::invalid("non-finite point in hull input"));
    }
    let scale = points.iter().flat_map(|p| p.coords.iter().map(|c| c.abs())).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let eps = 1e-12 * scale * 16.0;

    let simplex = initial_simplex(points, eps)?;
    let mut faces: Vec<Face> = Vec::new();
    let centroid = Point3::from((simplex.iter().map(|&i| points[i].coords).sum::<Vector3<f64>>()) / 4.0);
    for skip in 0..4 {
        let mut tri: Vec<usize> = simplex.iter().enumerate().filter(|(k, _)| *k != skip).map(|(_, &i)| i).collect();
        let mut f = Face::new(points, [tri[0], tri[1], tri[2]]);
        if f.distance(&centroid) > 0.0 {
            tri.swap(1, 2);
            f = Face::new(points, [tri[0], tri[1], tri[2]]);
        }
        faces.push(f);
    }
    // Directed edge → face owning it.
    let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
    for (fi, f) in faces.iter().enumerate() {
        for k in 0..3 {
            edges.insert((f.v[k], f.v[(k + 1) % 3]), fi);
        }
    }
    for (i, p) in points.iter().enumerate() {
        if simplex.contains(&i) {
            continue;
        }
        if let Some(f) = faces.iter_mut().find(|f| f.distance(p) > eps) {
            f.outside.push(i);
        }
    }

    let mut visible = Vec::new();
    let mut stack = Vec::new();
    let mut horizon = Vec::new();
    let mut orphans = Vec::new();
    while let Some(start) = faces.iter().position(|f| f.alive && !f.outside.is_empty()) {
        let eye_idx = *faces[start]
            .outside
            .iter()
            .max_by(|&&a, &&b| faces[start].distance(&points[a]).total_cmp(&faces[start].distance(&points[b])))
            .unwrap();
        let eye = points[eye_idx];

        // Visible region: faces reachable from `start` that see the eye.
        visible.clear();
        stack.clear();
        stack.push(start);
        let mut is_visible = vec![false; faces.len()];
        is_visible[start] = true;
        while let Some(fi) = stack.pop() {
            visible.push(fi);
            let v = faces[fi].v;
            for k in 0..3 {
                if let Some(&nb) = edges.get(&(v[(k + 1) % 3], v[k])) {
                    if !is_visible[nb] && faces[nb].alive && faces[nb].distance(&eye) > eps {
                        is_visible[nb] = true;
                        stack.push(nb);
                    }
                }
            }
        }
        horizon.clear();
        orphans.clear();
        for &fi in &visible {
            let v = faces[fi].v;
            for k in 0..3 {
                let (a, b) = (v[k], v[(k + 1) % 3]);
                if edges.get(&(b, a)).is_none_or(|&t| !is_visible[t]) {
                    horizon.push((a, b));
                }
            }
        }
        for &fi in &visible {
            let v = faces[fi].v;
            for k in 0..3 {
                edges.remove(&(v[k], v[(k + 1) % 3]));
            }
            faces[fi].alive = false;
            orphans.append(&mut faces[fi].outside);
        }
        let first_new = faces.len();
        for &(a, b) in &horizon {
            let f = Face::new(points, [a, b, eye_idx]);
            let fi = faces.len();
            for k in 0..3 {
                edges.insert((f.v[k], f.v[(k + 1) % 3]), fi);
            }
            faces.push(f);
        }
        for &i in &orphans {
            if i == eye_idx {
                continue;
            }
            let p = &points[i];
            if let Some(f) = faces[first_new..].iter_mut().find(|f| f.distance(p) > eps) {
                f.outside.push(i);
            }
        }
    }

    let mut remap = HashMap::new();
    let mut vertices = Vec::new();
    let mut out_faces = Vec::new();
    for f in faces.iter().filter(|f| f.alive) {
        let tri = f.v.map(|i| {
            *remap.entry(i).or_insert_with(|| {
                vertices.push(points[i]);
                vertices.len() - 1
            })
        });
        out_faces.push(tri);
    }
    TriMesh::new(vertices, out_faces)
}

fn initial_simplex(points: &[Point3<f64>], eps: f64) -> Result<[usize; 4]> {
    let degenerate = |what: &str| Error::Degenerate(format!("hull input is {what}"));
    let mut extremes = Vec::with_capacity(6);
    for axis in 0..3 {
        let cmp = |a: &&Point3<f64>, b: &&Point3<f64>| a[axis].total_cmp(&b[axis]);
        extremes.push(points.iter().enumerate().min_by(|a, b| cmp(&a.1, &b.1)).unwrap().0);
        extremes.push(points.iter().enumerate().max_by(|a, b| cmp(&a.1, &b.1)).unwrap().0);
    }
    let (mut i0, mut i1, mut best) = (0, 0, -1.0);
    for &a in &extremes {
        for &b in &extremes {
            let d = (points[a] - points[b]).norm_squared();
            if d > best {
                (i0, i1, best) = (a, b, d);
            }
        }
    }
    if best.sqrt() <= eps {
        return Err(degenerate("a single point"));
    }
    let dir = (points[i1] - points[i0]).normalize();
    let (i2, d2) = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let w = p - points[i0];
            (i, (w - dir * w.dot(&dir)).norm())
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    if d2 <= eps {
        return Err(degenerate("collinear"));
    }
    let n = (points[i1] - points[i0]).cross(&(points[i2] - points[i0])).normalize();
    let (i3, d3) = points
        .iter()
        .enumerate()
        .map(|(i, p)| (i, n.dot(&(p - points[i0])).abs()))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    if d3 <= eps {
        return Err(degenerate("coplanar"));
    }
    Ok([i0, i1, i2, i3])
}

/// Convex hull of the combined clouds followed by Laplacian smoothing.
pub fn convex_hull_completion(depth: &PointCloud, tactile: &PointCloud, smooth: SmoothParams) -> Result<TriMesh> {
    let cloud = depth.concat(tactile);
    let hull = convex_hull(&cloud.points)?;
    Ok(smooth.apply(&hull))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::Rng;

    fn cube_corners() -> Vec<Point3<f64>> {
        (0..8).map(|i| Point3::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64)).collect()
    }

    fn max_outside(hull: &TriMesh, pts: &[Point3<f64>]) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for f in &hull.faces {
            let face = Face::new(&hull.vertices, *f);
            for p in pts {
                worst = worst.max(face.distance(p));
            }
        }
        worst
    }

    fn assert_convex(hull: &TriMesh) {
        assert!(hull.is_watertight());
        let scale = hull.vertices.iter().map(|v| v.coords.norm()).fold(0.0, f64::max);
        for f in &hull.faces {
            let face = Face::new(&hull.vertices, *f);
            for v in &hull.vertices {
                assert!(face.distance(v) <= 1e-9 * scale.max(1.0));
            }
        }
    }

    #[test]
    fn cube_corners_hull() {
        let h = convex_hull(&cube_corners()).unwrap();
        assert_eq!(h.vertices.len(), 8);
        assert_eq!(h.faces.len(), 12);
        assert_relative_eq!(h.volume(), 1.0, epsilon = 1e-12);
        assert_convex(&h);
    }

    #[test]
    fn interior_points_are_inert() {
        let mut rng = seeded(4);
        let mut pts = cube_corners();
        pts.extend((0..100).map(|_| Point3::new(rng.random_range(0.01..0.99), rng.random_range(0.01..0.99), rng.random_range(0.01..0.99))));
        let h = convex_hull(&pts).unwrap();
        assert_eq!(h.vertices.len(), 8);
        assert_relative_eq!(h.volume(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn points_on_faces_do_not_break_hull() {
        // Grid samples on the cube surface: many coplanar and collinear points.
        let mut pts = Vec::new();
        for i in 0..=4 {
            for j in 0..=4 {
                let (a, b) = (i as f64 / 4.0, j as f64 / 4.0);
                for c in [0.0, 1.0] {
                    pts.push(Point3::new(a, b, c));
                    pts.push(Point3::new(a, c, b));
                    pts.push(Point3::new(c, a, b));
                }
            }
        }
        let h = convex_hull(&pts).unwrap();
        assert_relative_eq!(h.volume(), 1.0, epsilon = 1e-12);
        assert!(max_outside(&h, &pts) <= 1e-9);
        assert_convex(&h);
    }

    #[test]
    fn degenerate_inputs() {
        let line: Vec<_> = (0..10).map(|i| Point3::new(i as f64, 2.0 * i as f64, 0.0)).collect();
        assert!(matches!(convex_hull(&line), Err(Error::Degenerate(_))));
        let plane: Vec<_> = (0..10).map(|i| Point3::new(i as f64, (i * i) as f64, 1.0)).collect();
        assert!(matches!(convex_hull(&plane), Err(Error::Degenerate(_))));
        assert!(convex_hull(&cube_corners()[..3]).is_err());
    }

    #[test]
    fn completion_smooths_hull() {
        let pts = PointCloud::new(cube_corners());
        let raw = convex_hull_completion(&pts, &PointCloud::default(), SmoothParams::none()).unwrap();
        let smooth = convex_hull_completion(&pts, &PointCloud::default(), SmoothParams::default()).unwrap();
        assert_eq!(raw.faces, smooth.faces);
        assert!(smooth.volume() < raw.volume());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn random_cloud_hull(seed in any::<u64>(), n in 4usize..500, spherical in any::<bool>()) {
            let mut rng = seeded(seed);
            let pts: Vec<Point3<f64>> = (0..n)
                .map(|_| {
                    let v = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                    Point3::from(if spherical { v.normalize() } else { v })
                })
                .collect();
            let h = convex_hull(&pts).unwrap();
            prop_assert!(max_outside(&h, &pts) <= 1e-9);
            assert_convex(&h);
            let again = convex_hull(&h.vertices).unwrap();
            prop_assert_eq!(again.vertices.len(), h.vertices.len());
            prop_assert!((again.volume() - h.volume()).abs() <= 1e-12);
        }
    }
}
