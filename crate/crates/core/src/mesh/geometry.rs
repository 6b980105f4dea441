//! Low-level triangle predicates: closest point, ray intersection, box overlap.

use nalgebra::{Point3, Vector3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Point3<f64>,
    pub max: Point3<f64>,
}

impl Aabb {
    pub fn empty() -> Self {
        Self {
            min: Point3::from([f64::INFINITY; 3]),
            max: Point3::from([f64::NEG_INFINITY; 3]),
        }
    }

    pub fn of_triangle(t: &[Point3<f64>; 3]) -> Self {
        let mut b = Self::empty();
        for p in t {
            b.grow(p);
        }
        b
    }

    pub fn grow(&mut self, p: &Point3<f64>) {
        for a in 0..3 {
            self.min[a] = self.min[a].min(p[a]);
            self.max[a] = self.max[a].max(p[a]);
        }
    }

    pub fn merge(&self, o: &Aabb) -> Aabb {
        let mut b = *self;
        b.grow(&o.min);
        b.grow(&o.max);
        b
    }

    pub fn center(&self) -> Point3<f64> {
        nalgebra::center(&self.min, &self.max)
    }

    pub fn distance_squared(&self, p: &Point3<f64>) -> f64 {
        let mut d = 0.0;
        for a in 0..3 {
            let v = if p[a] < self.min[a] {
                self.min[a] - p[a]
            } else if p[a] > self.max[a] {
                p[a] - self.max[a]
            } else {
                0.0
            };
            d += v * v;
        }
        d
    }

    /// Slab test; returns the entry parameter if the ray meets the box within `[t0, t1]`.
    pub fn ray_entry(&self, origin: &Point3<f64>, inv_dir: &Vector3<f64>, t0: f64, t1: f64) -> Option<f64> {
        let mut lo = t0;
        let mut hi = t1;
        for a in 0..3 {
            let mut ta = (self.min[a] - origin[a]) * inv_dir[a];
            let mut tb = (self.max[a] - origin[a]) * inv_dir[a];
            if ta > tb {
                std::mem::swap(&mut ta, &mut tb);
            }
            // NaN from 0 * inf means the ray lies on the slab plane; keep it.
            if ta.is_nan() || tb.is_nan() {
                continue;
            }
            lo = lo.max(ta);
            hi = hi.min(tb);
            if lo > hi {
                return None;
            }
        }
        Some(lo)
    }
}

/// Closest point on triangle `abc` to `p` (Voronoi-region walk).
pub fn closest_point_on_triangle(p: &Point3<f64>, tri: &[Point3<f64>; 3]) -> Point3<f64> {
    let [a, b, c] = *tri;
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return a + ab * v;
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return a + ac * w;
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    a + ab * v + ac * w
}

/// Möller–Trumbore; returns the ray parameter of a hit with `t > 0`.
pub fn ray_triangle(origin: &Point3<f64>, dir: &Vector3<f64>, tri: &[Point3<f64>; 3]) -> Option<f64> {
    let [a, b, c] = *tri;
    let e1 = b - a;
    let e2 = c - a;
    let pvec = dir.cross(&e2);
    let det = e1.dot(&pvec);
    if det.abs() < 1e-300 {
        return None;
    }
    let inv = 1.0 / det;
    let tvec = origin - a;
    let u = tvec.dot(&pvec) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let qvec = tvec.cross(&e1);
    let v = dir.dot(&qvec) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(&qvec) * inv;
    (t > 0.0).then_some(t)
}

/// Separating-axis test between a triangle and an axis-aligned box.
pub fn triangle_box_overlap(center: &Point3<f64>, half: &Vector3<f64>, tri: &[Point3<f64>; 3]) -> bool {
    let v = [tri[0] - center, tri[1] - center, tri[2] - center];
    let e = [v[1] - v[0], v[2] - v[1], v[0] - v[2]];

    // Nine edge cross-axis tests.
    let axes = [Vector3::x(), Vector3::y(), Vector3::z()];
    for ax in &axes {
        for ed in &e {
            let axis = ax.cross(ed);
            if axis.norm_squared() < 1e-30 {
                continue;
            }
            let p: [f64; 3] = [axis.dot(&v[0]), axis.dot(&v[1]), axis.dot(&v[2])];
            let r = half.x * axis.x.abs() + half.y * axis.y.abs() + half.z * axis.z.abs();
            let mn = p[0].min(p[1]).min(p[2]);
            let mx = p[0].max(p[1]).max(p[2]);
            if mn > r || mx < -r {
                return false;
            }
        }
    }

    // Box face normals.
    for a in 0..3 {
        let mn = v[0][a].min(v[1][a]).min(v[2][a]);
        let mx = v[0][a].max(v[1][a]).max(v[2][a]);
        if mn > half[a] || mx < -half[a] {
            return false;
        }
    }

    // Triangle plane.
    let n = e[0].cross(&e[1]);
    let d = n.dot(&v[0]);
    let r = half.x * n.x.abs() + half.y * n.y.abs() + half.z * n.z.abs();
    d.abs() <= r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri() -> [Point3<f64>; 3] {
        [
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ]
    }

    #[test]
    fn closest_point_regions() {
        let t = tri();
        let q = closest_point_on_triangle(&Point3::new(0.2, 0.2, 3.0), &t);
        assert!((q - Point3::new(0.2, 0.2, 0.0)).norm() < 1e-12);
        let q = closest_point_on_triangle(&Point3::new(-1.0, -1.0, 0.0), &t);
        assert!((q - t[0]).norm() < 1e-12);
        let q = closest_point_on_triangle(&Point3::new(1.0, 1.0, 0.0), &t);
        assert!((q - Point3::new(0.5, 0.5, 0.0)).norm() < 1e-12);
        let q = closest_point_on_triangle(&Point3::new(0.5, -2.0, 1.0), &t);
        assert!((q - Point3::new(0.5, 0.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn closest_point_matches_dense_search() {
        let t = [
            Point3::new(0.3, -0.2, 0.1),
            Point3::new(1.1, 0.4, -0.3),
            Point3::new(-0.2, 0.9, 0.5),
        ];
        let queries = [
            Point3::new(2.0, 2.0, 2.0),
            Point3::new(-1.0, 0.0, 0.3),
            Point3::new(0.4, 0.4, -1.0),
        ];
        for p in &queries {
            let q = closest_point_on_triangle(p, &t);
            let best = (p - q).norm();
            let n = 300;
            let mut brute = f64::INFINITY;
            for i in 0..=n {
                for j in 0..=(n - i) {
                    let (u, v) = (i as f64 / n as f64, j as f64 / n as f64);
                    let s = t[0] + (t[1] - t[0]) * u + (t[2] - t[0]) * v;
                    brute = brute.min((p - s).norm());
                }
            }
            assert!(best <= brute + 1e-12);
            assert!(brute - best < 5e-3);
        }
    }

    #[test]
    fn ray_hits_and_misses() {
        let t = tri();
        let o = Point3::new(0.25, 0.25, -1.0);
        assert!((ray_triangle(&o, &Vector3::z(), &t).unwrap() - 1.0).abs() < 1e-12);
        assert!(ray_triangle(&o, &-Vector3::z(), &t).is_none());
        let o = Point3::new(0.8, 0.8, -1.0);
        assert!(ray_triangle(&o, &Vector3::z(), &t).is_none());
    }

    #[test]
    fn box_overlap_cases() {
        let t = tri();
        let half = Vector3::new(0.1, 0.1, 0.1);
        assert!(triangle_box_overlap(&Point3::new(0.1, 0.1, 0.05), &half, &t));
        assert!(!triangle_box_overlap(&Point3::new(0.1, 0.1, 0.5), &half, &t));
        // Beyond the hypotenuse.
        assert!(!triangle_box_overlap(&Point3::new(0.8, 0.8, 0.0), &half, &t));
        assert!(triangle_box_overlap(&Point3::new(0.55, 0.55, 0.0), &half, &t));
    }
}
