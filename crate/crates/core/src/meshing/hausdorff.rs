use nalgebra::Point3;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{Bvh, TriMesh};
use crate::rng::seeded;

pub const DEFAULT_HAUSDORFF_SAMPLES: usize = 10_000;

/// Directed and symmetric surface distances, in millimeters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HausdorffReport {
    pub mean_a_to_b: f64,
    pub mean_b_to_a: f64,
    pub symmetric_mean: f64,
    pub max_a_to_b: f64,
    pub max_b_to_a: f64,
    pub samples_a: usize,
    pub samples_b: usize,
}

/// `count` area-uniform surface samples drawn with a seeded generator.
pub fn sample_surface(mesh: &TriMesh, count: usize, seed: u64) -> Vec<Point3<f64>> {
    let mut cumulative = Vec::with_capacity(mesh.faces.len());
    let mut total = 0.0;
    for f in 0..mesh.faces.len() {
        total += mesh.face_area(f);
        cumulative.push(total);
    }
    if total <= 0.0 {
        return Vec::new();
    }
    let mut rng = seeded(seed);
    (0..count)
        .map(|_| {
            let pick: f64 = rng.random::<f64>() * total;
            let f = cumulative.partition_point(|&c| c <= pick).min(cumulative.len() - 1);
            let (r1, r2): (f64, f64) = (rng.random(), rng.random());
            let s = r1.sqrt();
            let [a, b, c] = mesh.triangle(f);
            Point3::from(a.coords * (1.0 - s) + b.coords * (s * (1.0 - r2)) + c.coords * (s * r2))
        })
        .collect()
}

fn directed(samples: &[Point3<f64>], target: &Bvh) -> (f64, f64) {
    let d: Vec<f64> = samples
        .par_iter()
        .map(|p| target.nearest(p).map(|n| n.distance).unwrap_or(f64::INFINITY))
        .collect();
    // Sequential reduction keeps the sum order fixed.
    let sum: f64 = d.iter().sum();
    let max = d.iter().copied().fold(0.0, f64::max);
    (sum / d.len() as f64, max)
}

/// Symmetric mean Hausdorff distance between two meshes in meters, reported
/// in millimeters. `samples` points are drawn on each surface.
pub fn hausdorff(a: &TriMesh, b: &TriMesh, samples: usize, seed: u64) -> Result<HausdorffReport> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::UndefinedMetric("Hausdorff distance needs two nonempty meshes".into()));
    }
    if samples == 0 {
        return Err(Error::invalid("at least one surface sample is required"));
    }
    let sa = sample_surface(a, samples, seed);
    // Both surfaces use the same seed so swapping the arguments swaps the
    // directed means exactly.
    let sb = sample_surface(b, samples, seed);
    if sa.is_empty() || sb.is_empty() {
        return Err(Error::UndefinedMetric("mesh has zero surface area".into()));
    }
    let (mean_ab, max_ab) = directed(&sa, &Bvh::new(b));
    let (mean_ba, max_ba) = directed(&sb, &Bvh::new(a));
    Ok(HausdorffReport {
        mean_a_to_b: 1e3 * mean_ab,
        mean_b_to_a: 1e3 * mean_ba,
        symmetric_mean: 1e3 * 0.5 * (mean_ab + mean_ba),
        max_a_to_b: 1e3 * max_ab,
        max_b_to_a: 1e3 * max_ba,
        samples_a: sa.len(),
        samples_b: sb.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Isometry3, Vector3};

    fn cube() -> TriMesh {
        TriMesh::cuboid(Point3::origin(), Point3::new(1.0, 1.0, 1.0))
    }

    #[test]
    fn identical_meshes_report_zero() {
        let r = hausdorff(&cube(), &cube(), 2000, 1).unwrap();
        assert!(r.symmetric_mean.abs() < 1e-9);
        assert!(r.max_a_to_b.abs() < 1e-9);
    }

    #[test]
    fn empty_mesh_is_an_error() {
        assert!(hausdorff(&cube(), &TriMesh::default(), 10, 1).is_err());
    }

    #[test]
    fn samples_lie_on_surface() {
        let m = TriMesh::icosphere(Point3::origin(), 1.0, 2);
        let bvh = Bvh::new(&m);
        for p in sample_surface(&m, 500, 3) {
            assert!(bvh.nearest(&p).unwrap().distance < 1e-12);
        }
    }

    #[test]
    fn symmetric_under_swap_and_scale() {
        let a = cube();
        let b = cube().translated(Vector3::new(0.005, 0.0, 0.0));
        let ab = hausdorff(&a, &b, 3000, 9).unwrap();
        let ba = hausdorff(&b, &a, 3000, 9).unwrap();
        assert!((ab.symmetric_mean - ba.symmetric_mean).abs() < 0.05 * ab.symmetric_mean);
        assert!((ab.symmetric_mean - 0.5 * (ab.mean_a_to_b + ab.mean_b_to_a)).abs() < 1e-12);

        let s = hausdorff(&a.scaled(2.0), &b.scaled(2.0), 3000, 9).unwrap();
        assert!((s.symmetric_mean - 2.0 * ab.symmetric_mean).abs() < 1e-9 * s.symmetric_mean.max(1.0));
        assert!((s.max_a_to_b - 2.0 * ab.max_a_to_b).abs() < 1e-9);
    }

    #[test]
    fn rigid_motion_invariance() {
        let a = cube();
        let b = cube().translated(Vector3::new(0.01, 0.002, 0.0));
        let iso = Isometry3::new(Vector3::new(0.3, -1.0, 2.0), Vector3::new(0.2, 0.5, -0.4));
        let r0 = hausdorff(&a, &b, 2000, 4).unwrap();
        let r1 = hausdorff(&a.transformed(&iso), &b.transformed(&iso), 2000, 4).unwrap();
        assert!((r0.symmetric_mean - r1.symmetric_mean).abs() < 1e-9);
    }
}
