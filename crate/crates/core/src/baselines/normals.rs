use std::num::NonZero;

use kiddo::{ImmutableKdTree, SquaredEuclidean};
use nalgebra::{Matrix3, Point3, SymmetricEigen, Vector3};
use rayon::prelude::*;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};

/// A cloud with per-point normals; `valid[i]` is false where the
/// neighbourhood was degenerate (the stored normal is then zero).
#[derive(Debug, Clone)]
pub struct EstimatedNormals {
    pub cloud: PointCloud,
    pub valid: Vec<bool>,
}

impl EstimatedNormals {
    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }
}

/// PCA normals from each point and its `k` nearest neighbours, flipped to
/// face `camera_origin`.
pub fn estimate_normals(cloud: &PointCloud, k: usize, camera_origin: &Point3<f64>) -> Result<EstimatedNormals> {
    cloud.check_finite()?;
    if k < 2 || cloud.len() < k + 1 {
        return Err(Error::invalid(format!(
            "normal estimation with k = {k} needs k ≥ 2 and at least k + 1 points, got {}",
            cloud.len()
        )));
    }
    let entries: Vec<[f64; 3]> = cloud.points.iter().map(|p| [p.x, p.y, p.z]).collect();
    let tree = ImmutableKdTree::new_from_slice(&entries).map_err(|e| Error::invalid(format!("kd-tree: {e:?}")))?;
    let qty = NonZero::new(k + 1).unwrap();
    let (normals, valid): (Vec<Vector3<f64>>, Vec<bool>) = cloud
        .points
        .par_iter()
        .map(|p| {
            let nn = tree.query(&[p.x, p.y, p.z]).nearest_n::<SquaredEuclidean<f64>>(qty).execute();
            let nbrs: Vec<Vector3<f64>> = nn.iter().map(|r| cloud.points[r.item as usize].coords).collect();
            let mean = nbrs.iter().sum::<Vector3<f64>>() / nbrs.len() as f64;
            let mut cov = Matrix3::zeros();
            for q in &nbrs {
                let d = q - mean;
                cov += d * d.transpose();
            }
            let eig = SymmetricEigen::new(cov);
            let mut order = [0, 1, 2];
            order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
            let (mid, top) = (eig.eigenvalues[order[1]], eig.eigenvalues[order[2]]);
            if !(top > 0.0) || mid <= 1e-10 * top {
                return (Vector3::zeros(), false);
            }
            let mut n: Vector3<f64> = eig.eigenvectors.column(order[0]).into_owned().normalize();
            if n.dot(&(camera_origin - p)) < 0.0 {
                n = -n;
            }
            (n, true)
        })
        .unzip();
    Ok(EstimatedNormals {
        cloud: PointCloud::with_normals(cloud.points.clone(), normals)?,
        valid,
    })
}

/// Tactile normals point from each contact toward the camera.
pub fn tactile_normals(cloud: &PointCloud, camera_origin: &Point3<f64>) -> EstimatedNormals {
    let (normals, valid): (Vec<_>, Vec<_>) = cloud
        .points
        .iter()
        .map(|p| {
            let d = camera_origin - p;
            let len = d.norm();
            if len > 0.0 {
                (d / len, true)
            } else {
                (Vector3::zeros(), false)
            }
        })
        .unzip();
    EstimatedNormals {
        cloud: PointCloud {
            points: cloud.points.clone(),
            normals: Some(normals),
        },
        valid,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::TriMesh;
    use crate::synth::{render_depth, CameraModel};

    #[test]
    fn plane_normals_face_camera() {
        let pts: Vec<_> = (0..100).map(|i| Point3::new((i % 10) as f64 * 0.1, (i / 10) as f64 * 0.13, 0.0)).collect();
        let est = estimate_normals(&PointCloud::new(pts), 10, &Point3::new(0.3, 0.2, 5.0)).unwrap();
        assert_eq!(est.valid_count(), 100);
        for n in est.cloud.normals.as_ref().unwrap() {
            assert!((n - Vector3::z()).norm() < 1e-6);
        }
    }

    #[test]
    fn tactile_normal_points_at_camera() {
        let t = tactile_normals(&PointCloud::new(vec![Point3::new(0.0, 0.0, -1.0)]), &Point3::origin());
        assert!((t.cloud.normals.unwrap()[0] - Vector3::z()).norm() < 1e-15);
    }

    #[test]
    fn collinear_neighbourhoods_are_invalid() {
        let pts: Vec<_> = (0..20).map(|i| Point3::new(i as f64, 0.0, 0.0)).collect();
        let est = estimate_normals(&PointCloud::new(pts), 5, &Point3::new(0.0, 0.0, 1.0)).unwrap();
        assert_eq!(est.valid_count(), 0);
        assert!(estimate_normals(&PointCloud::new(vec![Point3::origin(); 3]), 5, &Point3::origin()).is_err());
    }

    #[test]
    fn visible_sphere_normals_are_radial() {
        let c = Point3::new(0.0, 0.0, 0.8);
        let sphere = TriMesh::icosphere(c, 0.05, 4);
        let cam = CameraModel::default();
        let cloud = render_depth(&sphere, &cam).unwrap();
        let est = estimate_normals(&cloud, 10, &cam.position()).unwrap();
        let normals = est.cloud.normals.as_ref().unwrap();
        let good = cloud
            .points
            .iter()
            .zip(normals)
            .zip(&est.valid)
            .filter(|((p, n), v)| **v && n.dot(&(*p - c).normalize()) >= 10f64.to_radians().cos())
            .count();
        assert!(good as f64 >= 0.95 * cloud.len() as f64, "{good} of {}", cloud.len());
    }
}
