use nalgebra::{Point3, Vector3};
use rayon::prelude::*;

use super::CameraModel;
use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::mesh::{Bvh, TriMesh};

/// Casts one ray per pixel and returns the visible surface points in the
/// camera frame. Hits are kept when their depth lies in `[z_near, z_far]`.
pub(crate) fn render_camera_frame(mesh_cam: &TriMesh, cam: &CameraModel) -> Result<Vec<Point3<f64>>> {
    cam.validate()?;
    if mesh_cam.is_empty() {
        return Ok(Vec::new());
    }
    let bvh = Bvh::new(mesh_cam);
    if mesh_cam.is_watertight() && origin_inside(&bvh) {
        return Err(Error::DegenerateView("camera center lies inside the mesh solid".into()));
    }
    let origin = Point3::origin();
    let rows: Vec<Vec<Point3<f64>>> = (0..cam.height)
        .into_par_iter()
        .map(|v| {
            (0..cam.width)
                .filter_map(|u| {
                    let dir = cam.pixel_ray(u, v);
                    // dir.z == 1, so the ray parameter equals camera depth.
                    let (t, _) = bvh.ray_cast(&origin, &dir, 0.0, cam.z_far)?;
                    (t >= cam.z_near).then(|| origin + dir * t)
                })
                .collect()
        })
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

fn origin_inside(bvh: &Bvh) -> bool {
    // An off-axis direction avoids grazing lattice-aligned edges.
    let dir = Vector3::new(0.012_345, 0.037_1, 1.0);
    bvh.ray_hits(&Point3::origin(), &dir).len() % 2 == 1
}

/// Renders the 2.5D cloud of surface points visible from `cam`, in world
/// coordinates. Pixels whose ray misses the mesh (or hits outside the depth
/// range) produce no point.
pub fn render_depth(mesh: &TriMesh, cam: &CameraModel) -> Result<PointCloud> {
    let mesh_cam = mesh.transformed(&cam.pose);
    let pts = render_camera_frame(&mesh_cam, cam)?;
    let world = cam.pose.inverse();
    Ok(PointCloud::new(pts.iter().map(|p| world * p).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Isometry3;

    #[test]
    fn empty_scene_renders_nothing() {
        let c = render_depth(&TriMesh::default(), &CameraModel::default()).unwrap();
        assert!(c.is_empty());
    }

    #[test]
    fn facing_square_lies_on_its_plane() {
        let m = TriMesh {
            vertices: vec![
                Point3::new(-0.5, -0.5, 0.5),
                Point3::new(0.5, -0.5, 0.5),
                Point3::new(0.5, 0.5, 0.5),
                Point3::new(-0.5, 0.5, 0.5),
            ],
            faces: vec![[0, 1, 2], [0, 2, 3]],
        };
        let cam = CameraModel::default();
        let c = render_depth(&m, &cam).unwrap();
        assert!(!c.is_empty());
        for p in &c.points {
            assert!((p.z - 0.5).abs() < 1e-6);
        }
        // Analytic count: pixels whose ray at z = 0.5 lands inside the square.
        let expected = (0..cam.height)
            .flat_map(|v| (0..cam.width).map(move |u| (u, v)))
            .filter(|&(u, v)| {
                let r = cam.pixel_ray(u, v) * 0.5;
                r.x.abs() <= 0.5 && r.y.abs() <= 0.5
            })
            .count();
        assert_eq!(c.len(), expected);
    }

    #[test]
    fn sphere_hit_count_matches_closed_form() {
        let center = Point3::new(0.0, 0.0, 0.8);
        let r = 0.1;
        let m = TriMesh::icosphere(center, r, 5);
        let cam = CameraModel::default();
        let c = render_depth(&m, &cam).unwrap();
        // Closed-form ray/sphere test per pixel against the exact sphere; the
        // tessellated sphere is inscribed, so pixels whose ray passes within a
        // thin rim of the silhouette may differ.
        let mut inside = 0;
        let mut rim = 0;
        for v in 0..cam.height {
            for u in 0..cam.width {
                let d = cam.pixel_ray(u, v).normalize();
                let tc = d.dot(&center.coords);
                let miss2 = center.coords.norm_squared() - tc * tc;
                let dist = miss2.max(0.0).sqrt();
                if dist < r * 0.995 {
                    inside += 1;
                } else if dist <= r {
                    rim += 1;
                }
            }
        }
        assert!(c.len() >= inside && c.len() <= inside + rim, "{} vs [{inside}, {}]", c.len(), inside + rim);
        for p in &c.points {
            assert!(((p - center).norm() - r).abs() < 2e-3);
        }
    }

    #[test]
    fn camera_inside_solid_is_rejected() {
        let m = TriMesh::cuboid(Point3::new(-1.0, -1.0, -1.0), Point3::new(1.0, 1.0, 1.0));
        assert!(matches!(
            render_depth(&m, &CameraModel::default()),
            Err(Error::DegenerateView(_))
        ));
    }

    #[test]
    fn beyond_far_plane_is_clipped() {
        let m = TriMesh::cuboid(Point3::new(-0.1, -0.1, 3.0), Point3::new(0.1, 0.1, 3.2));
        assert!(render_depth(&m, &CameraModel::default()).unwrap().is_empty());
    }

    #[test]
    fn world_points_follow_pose() {
        let m = TriMesh::icosphere(Point3::new(0.0, 0.0, 0.8), 0.1, 3);
        let shift = Isometry3::translation(0.3, 0.0, 0.0);
        let cam = CameraModel::default().with_pose(shift.inverse());
        let moved = m.transformed(&shift);
        let b = render_depth(&moved, &cam).unwrap();
        let a = render_depth(&m, &CameraModel::default()).unwrap();
        assert!(a.len().abs_diff(b.len()) <= 2);
        let bvh = Bvh::new(&moved);
        for q in &b.points {
            assert!(bvh.nearest(q).unwrap().distance < 1e-9);
        }
    }
}
