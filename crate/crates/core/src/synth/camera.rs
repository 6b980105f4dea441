use nalgebra::{Isometry3, Point3, Rotation3, Translation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pinhole camera. `pose` maps world coordinates into the camera frame,
/// whose +z axis is the viewing direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CameraModel {
    pub pose: Isometry3<f64>,
    pub width: usize,
    pub height: usize,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub z_near: f64,
    pub z_far: f64,
}

impl Default for CameraModel {
    /// 160×120 pixels, 120 px focal length, principal point centered,
    /// depth range [0.2, 2.0] m, identity pose.
    fn default() -> Self {
        Self {
            pose: Isometry3::identity(),
            width: 160,
            height: 120,
            fx: 120.0,
            fy: 120.0,
            cx: 80.0,
            cy: 60.0,
            z_near: 0.2,
            z_far: 2.0,
        }
    }
}

/// Default distance from camera to object center.
pub const DEFAULT_OBJECT_DISTANCE: f64 = 0.8;

impl CameraModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(Error::invalid("focal lengths must be positive"));
        }
        if !(self.z_near > 0.0 && self.z_near < self.z_far) {
            return Err(Error::invalid("need 0 < z_near < z_far"));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::invalid("image size must be positive"));
        }
        Ok(())
    }

    pub fn with_pose(mut self, pose: Isometry3<f64>) -> Self {
        self.pose = pose;
        self
    }

    /// Camera at `eye` looking at `target`; `up` fixes the roll.
    pub fn look_at(eye: Point3<f64>, target: Point3<f64>, up: Vector3<f64>) -> Result<Self> {
        let z = (target - eye)
            .try_normalize(1e-12)
            .ok_or_else(|| Error::invalid("eye and target coincide"))?;
        let x = up
            .cross(&z)
            .try_normalize(1e-9)
            .ok_or_else(|| Error::invalid("up vector parallel to viewing direction"))?;
        let y = z.cross(&x);
        // Rows of the world→camera rotation are the camera axes.
        let r = Rotation3::from_matrix_unchecked(nalgebra::Matrix3::from_rows(&[
            x.transpose(),
            y.transpose(),
            z.transpose(),
        ]));
        let rot = UnitQuaternion::from_rotation_matrix(&r);
        let t = -(rot * eye.coords);
        Ok(Self::default().with_pose(Isometry3::from_parts(Translation3::from(t), rot)))
    }

    /// Camera on a sphere of radius `distance` around `target` (world +z up).
    pub fn orbit(target: Point3<f64>, distance: f64, azimuth: f64, elevation: f64) -> Result<Self> {
        let dir = Vector3::new(
            elevation.cos() * azimuth.cos(),
            elevation.cos() * azimuth.sin(),
            elevation.sin(),
        );
        Self::look_at(target + dir * distance, target, Vector3::z())
    }

    /// Camera center in world coordinates.
    pub fn position(&self) -> Point3<f64> {
        self.pose.inverse() * Point3::origin()
    }

    /// Unnormalized camera-frame ray through the center of pixel (u, v),
    /// scaled so its z component is 1.
    pub fn pixel_ray(&self, u: usize, v: usize) -> Vector3<f64> {
        Vector3::new(
            (u as f64 + 0.5 - self.cx) / self.fx,
            (v as f64 + 0.5 - self.cy) / self.fy,
            1.0,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn look_at_maps_target_onto_axis() {
        let cam = CameraModel::look_at(Point3::new(1.0, 2.0, 0.5), Point3::new(0.0, 0.0, 0.1), Vector3::z()).unwrap();
        let t = cam.pose * Point3::new(0.0, 0.0, 0.1);
        assert!(t.x.abs() < 1e-12 && t.y.abs() < 1e-12 && t.z > 0.0);
        assert!((cam.position() - Point3::new(1.0, 2.0, 0.5)).norm() < 1e-12);
    }

    #[test]
    fn validation() {
        assert!(CameraModel::default().validate().is_ok());
        let mut c = CameraModel::default();
        c.z_near = 3.0;
        assert!(c.validate().is_err());
        let mut c = CameraModel::default();
        c.fx = 0.0;
        assert!(c.validate().is_err());
    }
}
