use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lattice geometry: voxel counts per axis, edge length, and the world
/// position of the min corner of voxel `(0, 0, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridFrame {
    pub dims: [usize; 3],
    pub voxel_size: f64,
    pub origin: [f64; 3],
}

impl GridFrame {
    pub fn new(dims: [usize; 3], voxel_size: f64, origin: Point3<f64>) -> Result<Self> {
        let f = Self {
            dims,
            voxel_size,
            origin: origin.into(),
        };
        f.validate()?;
        Ok(f)
    }

    /// Cubic frame of `dim`³ voxels with edge `edge`, centered on `center`.
    pub fn cube(center: Point3<f64>, edge: f64, dim: usize) -> Result<Self> {
        let size = edge / dim as f64;
        let origin = center - Vector3::repeat(edge / 2.0);
        Self::new([dim; 3], size, origin)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.iter().any(|&d| d == 0) {
            return Err(Error::invalid(format!("grid dims must be positive, got {:?}", self.dims)));
        }
        if !(self.voxel_size > 0.0 && self.voxel_size.is_finite()) {
            return Err(Error::invalid(format!("voxel size must be positive, got {}", self.voxel_size)));
        }
        if !self.origin.iter().all(|c| c.is_finite()) {
            return Err(Error::invalid("grid origin must be finite"));
        }
        Ok(())
    }

    pub fn origin(&self) -> Point3<f64> {
        Point3::from(self.origin)
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// x-fastest linear index.
    #[inline]
    pub fn linear(&self, [x, y, z]: [usize; 3]) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    #[inline]
    pub fn coords(&self, i: usize) -> [usize; 3] {
        let x = i % self.dims[0];
        let yz = i / self.dims[0];
        [x, yz % self.dims[1], yz / self.dims[1]]
    }

    pub fn voxel_center(&self, [x, y, z]: [usize; 3]) -> Point3<f64> {
        let s = self.voxel_size;
        Point3::new(
            self.origin[0] + (x as f64 + 0.5) * s,
            self.origin[1] + (y as f64 + 0.5) * s,
            self.origin[2] + (z as f64 + 0.5) * s,
        )
    }

    pub fn max_corner(&self) -> Point3<f64> {
        Point3::new(
            self.origin[0] + self.dims[0] as f64 * self.voxel_size,
            self.origin[1] + self.dims[1] as f64 * self.voxel_size,
            self.origin[2] + self.dims[2] as f64 * self.voxel_size,
        )
    }

    pub fn center(&self) -> Point3<f64> {
        nalgebra::center(&self.origin(), &self.max_corner())
    }

    /// Signed (unbounded) lattice index of a point: `floor((p - origin) / size)`.
    pub fn lattice_index(&self, p: &Point3<f64>) -> [i64; 3] {
        [0, 1, 2].map(|a| ((p[a] - self.origin[a]) / self.voxel_size).floor() as i64)
    }

    /// Voxel containing `p`, or `None` when outside `[0, dims)` on any axis.
    pub fn voxel_of(&self, p: &Point3<f64>) -> Option<[usize; 3]> {
        let idx = self.lattice_index(p);
        if (0..3).all(|a| idx[a] >= 0 && (idx[a] as usize) < self.dims[a]) {
            Some(idx.map(|v| v as usize))
        } else {
            None
        }
    }

    /// Same extent, `dim` voxels per axis. Requires a cubic frame.
    pub fn resampled(&self, dim: usize) -> Result<Self> {
        if self.dims[0] != self.dims[1] || self.dims[1] != self.dims[2] {
            return Err(Error::invalid("resampling requires a cubic frame"));
        }
        let edge = self.dims[0] as f64 * self.voxel_size;
        Self::new([dim; 3], edge / dim as f64, self.origin())
    }

    /// The frame as stored in grid files: size and origin rounded to f32.
    pub fn quantized(&self) -> Self {
        Self {
            dims: self.dims,
            voxel_size: self.voxel_size as f32 as f64,
            origin: self.origin.map(|c| c as f32 as f64),
        }
    }

    /// Frame grown by `pad` voxels on every side.
    pub fn padded(&self, pad: usize) -> Self {
        let o = pad as f64 * self.voxel_size;
        Self {
            dims: self.dims.map(|d| d + 2 * pad),
            voxel_size: self.voxel_size,
            origin: self.origin.map(|c| c - o),
        }
    }

    /// Geometry equality up to a relative tolerance on the metric fields
    /// (frames read back from f32 files compare equal to their sources).
    pub fn aligned_with(&self, other: &GridFrame) -> bool {
        let tol = 1e-5 * self.voxel_size.max(other.voxel_size);
        self.dims == other.dims
            && (self.voxel_size - other.voxel_size).abs() <= 1e-6 * self.voxel_size
            && (0..3).all(|a| (self.origin[a] - other.origin[a]).abs() <= tol)
    }

    pub(crate) fn ensure_aligned(&self, other: &GridFrame) -> Result<()> {
        if self.aligned_with(other) {
            Ok(())
        } else {
            Err(Error::FrameMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}
