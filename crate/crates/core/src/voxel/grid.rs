use nalgebra::Point3;

use super::GridFrame;
use crate::error::{Error, Result};

/// Binary occupancy over a [`GridFrame`], one bit per voxel, x-fastest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoxelGrid {
    frame: FrameKey,
    words: Vec<u64>,
}

// `GridFrame` holds floats; wrap it so the grid can derive `Eq`.
#[derive(Debug, Clone, Copy)]
struct FrameKey(GridFrame);

impl PartialEq for FrameKey {
    fn eq(&self, other: &Self) -> bool {
        self.0.dims == other.0.dims
            && self.0.voxel_size.to_bits() == other.0.voxel_size.to_bits()
            && (0..3).all(|a| self.0.origin[a].to_bits() == other.0.origin[a].to_bits())
    }
}
impl Eq for FrameKey {}

impl VoxelGrid {
    pub fn empty(frame: GridFrame) -> Self {
        let n = frame.len();
        Self {
            frame: FrameKey(frame),
            words: vec![0; n.div_ceil(64)],
        }
    }

    pub fn full(frame: GridFrame) -> Self {
        let mut g = Self::empty(frame);
        for i in 0..frame.len() {
            g.set_linear(i, true);
        }
        g
    }

    pub fn from_fn(frame: GridFrame, mut f: impl FnMut([usize; 3]) -> bool) -> Self {
        let mut g = Self::empty(frame);
        for i in 0..frame.len() {
            if f(frame.coords(i)) {
                g.set_linear(i, true);
            }
        }
        g
    }

    pub fn frame(&self) -> &GridFrame {
        &self.frame.0
    }

    pub fn dims(&self) -> [usize; 3] {
        self.frame.0.dims
    }

    pub fn len(&self) -> usize {
        self.frame.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn get_linear(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set_linear(&mut self, i: usize, v: bool) {
        let mask = 1u64 << (i % 64);
        if v {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    #[inline]
    pub fn get(&self, c: [usize; 3]) -> bool {
        self.get_linear(self.frame.0.linear(c))
    }

    #[inline]
    pub fn set(&mut self, c: [usize; 3], v: bool) {
        let i = self.frame.0.linear(c);
        self.set_linear(i, v);
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter_occupied(&self) -> impl Iterator<Item = [usize; 3]> + '_ {
        (0..self.len())
            .filter(|&i| self.get_linear(i))
            .map(|i| self.frame.0.coords(i))
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    pub(crate) fn from_words(frame: GridFrame, words: Vec<u64>) -> Self {
        Self {
            frame: FrameKey(frame),
            words,
        }
    }

    /// `self ⊆ other` (bitwise). Frames must match.
    pub fn is_subset_of(&self, other: &VoxelGrid) -> Result<bool> {
        self.frame().ensure_aligned(other.frame())?;
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0))
    }

    pub fn voxel_centers(&self) -> Vec<Point3<f64>> {
        self.iter_occupied()
            .map(|c| self.frame.0.voxel_center(c))
            .collect()
    }

    /// 0/1 scalar field.
    pub fn to_scalar(&self) -> ScalarGrid {
        ScalarGrid {
            frame: *self.frame(),
            values: (0..self.len())
                .map(|i| if self.get_linear(i) { 1.0 } else { 0.0 })
                .collect(),
        }
    }

    /// Pools `factor`³ blocks with OR. Dims must be divisible by `factor`.
    pub fn or_pool(&self, factor: usize) -> Result<VoxelGrid> {
        let d = self.dims();
        if factor == 0 || d.iter().any(|&v| v % factor != 0) {
            return Err(Error::invalid(format!("dims {d:?} not divisible by {factor}")));
        }
        let f = self.frame();
        let coarse = GridFrame::new(
            d.map(|v| v / factor),
            f.voxel_size * factor as f64,
            f.origin(),
        )?;
        let mut out = VoxelGrid::empty(coarse);
        for c in self.iter_occupied() {
            out.set(c.map(|v| v / factor), true);
        }
        Ok(out)
    }
}

/// Real-valued field on a [`GridFrame`], one finite value per voxel.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGrid {
    frame: GridFrame,
    values: Vec<f64>,
}

impl ScalarGrid {
    pub fn new(frame: GridFrame, values: Vec<f64>) -> Result<Self> {
        frame.validate()?;
        if values.len() != frame.len() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} values", frame.len()),
                actual: format!("{}", values.len()),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("value {i} is not finite")));
        }
        Ok(Self { frame, values })
    }

    pub fn constant(frame: GridFrame, v: f64) -> Self {
        Self {
            frame,
            values: vec![v; frame.len()],
        }
    }

    pub fn from_fn(frame: GridFrame, mut f: impl FnMut(Point3<f64>) -> f64) -> Self {
        let values = (0..frame.len())
            .map(|i| f(frame.voxel_center(frame.coords(i))))
            .collect();
        Self { frame, values }
    }

    pub fn frame(&self) -> &GridFrame {
        &self.frame
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, c: [usize; 3]) -> f64 {
        self.values[self.frame.linear(c)]
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// Copy with a `pad`-voxel border filled with `fill`.
    pub fn padded(&self, pad: usize, fill: f64) -> ScalarGrid {
        let frame = self.frame.padded(pad);
        let mut values = vec![fill; frame.len()];
        for i in 0..self.frame.len() {
            let c = self.frame.coords(i);
            values[frame.linear(c.map(|v| v + pad))] = self.values[i];
        }
        ScalarGrid { frame, values }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarGrid {
        ScalarGrid {
            frame: self.frame,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Occupied iff value ≥ `threshold`.
    pub fn binarize(&self, threshold: f64) -> VoxelGrid {
        let mut g = VoxelGrid::empty(self.frame);
        for (i, &v) in self.values.iter().enumerate() {
            if v >= threshold {
                g.set_linear(i, true);
            }
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(n: usize) -> GridFrame {
        GridFrame::new([n; 3], 0.1, Point3::origin()).unwrap()
    }

    #[test]
    fn set_get_count() {
        let mut g = VoxelGrid::empty(frame(5));
        g.set([1, 2, 3], true);
        g.set([4, 4, 4], true);
        assert!(g.get([1, 2, 3]));
        assert!(!g.get([3, 2, 1]));
        assert_eq!(g.count(), 2);
        g.set([1, 2, 3], false);
        assert_eq!(g.count(), 1);
        assert_eq!(VoxelGrid::full(frame(5)).count(), 125);
    }

    #[test]
    fn scalar_grid_rejects_bad_values() {
        let f = frame(2);
        assert!(ScalarGrid::new(f, vec![0.0; 7]).is_err());
        let mut v = vec![0.0; 8];
        v[3] = f64::NAN;
        assert!(ScalarGrid::new(f, v).is_err());
    }

    #[test]
    fn binarize_conventions() {
        let f = frame(3);
        let half = ScalarGrid::constant(f, 0.5);
        assert_eq!(half.binarize(0.5).count(), 27);
        let sig = ScalarGrid::constant(f, 1.0 / (1.0 + (-10.0f64).exp()));
        assert_eq!(sig.binarize(1.0 - 1e-9).count(), 0);
        let g = VoxelGrid::from_fn(f, |[x, y, z]| (x + y + z) % 2 == 0);
        assert_eq!(g.to_scalar().binarize(0.5), g);
    }

    #[test]
    fn padding_keeps_interior() {
        let f = frame(2);
        let s = ScalarGrid::new(f, (0..8).map(|v| v as f64).collect()).unwrap();
        let p = s.padded(1, -1.0);
        assert_eq!(p.frame().dims, [4, 4, 4]);
        assert_eq!(p.get([1, 1, 1]), 0.0);
        assert_eq!(p.get([2, 2, 2]), 7.0);
        assert_eq!(p.get([0, 0, 0]), -1.0);
        assert!((p.frame().voxel_center([1, 1, 1]) - f.voxel_center([0, 0, 0])).norm() < 1e-12);
    }
}
