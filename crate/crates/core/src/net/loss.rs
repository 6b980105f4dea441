use crate::error::{Error, Result};
use crate::voxel::{ScalarGrid, VoxelGrid};

/// Probabilities are clamped to `[LOG_CLAMP, 1 − LOG_CLAMP]` before the log.
pub const LOG_CLAMP: f64 = 1e-7;

/// Voxel-mean binary cross-entropy of `pred` against `target`.
pub fn loss(pred: &ScalarGrid, target: &VoxelGrid) -> Result<f64> {
    loss_with_clamp(pred, target, LOG_CLAMP)
}

pub fn loss_with_clamp(pred: &ScalarGrid, target: &VoxelGrid, clamp: f64) -> Result<f64> {
    if pred.frame().dims != target.dims() {
        return Err(Error::DimensionMismatch {
            expected: format!("{:?}", target.dims()),
            actual: format!("{:?}", pred.frame().dims),
        });
    }
    if !(0.0..0.5).contains(&clamp) {
        return Err(Error::invalid(format!("log clamp {clamp} outside [0, 0.5)")));
    }
    let values = pred.values();
    if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::invalid(format!("prediction {v} outside [0, 1]")));
    }
    let mut sum = 0.0;
    for (i, &p) in values.iter().enumerate() {
        sum += voxel_loss(p, target.get_linear(i), clamp);
    }
    Ok(sum / values.len() as f64)
}

pub(crate) fn voxel_loss(p: f64, y: bool, clamp: f64) -> f64 {
    let p = p.clamp(clamp, 1.0 - clamp);
    if y {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}
