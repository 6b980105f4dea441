//! 3D convolutional encoder-decoder for occupancy completion.
//!
//! Architecture (grid edge `D`, divisible by 4):
//! `conv3d 1→c1, k4 s2 p1, ReLU` → `conv3d c1→c2, k4 s2 p1, ReLU` →
//! flatten → `dense → hidden, ReLU` → `dense → D³, sigmoid`.
//! Defaults are c1 = 8, c2 = 16, hidden = 512.

mod adam;
pub mod checkpoint;
mod config;
mod loss;
mod model;
mod params;
mod train;

pub use adam::{adam_step, AdamState};
pub use config::{InputMode, NetConfig, TrainConfig};
pub use loss::{loss, loss_with_clamp, LOG_CLAMP};
pub use model::{backward, forward, forward_batch, BatchGradients};
pub use params::{Layer, NetParams};
pub use train::{evaluate_jaccard, select_input, train, train_from, EpochRecord, TrainOutcome};

pub(crate) fn sigmoid(z: f64) -> f64 {
    // Logits beyond ±30 already saturate the clamped loss; capping them
    // keeps outputs strictly inside (0, 1).
    let z = z.clamp(-30.0, 30.0);
    1.0 / (1.0 + (-z).exp())
}
