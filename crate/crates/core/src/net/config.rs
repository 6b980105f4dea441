use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetConfig {
    pub grid_dim: usize,
    pub conv1_channels: usize,
    pub conv2_channels: usize,
    pub hidden: usize,
}

pub const KERNEL: usize = 4;
pub const TAPS: usize = KERNEL * KERNEL * KERNEL;

impl NetConfig {
    pub fn new(grid_dim: usize) -> Self {
        Self {
            grid_dim,
            conv1_channels: 8,
            conv2_channels: 16,
            hidden: 512,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_dim < 4 || self.grid_dim % 4 != 0 {
            return Err(Error::invalid(format!("grid_dim {} must be a positive multiple of 4", self.grid_dim)));
        }
        if self.conv1_channels == 0 || self.conv2_channels == 0 || self.hidden == 0 {
            return Err(Error::invalid("layer widths must be positive"));
        }
        Ok(())
    }

    /// Spatial edge after the first convolution.
    pub fn h1(&self) -> usize {
        self.grid_dim / 2
    }

    pub fn h2(&self) -> usize {
        self.grid_dim / 4
    }

    pub fn voxels(&self) -> usize {
        self.grid_dim.pow(3)
    }

    /// Flattened encoder output length.
    pub fn features(&self) -> usize {
        self.conv2_channels * self.h2().pow(3)
    }
}

/// Which grid the network sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputMode {
    DepthOnly,
    TactileAndDepth,
    TactileOnly,
}

impl InputMode {
    pub fn as_str(self) -> &'static str {
        match self {
            InputMode::DepthOnly => "depth_only",
            InputMode::TactileAndDepth => "tactile_and_depth",
            InputMode::TactileOnly => "tactile_only",
        }
    }
}

impl std::str::FromStr for InputMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "depth" | "depth_only" => Ok(InputMode::DepthOnly),
            "both" | "tactile_and_depth" => Ok(InputMode::TactileAndDepth),
            "tactile" | "tactile_only" => Ok(InputMode::TactileOnly),
            other => Err(Error::invalid(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    /// Clamp for log arguments in the loss.
    pub log_clamp: f64,
    /// Batch shards evaluated in parallel. 1 keeps training bit-exact
    /// regardless of thread pool size; results for a fixed value > 1 are
    /// deterministic but differ from the single-shard trajectory.
    pub workers: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            batch_size: 32,
            epochs: 10,
            seed: 0,
            log_clamp: 1e-7,
            workers: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta1 > 0.0 && self.beta1 < 1.0 && self.beta2 > 0.0 && self.beta2 < 1.0) {
            return Err(Error::invalid("Adam betas must lie in (0, 1)"));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::invalid("learning rate must be positive"));
        }
        if self.batch_size == 0 || self.workers == 0 {
            return Err(Error::invalid("batch size and worker count must be at least 1"));
        }
        if !(self.log_clamp > 0.0 && self.log_clamp < 0.5) {
            return Err(Error::invalid("log clamp must lie in (0, 0.5)"));
        }
        Ok(())
    }
}
