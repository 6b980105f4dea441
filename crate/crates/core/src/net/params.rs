use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::config::{NetConfig, TAPS};
use crate::error::{Error, Result};
use crate::rng::seeded;

/// Parameter tensors in declared order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layer {
    Conv1,
    Conv2,
    Dense1,
    Dense2,
}

impl Layer {
    pub const ALL: [Layer; 4] = [Layer::Conv1, Layer::Conv2, Layer::Dense1, Layer::Dense2];
}

/// Offsets of each weight/bias block in the flat parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Layout {
    pub w: [usize; 4],
    pub b: [usize; 4],
    pub w_len: [usize; 4],
    pub b_len: [usize; 4],
    pub total: usize,
}

impl Layout {
    pub fn new(cfg: &NetConfig) -> Self {
        let w_len = [
            cfg.conv1_channels * TAPS,
            cfg.conv2_channels * cfg.conv1_channels * TAPS,
            cfg.hidden * cfg.features(),
            cfg.voxels() * cfg.hidden,
        ];
        let b_len = [cfg.conv1_channels, cfg.conv2_channels, cfg.hidden, cfg.voxels()];
        let mut w = [0; 4];
        let mut b = [0; 4];
        let mut off = 0;
        for i in 0..4 {
            w[i] = off;
            off += w_len[i];
            b[i] = off;
            off += b_len[i];
        }
        Self {
            w,
            b,
            w_len,
            b_len,
            total: off,
        }
    }

    pub fn weight(&self, l: Layer) -> std::ops::Range<usize> {
        let i = l as usize;
        self.w[i]..self.w[i] + self.w_len[i]
    }

    pub fn bias(&self, l: Layer) -> std::ops::Range<usize> {
        let i = l as usize;
        self.b[i]..self.b[i] + self.b_len[i]
    }
}

/// Flat parameter vector: for each layer its weights then its biases.
/// Convolution weights are `[out][in][kz][ky][kx]`, dense weights
/// `[out][in]`, all row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct NetParams {
    pub config: NetConfig,
    pub values: Vec<f64>,
}

impl NetParams {
    pub fn zeros(config: NetConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            values: vec![0.0; Layout::new(&config).total],
        })
    }

    pub fn from_values(config: NetConfig, values: Vec<f64>) -> Result<Self> {
        config.validate()?;
        let n = Layout::new(&config).total;
        if values.len() != n {
            return Err(Error::DimensionMismatch {
                expected: format!("{n} parameters"),
                actual: values.len().to_string(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("parameters must be finite"));
        }
        Ok(Self { config, values })
    }

    /// He-normal weights for the ReLU layers, Glorot-uniform for the
    /// sigmoid output layer, zero biases.
    pub fn init(config: NetConfig, seed: u64) -> Result<Self> {
        let mut p = Self::zeros(config)?;
        let layout = p.layout();
        let mut rng = seeded(seed);
        let fan_in = [TAPS, config.conv1_channels * TAPS, config.features(), config.hidden];
        for (li, layer) in [Layer::Conv1, Layer::Conv2, Layer::Dense1].into_iter().enumerate() {
            let normal = Normal::new(0.0, (2.0 / fan_in[li] as f64).sqrt()).expect("positive std");
            for w in &mut p.values[layout.weight(layer)] {
                *w = normal.sample(&mut rng);
            }
        }
        let limit = (6.0 / (config.hidden + config.voxels()) as f64).sqrt();
        for w in &mut p.values[layout.weight(Layer::Dense2)] {
            *w = rng.random_range(-limit..limit);
        }
        Ok(p)
    }

    pub(crate) fn layout(&self) -> Layout {
        Layout::new(&self.config)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn weights(&self, l: Layer) -> &[f64] {
        &self.values[self.layout().weight(l)]
    }

    pub fn biases(&self, l: Layer) -> &[f64] {
        &self.values[self.layout().bias(l)]
    }

    pub fn weights_mut(&mut self, l: Layer) -> &mut [f64] {
        let r = self.layout().weight(l);
        &mut self.values[r]
    }

    pub fn biases_mut(&mut self, l: Layer) -> &mut [f64] {
        let r = self.layout().bias(l);
        &mut self.values[r]
    }

    /// Zeroes the output layer so every prediction starts at 0.5.
    pub fn zero_output_layer(&mut self) {
        self.weights_mut(Layer::Dense2).fill(0.0);
        self.biases_mut(Layer::Dense2).fill(0.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn std_dev(v: &[f64]) -> (f64, f64) {
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        (mean, var.sqrt())
    }

    #[test]
    fn init_is_deterministic_with_zero_biases() {
        let cfg = NetConfig::new(8);
        let a = NetParams::init(cfg, 1).unwrap();
        let b = NetParams::init(cfg, 1).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, NetParams::init(cfg, 2).unwrap());
        for l in Layer::ALL {
            assert!(a.biases(l).iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn he_std_for_second_conv() {
        // fan_in = 8 · 4³ = 512 → std √(2/512) = 0.0625. Two seeds give
        // 2 · 8192 draws.
        let cfg = NetConfig::new(8);
        let mut draws = NetParams::init(cfg, 10).unwrap().weights(Layer::Conv2).to_vec();
        draws.extend_from_slice(NetParams::init(cfg, 11).unwrap().weights(Layer::Conv2));
        assert!(draws.len() >= 10_000);
        let (mean, sd) = std_dev(&draws);
        assert!(mean.abs() < 0.01);
        assert!((sd - 0.0625).abs() / 0.0625 < 0.05, "std {sd}");
    }

    #[test]
    fn glorot_bounds_for_output_layer() {
        let cfg = NetConfig::new(8);
        let p = NetParams::init(cfg, 3).unwrap();
        let limit = (6.0 / (512.0 + 512.0f64)).sqrt();
        let w = p.weights(Layer::Dense2);
        assert!(w.iter().all(|x| x.abs() < limit));
        // Uniform(−L, L) has std L/√3.
        let (_, sd) = std_dev(w);
        assert!((sd - limit / 3f64.sqrt()).abs() / (limit / 3f64.sqrt()) < 0.05);
    }

    #[test]
    fn layout_sizes() {
        let cfg = NetConfig::new(20);
        let l = Layout::new(&cfg);
        assert_eq!(l.w_len[0], 8 * 64);
        assert_eq!(l.w_len[1], 16 * 8 * 64);
        assert_eq!(cfg.features(), 16 * 125);
        assert_eq!(l.w_len[2], 512 * 2000);
        assert_eq!(l.w_len[3], 8000 * 512);
        assert_eq!(l.total, l.w_len.iter().sum::<usize>() + l.b_len.iter().sum::<usize>());
        assert!(NetConfig::new(6).validate().is_err());
    }
}
