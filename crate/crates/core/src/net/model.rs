use super::config::{NetConfig, TAPS};
use super::params::{Layer, Layout, NetParams};
use super::sigmoid;
use crate::error::{Error, Result};
use crate::voxel::{ScalarGrid, VoxelGrid};

/// `C[m×n] = op(A)·op(B) + beta·C` on row-major slices. A transposed operand
/// is read from its stored (untransposed) layout.
#[allow(clippy::too_many_arguments)]
fn gemm(m: usize, k: usize, n: usize, a: &[f64], a_t: bool, b: &[f64], b_t: bool, c: &mut [f64], beta: f64) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(c.len(), m * n);
    let (rsa, csa) = if a_t { (1, m as isize) } else { (k as isize, 1) };
    let (rsb, csb) = if b_t { (1, k as isize) } else { (n as isize, 1) };
    // SAFETY: the strides above describe exactly the `m×k`, `k×n` and `m×n`
    // row-major buffers whose lengths are asserted.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

/// Gather table for a kernel-4, stride-2, padding-1 convolution: for each
/// (output voxel, tap) the input voxel index, or `u32::MAX` in the padding.
struct ConvIndex {
    out_dim: usize,
    table: Vec<u32>,
}

impl ConvIndex {
    fn new(in_dim: usize) -> Self {
        let out_dim = in_dim / 2;
        let r_count = out_dim.pow(3);
        let mut table = vec![u32::MAX; r_count * TAPS];
        for oz in 0..out_dim {
            for oy in 0..out_dim {
                for ox in 0..out_dim {
                    let r = ox + out_dim * (oy + out_dim * oz);
                    for kz in 0..4 {
                        for ky in 0..4 {
                            for kx in 0..4 {
                                let t = kx + 4 * (ky + 4 * kz);
                                let (ix, iy, iz) = (
                                    (2 * ox + kx) as isize - 1,
                                    (2 * oy + ky) as isize - 1,
                                    (2 * oz + kz) as isize - 1,
                                );
                                let d = in_dim as isize;
                                if (0..d).contains(&ix) && (0..d).contains(&iy) && (0..d).contains(&iz) {
                                    table[r * TAPS + t] = (ix + d * (iy + d * iz)) as u32;
                                }
                            }
                        }
                    }
                }
            }
        }
        Self { out_dim, table }
    }

    fn rows(&self) -> usize {
        self.out_dim.pow(3)
    }

    /// `col[r][c·64 + t] = input[c][table[r][t]]` for `channels` input channels.
    fn im2col(&self, input: &[f64], channels: usize, in_len: usize, col: &mut Vec<f64>) {
        let rows = self.rows();
        let k = channels * TAPS;
        col.clear();
        col.resize(rows * k, 0.0);
        for r in 0..rows {
            let tab = &self.table[r * TAPS..(r + 1) * TAPS];
            let dst = &mut col[r * k..(r + 1) * k];
            for c in 0..channels {
                let src = &input[c * in_len..(c + 1) * in_len];
                for (t, &idx) in tab.iter().enumerate() {
                    if idx != u32::MAX {
                        dst[c * TAPS + t] = src[idx as usize];
                    }
                }
            }
        }
    }

    fn col2im(&self, dcol: &[f64], channels: usize, in_len: usize, dinput: &mut [f64]) {
        let rows = self.rows();
        let k = channels * TAPS;
        for r in 0..rows {
            let tab = &self.table[r * TAPS..(r + 1) * TAPS];
            let src = &dcol[r * k..(r + 1) * k];
            for c in 0..channels {
                let dst = &mut dinput[c * in_len..(c + 1) * in_len];
                for (t, &idx) in tab.iter().enumerate() {
                    if idx != u32::MAX {
                        dst[idx as usize] += src[c * TAPS + t];
                    }
                }
            }
        }
    }
}

struct Net<'a> {
    cfg: NetConfig,
    p: &'a NetParams,
    layout: Layout,
    conv1: ConvIndex,
    conv2: ConvIndex,
}

/// Activations kept for the backward pass.
struct Cache {
    batch: usize,
    a1: Vec<Vec<f64>>, // per sample, [c1][h1³]
    a2: Vec<f64>,      // [B][features]
    h: Vec<f64>,       // [B][hidden]
    p: Vec<f64>,       // [B][D³]
}

impl<'a> Net<'a> {
    fn new(p: &'a NetParams) -> Self {
        let cfg = p.config;
        Self {
            cfg,
            p,
            layout: p.layout(),
            conv1: ConvIndex::new(cfg.grid_dim),
            conv2: ConvIndex::new(cfg.h1()),
        }
    }

    fn w(&self, l: Layer) -> &[f64] {
        &self.p.values[self.layout.weight(l)]
    }

    fn b(&self, l: Layer) -> &[f64] {
        &self.p.values[self.layout.bias(l)]
    }

    fn conv_forward(&self, idx: &ConvIndex, input: &[f64], c_in: usize, in_len: usize, layer: Layer, c_out: usize, col: &mut Vec<f64>) -> Vec<f64> {
        idx.im2col(input, c_in, in_len, col);
        let rows = idx.rows();
        let mut z = vec![0.0; c_out * rows];
        gemm(c_out, c_in * TAPS, rows, self.w(layer), false, col, true, &mut z, 0.0);
        let bias = self.b(layer);
        for (o, zo) in z.chunks_mut(rows).enumerate() {
            for v in zo {
                *v = (*v + bias[o]).max(0.0);
            }
        }
        z
    }

    fn forward(&self, inputs: &[Vec<f64>]) -> Cache {
        let cfg = self.cfg;
        let batch = inputs.len();
        let (c1, c2, hid, f, o) = (cfg.conv1_channels, cfg.conv2_channels, cfg.hidden, cfg.features(), cfg.voxels());
        let h1_len = cfg.h1().pow(3);
        let mut col = Vec::new();
        let mut a1 = Vec::with_capacity(batch);
        let mut a2 = vec![0.0; batch * f];
        for (s, x) in inputs.iter().enumerate() {
            let act1 = self.conv_forward(&self.conv1, x, 1, o, Layer::Conv1, c1, &mut col);
            let act2 = self.conv_forward(&self.conv2, &act1, c1, h1_len, Layer::Conv2, c2, &mut col);
            a2[s * f..(s + 1) * f].copy_from_slice(&act2);
            a1.push(act1);
        }
        let mut h = vec![0.0; batch * hid];
        gemm(batch, f, hid, &a2, false, self.w(Layer::Dense1), true, &mut h, 0.0);
        let b3 = self.b(Layer::Dense1);
        for row in h.chunks_mut(hid) {
            for (v, b) in row.iter_mut().zip(b3) {
                *v = (*v + b).max(0.0);
            }
        }
        let mut p = vec![0.0; batch * o];
        gemm(batch, hid, o, &h, false, self.w(Layer::Dense2), true, &mut p, 0.0);
        let b4 = self.b(Layer::Dense2);
        for row in p.chunks_mut(o) {
            for (v, b) in row.iter_mut().zip(b4) {
                *v = sigmoid(*v + b);
            }
        }
        Cache { batch, a1, a2, h, p }
    }

    /// Mean loss and mean gradient over the batch.
    fn backward(&self, inputs: &[Vec<f64>], targets: &[Vec<f64>], log_clamp: f64) -> (f64, Vec<f64>) {
        let cfg = self.cfg;
        let cache = self.forward(inputs);
        let batch = cache.batch;
        let (c1, c2, hid, f, o) = (cfg.conv1_channels, cfg.conv2_channels, cfg.hidden, cfg.features(), cfg.voxels());
        let h1_len = cfg.h1().pow(3);
        let h2_len = cfg.h2().pow(3);
        let lay = &self.layout;
        let mut g = vec![0.0; lay.total];

        // Output layer: d(mean BCE)/d(logit) = (p − y) / (O·B) inside the clamp.
        let scale = 1.0 / (o * batch) as f64;
        let mut loss = 0.0;
        let mut dz4 = vec![0.0; batch * o];
        for s in 0..batch {
            let (p, y) = (&cache.p[s * o..(s + 1) * o], &targets[s]);
            let mut sample_loss = 0.0;
            for i in 0..o {
                let pc = p[i].clamp(log_clamp, 1.0 - log_clamp);
                sample_loss -= y[i] * pc.ln() + (1.0 - y[i]) * (1.0 - pc).ln();
                if p[i] > log_clamp && p[i] < 1.0 - log_clamp {
                    dz4[s * o + i] = (p[i] - y[i]) * scale;
                }
            }
            loss += sample_loss / o as f64;
        }
        loss /= batch as f64;

        {
            let (gw, gb) = split_grad(&mut g, lay, Layer::Dense2);
            gemm(o, batch, hid, &dz4, true, &cache.h, false, gw, 0.0);
            column_sums(&dz4, o, gb);
        }
        let mut dh = vec![0.0; batch * hid];
        gemm(batch, o, hid, &dz4, false, self.w(Layer::Dense2), false, &mut dh, 0.0);
        for (d, &hv) in dh.iter_mut().zip(&cache.h) {
            if hv <= 0.0 {
                *d = 0.0;
            }
        }

        {
            let (gw, gb) = split_grad(&mut g, lay, Layer::Dense1);
            gemm(hid, batch, f, &dh, true, &cache.a2, false, gw, 0.0);
            column_sums(&dh, hid, gb);
        }
        let mut da2 = vec![0.0; batch * f];
        gemm(batch, hid, f, &dh, false, self.w(Layer::Dense1), false, &mut da2, 0.0);
        for (d, &a) in da2.iter_mut().zip(&cache.a2) {
            if a <= 0.0 {
                *d = 0.0;
            }
        }

        let mut col = Vec::new();
        let mut dcol = Vec::new();
        for s in 0..batch {
            // conv2
            let dz2 = &da2[s * f..(s + 1) * f];
            self.conv2.im2col(&cache.a1[s], c1, h1_len, &mut col);
            let k2 = c1 * TAPS;
            {
                let (gw, gb) = split_grad(&mut g, lay, Layer::Conv2);
                gemm(c2, h2_len, k2, dz2, false, &col, false, gw, 1.0);
                for (oc, row) in dz2.chunks(h2_len).enumerate() {
                    gb[oc] += row.iter().sum::<f64>();
                }
            }
            dcol.clear();
            dcol.resize(h2_len * k2, 0.0);
            gemm(h2_len, c2, k2, dz2, true, self.w(Layer::Conv2), false, &mut dcol, 0.0);
            let mut dz1 = vec![0.0; c1 * h1_len];
            self.conv2.col2im(&dcol, c1, h1_len, &mut dz1);
            for (d, &a) in dz1.iter_mut().zip(&cache.a1[s]) {
                if a <= 0.0 {
                    *d = 0.0;
                }
            }
            // conv1
            self.conv1.im2col(&inputs[s], 1, o, &mut col);
            let (gw, gb) = split_grad(&mut g, lay, Layer::Conv1);
            gemm(c1, h1_len, TAPS, &dz1, false, &col, false, gw, 1.0);
            for (oc, row) in dz1.chunks(h1_len).enumerate() {
                gb[oc] += row.iter().sum::<f64>();
            }
        }
        (loss, g)
    }
}

fn split_grad<'g>(g: &'g mut [f64], lay: &Layout, l: Layer) -> (&'g mut [f64], &'g mut [f64]) {
    let (w, b) = (lay.weight(l), lay.bias(l));
    debug_assert_eq!(w.end, b.start);
    let (head, tail) = g[w.start..b.end].split_at_mut(w.len());
    (head, tail)
}

fn column_sums(m: &[f64], cols: usize, out: &mut [f64]) {
    out.fill(0.0);
    for row in m.chunks(cols) {
        for (o, v) in out.iter_mut().zip(row) {
            *o += v;
        }
    }
}

fn check_dims(cfg: &NetConfig, g: &VoxelGrid) -> Result<()> {
    if g.dims() != [cfg.grid_dim; 3] {
        return Err(Error::DimensionMismatch {
            expected: format!("{:?}", [cfg.grid_dim; 3]),
            actual: format!("{:?}", g.dims()),
        });
    }
    Ok(())
}

pub(crate) fn grid_values(g: &VoxelGrid) -> Vec<f64> {
    (0..g.len()).map(|i| if g.get_linear(i) { 1.0 } else { 0.0 }).collect()
}

/// Per-voxel occupancy probabilities for each input grid.
pub fn forward_batch(params: &NetParams, inputs: &[&VoxelGrid]) -> Result<Vec<ScalarGrid>> {
    for g in inputs {
        check_dims(&params.config, g)?;
    }
    let xs: Vec<Vec<f64>> = inputs.iter().map(|g| grid_values(g)).collect();
    let cache = Net::new(params).forward(&xs);
    let o = params.config.voxels();
    inputs
        .iter()
        .enumerate()
        .map(|(s, g)| ScalarGrid::new(*g.frame(), cache.p[s * o..(s + 1) * o].to_vec()))
        .collect()
}

/// Per-voxel occupancy probabilities in (0, 1), on the input's frame.
pub fn forward(params: &NetParams, input: &VoxelGrid) -> Result<ScalarGrid> {
    Ok(forward_batch(params, &[input])?.remove(0))
}

/// Mean loss and mean gradient of a batch.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchGradients {
    pub loss: f64,
    pub grads: Vec<f64>,
}

/// Exact gradient of the batch-mean voxel-mean cross-entropy with respect
/// to every parameter, in the flat parameter layout.
pub fn backward(params: &NetParams, inputs: &[&VoxelGrid], targets: &[&VoxelGrid], log_clamp: f64) -> Result<BatchGradients> {
    if inputs.len() != targets.len() || inputs.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} targets (nonempty batch)", inputs.len()),
            actual: targets.len().to_string(),
        });
    }
    for g in inputs.iter().chain(targets) {
        check_dims(&params.config, g)?;
    }
    let xs: Vec<Vec<f64>> = inputs.iter().map(|g| grid_values(g)).collect();
    let ys: Vec<Vec<f64>> = targets.iter().map(|g| grid_values(g)).collect();
    Ok(backward_values(params, &xs, &ys, log_clamp))
}

pub(crate) fn backward_values(params: &NetParams, xs: &[Vec<f64>], ys: &[Vec<f64>], log_clamp: f64) -> BatchGradients {
    let (loss, grads) = Net::new(params).backward(xs, ys, log_clamp);
    BatchGradients { loss, grads }
}
