//! Checkpoint files.
//!
//! Layout: the magic `VTCK`, a little-endian `u32` header length, a UTF-8
//! JSON header, then every parameter as a little-endian `f32` in flat
//! layer order (conv1 weights, conv1 biases, conv2 ..., dense2 biases).

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{InputMode, NetConfig, TrainConfig};
use super::params::NetParams;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"VTCK";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub net_cfg: NetConfig,
    pub train_cfg: TrainConfig,
    pub mode: InputMode,
    pub epoch: usize,
    #[serde(default)]
    pub metrics: serde_json::Value,
    pub param_count: usize,
}

#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub header: CheckpointHeader,
    pub params: NetParams,
}

impl Checkpoint {
    pub fn new(params: NetParams, train_cfg: TrainConfig, mode: InputMode, epoch: usize, metrics: serde_json::Value) -> Self {
        Self {
            header: CheckpointHeader {
                net_cfg: params.config,
                train_cfg,
                mode,
                epoch,
                metrics,
                param_count: params.len(),
            },
            params,
        }
    }

    pub fn encode(&self) -> Result<Vec<u8>> {
        let header = serde_json::to_vec(&self.header)?;
        let mut out = Vec::with_capacity(8 + header.len() + 4 * self.params.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(header.len() as u32).to_le_bytes());
        out.extend_from_slice(&header);
        for &v in &self.params.values {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
        Ok(out)
    }

    pub fn decode(bytes: &[u8], origin: &Path) -> Result<Self> {
        let bad = |reason: &str| Error::format(origin, reason);
        if bytes.len() < 8 || &bytes[..4] != MAGIC {
            return Err(bad("missing VTCK magic"));
        }
        let hlen = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
        let body = bytes.get(8..8 + hlen).ok_or_else(|| bad("truncated header"))?;
        let header: CheckpointHeader = serde_json::from_slice(body).map_err(|e| bad(&format!("header: {e}")))?;
        header.net_cfg.validate()?;
        let blob = &bytes[8 + hlen..];
        let mut params = NetParams::zeros(header.net_cfg)?;
        if header.param_count != params.len() || blob.len() != 4 * params.len() {
            return Err(bad(&format!(
                "expected {} parameters, header says {} and blob holds {} bytes",
                params.len(),
                header.param_count,
                blob.len()
            )));
        }
        for (dst, chunk) in params.values.iter_mut().zip(blob.chunks_exact(4)) {
            let v = f32::from_le_bytes(chunk.try_into().unwrap());
            if !v.is_finite() {
                return Err(bad("non-finite parameter"));
            }
            *dst = v as f64;
        }
        Ok(Self { header, params })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path.as_ref())?);
        f.write_all(&self.encode()?)?;
        f.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path.as_ref())?.read_to_end(&mut bytes)?;
        Self::decode(&bytes, path.as_ref())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_rounds_to_f32() {
        let p = NetParams::init(NetConfig::new(4), 9).unwrap();
        let ck = Checkpoint::new(p.clone(), TrainConfig::default(), InputMode::TactileAndDepth, 3, serde_json::json!({"loss": 0.5}));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.vtck");
        ck.save(&path).unwrap();
        let back = Checkpoint::load(&path).unwrap();
        assert_eq!(back.header, ck.header);
        for (a, b) in back.params.values.iter().zip(&p.values) {
            assert_eq!(*a, *b as f32 as f64);
        }
    }

    #[test]
    fn rejects_truncated_blob() {
        let p = NetParams::init(NetConfig::new(4), 1).unwrap();
        let ck = Checkpoint::new(p, TrainConfig::default(), InputMode::DepthOnly, 0, serde_json::Value::Null);
        let mut bytes = ck.encode().unwrap();
        bytes.pop();
        assert!(Checkpoint::decode(&bytes, Path::new("x")).is_err());
        bytes[0] = b'X';
        assert!(Checkpoint::decode(&bytes, Path::new("x")).is_err());
    }
}
