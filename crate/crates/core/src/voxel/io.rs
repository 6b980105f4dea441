//! `.vtg` (occupancy) and `.vtf` (scalar field) binary files.
//!
//! Layout, all little-endian: `"VTGR"`, `u32` version (1 = occupancy,
//! 2 = scalar), `u32 × 3` dims, `f32` voxel size, `f32 × 3` origin, then the
//! payload. Occupancy is `ceil(n / 8)` bytes, x-fastest, LSB-first within a
//! byte; scalar payload is `n` `f32` values in the same order.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::Point3;

use super::{GridFrame, ScalarGrid, VoxelGrid};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"VTGR";
pub const VERSION_OCCUPANCY: u32 = 1;
pub const VERSION_SCALAR: u32 = 2;
const HEADER_LEN: usize = 4 + 4 + 12 + 4 + 12;

fn write_header(out: &mut Vec<u8>, version: u32, f: &GridFrame) {
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&version.to_le_bytes());
    for d in f.dims {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    out.extend_from_slice(&(f.voxel_size as f32).to_le_bytes());
    for o in f.origin {
        out.extend_from_slice(&(o as f32).to_le_bytes());
    }
}

pub fn encode_voxel_grid(g: &VoxelGrid) -> Vec<u8> {
    let f = g.frame();
    let mut out = Vec::with_capacity(HEADER_LEN + g.len().div_ceil(8));
    write_header(&mut out, VERSION_OCCUPANCY, f);
    let mut bytes = vec![0u8; g.len().div_ceil(8)];
    for i in 0..g.len() {
        if g.get_linear(i) {
            bytes[i / 8] |= 1 << (i % 8);
        }
    }
    out.extend_from_slice(&bytes);
    out
}

pub fn encode_scalar_grid(g: &ScalarGrid) -> Vec<u8> {
    let f = g.frame();
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * f.len());
    write_header(&mut out, VERSION_SCALAR, f);
    for &v in g.values() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

fn parse_header(bytes: &[u8]) -> std::result::Result<(u32, GridFrame), String> {
    if bytes.len() < HEADER_LEN {
        return Err("file shorter than header".into());
    }
    if &bytes[0..4] != MAGIC {
        return Err("bad magic".into());
    }
    let u = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let f = |o: usize| f32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as f64;
    let version = u(4);
    let dims = [u(8) as usize, u(12) as usize, u(16) as usize];
    let frame = GridFrame::new(dims, f(20), Point3::new(f(24), f(28), f(32))).map_err(|e| e.to_string())?;
    Ok((version, frame))
}

pub fn decode_voxel_grid(bytes: &[u8]) -> std::result::Result<VoxelGrid, String> {
    let (version, frame) = parse_header(bytes)?;
    if version != VERSION_OCCUPANCY {
        return Err(format!("expected occupancy version {VERSION_OCCUPANCY}, got {version}"));
    }
    let n = frame.len();
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != n.div_ceil(8) {
        return Err(format!("payload is {} bytes, expected {}", payload.len(), n.div_ceil(8)));
    }
    let mut g = VoxelGrid::empty(frame);
    for i in 0..n {
        if payload[i / 8] >> (i % 8) & 1 == 1 {
            g.set_linear(i, true);
        }
    }
    Ok(g)
}

pub fn decode_scalar_grid(bytes: &[u8]) -> std::result::Result<ScalarGrid, String> {
    let (version, frame) = parse_header(bytes)?;
    if version != VERSION_SCALAR {
        return Err(format!("expected scalar version {VERSION_SCALAR}, got {version}"));
    }
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != 4 * frame.len() {
        return Err(format!("payload is {} bytes, expected {}", payload.len(), 4 * frame.len()));
    }
    let values = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    ScalarGrid::new(frame, values).map_err(|e| e.to_string())
}

pub fn write_vtg(path: &Path, g: &VoxelGrid) -> Result<()> {
    std::fs::File::create(path)?.write_all(&encode_voxel_grid(g))?;
    Ok(())
}

pub fn read_vtg(path: &Path) -> Result<VoxelGrid> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode_voxel_grid(&bytes).map_err(|r| Error::format(path, r))
}

pub fn write_vtf(path: &Path, g: &ScalarGrid) -> Result<()> {
    std::fs::File::create(path)?.write_all(&encode_scalar_grid(g))?;
    Ok(())
}

pub fn read_vtf(path: &Path) -> Result<ScalarGrid> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode_scalar_grid(&bytes).map_err(|r| Error::format(path, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn byte_layout_is_fixed() {
        let f = GridFrame::new([3, 1, 1], 0.5, Point3::new(1.0, 2.0, 3.0)).unwrap();
        let mut g = VoxelGrid::empty(f);
        g.set([0, 0, 0], true);
        g.set([2, 0, 0], true);
        let b = encode_voxel_grid(&g);
        assert_eq!(&b[0..4], b"VTGR");
        assert_eq!(&b[4..8], &1u32.to_le_bytes());
        assert_eq!(&b[8..12], &3u32.to_le_bytes());
        assert_eq!(&b[20..24], &0.5f32.to_le_bytes());
        assert_eq!(&b[24..28], &1.0f32.to_le_bytes());
        assert_eq!(b.len(), HEADER_LEN + 1);
        assert_eq!(b[HEADER_LEN], 0b101);
    }

    #[test]
    fn version_and_truncation_checked() {
        let f = GridFrame::new([2, 2, 2], 0.5, Point3::origin()).unwrap();
        let s = ScalarGrid::constant(f, 0.25);
        let bytes = encode_scalar_grid(&s);
        assert!(decode_voxel_grid(&bytes).is_err());
        assert_eq!(decode_scalar_grid(&bytes).unwrap(), s);
        assert!(decode_scalar_grid(&bytes[..bytes.len() - 1]).is_err());
        assert!(decode_voxel_grid(b"VTGX").is_err());
    }

    proptest! {
        #[test]
        fn occupancy_roundtrip(dims in prop::array::uniform3(1usize..7), seed in any::<u64>()) {
            let f = GridFrame::new(dims, 0.25, Point3::new(-1.0, 0.5, 2.0)).unwrap();
            let mut state = seed | 1;
            let g = VoxelGrid::from_fn(f, |_| {
                state ^= state << 13; state ^= state >> 7; state ^= state << 17;
                state & 1 == 1
            });
            let back = decode_voxel_grid(&encode_voxel_grid(&g)).unwrap();
            prop_assert!(back.frame().aligned_with(g.frame()));
            prop_assert_eq!(back.iter_occupied().collect::<Vec<_>>(), g.iter_occupied().collect::<Vec<_>>());
        }
    }
}
