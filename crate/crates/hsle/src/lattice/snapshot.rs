//! Portable configuration snapshots.
//!
//! Layout: a 16-byte header, the number of stored states (u32 little-endian),
//! then the bit-packed states in row-major order (spins: one bit per slot, 1 for ⊕; bonds: one bit per edge in
//! [`LatticeQuad::edges`](super::LatticeQuad::edges) order, 1 for open). Bits
//! fill each byte from the least significant end.
//!
//! | bytes  | field                      |
//! |--------|----------------------------|
//! | 0..4   | magic `HSLC`               |
//! | 4..8   | width, u32 little-endian   |
//! | 8..12  | height, u32 little-endian  |
//! | 12     | model: 0 spins, 1 bonds    |
//! | 13     | format version (1)         |
//! | 14..16 | reserved, zero             |

use std::io::{Read, Write};

use super::{BondConfig, SpinConfig};
use crate::error::{Error, Result};

pub const SNAPSHOT_MAGIC: [u8; 4] = *b"HSLC";
const VERSION: u8 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Snapshot {
    Spin(SpinConfig),
    Bond(BondConfig),
}

fn pack(bits: impl Iterator<Item = bool>) -> Vec<u8> {
    let mut out = Vec::new();
    for (k, b) in bits.enumerate() {
        if k % 8 == 0 {
            out.push(0);
        }
        if b {
            *out.last_mut().unwrap() |= 1 << (k % 8);
        }
    }
    out
}

pub fn write_snapshot<W: Write>(mut w: W, snap: &Snapshot) -> Result<()> {
    let (width, height, model, body) = match snap {
        Snapshot::Spin(c) => (c.width, c.height, 0u8, pack(c.spins.iter().map(|&s| s > 0))),
        Snapshot::Bond(c) => (c.width, c.height, 1u8, pack(c.open.iter().cloned())),
    };
    let mut header = [0u8; 16];
    header[..4].copy_from_slice(&SNAPSHOT_MAGIC);
    header[4..8].copy_from_slice(&(width as u32).to_le_bytes());
    header[8..12].copy_from_slice(&(height as u32).to_le_bytes());
    header[12] = model;
    header[13] = VERSION;
    let count = match snap {
        Snapshot::Spin(c) => c.spins.len(),
        Snapshot::Bond(c) => c.open.len(),
    };
    w.write_all(&header)?;
    w.write_all(&(count as u32).to_le_bytes())?;
    w.write_all(&body)?;
    Ok(())
}

/// Reads a snapshot. Spin slots read back as ±1; masked-out slots of a
/// non-rectangular quad come back as −1 and must be re-masked by the caller.
pub fn read_snapshot<R: Read>(mut r: R) -> Result<Snapshot> {
    let mut header = [0u8; 16];
    r.read_exact(&mut header)?;
    if header[..4] != SNAPSHOT_MAGIC || header[13] != VERSION {
        return Err(Error::Domain("not a version-1 snapshot".into()));
    }
    let width = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    let height = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
    let mut n = [0u8; 4];
    r.read_exact(&mut n)?;
    let count = u32::from_le_bytes(n) as usize;
    let mut body = vec![0u8; count.div_ceil(8)];
    r.read_exact(&mut body)?;
    let bit = |k: usize| body[k / 8] >> (k % 8) & 1 == 1;
    match header[12] {
        0 => Ok(Snapshot::Spin(SpinConfig { width, height, spins: (0..count).map(|k| if bit(k) { 1 } else { -1 }).collect() })),
        1 => Ok(Snapshot::Bond(BondConfig { width, height, open: (0..count).map(bit).collect() })),
        m => Err(Error::Domain(format!("unknown snapshot model {m}"))),
    }
}

/// Plain PBM (P1) picture of a spin configuration, top row first; ⊖ is black.
pub fn write_pbm<W: Write>(mut w: W, cfg: &SpinConfig) -> Result<()> {
    writeln!(w, "P1\n{} {}", cfg.width, cfg.height)?;
    for j in (0..cfg.height).rev() {
        let row: Vec<&str> = (0..cfg.width).map(|i| if cfg.get(i, j) < 0 { "1" } else { "0" }).collect();
        writeln!(w, "{}", row.join(" "))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let spins = SpinConfig { width: 3, height: 3, spins: vec![1, -1, -1, 1, 1, 1, -1, -1, 1] };
        let bonds = BondConfig { width: 3, height: 3, open: (0..12).map(|k| k % 3 == 0).collect() };
        for snap in [Snapshot::Spin(spins.clone()), Snapshot::Bond(bonds)] {
            let mut buf = Vec::new();
            write_snapshot(&mut buf, &snap).unwrap();
            assert_eq!(&buf[..4], b"HSLC");
            assert_eq!(read_snapshot(&buf[..]).unwrap(), snap);
        }
        let mut pbm = Vec::new();
        write_pbm(&mut pbm, &spins).unwrap();
        assert_eq!(String::from_utf8(pbm).unwrap(), "P1\n3 3\n1 1 0\n0 0 0\n0 1 1\n");
    }
}
