//! Binary field snapshots.
//!
//! Layout, all little-endian: `b"GVLB"`, `u32` version, `u32` dim, `u32` n,
//! `f64` alpha, `f64` beta, `f64` t, then `n^dim` `f64` values in row-major order.

use std::path::Path;

use crate::error::{Error, Result};
use crate::spectral::{GridSpec, RealField};

pub const SNAPSHOT_MAGIC: [u8; 4] = *b"GVLB";
pub const SNAPSHOT_VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 3 * 4 + 3 * 8;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub alpha: f64,
    pub beta: f64,
    pub t: f64,
    pub field: RealField,
}

impl Snapshot {
    pub fn to_bytes(&self) -> Vec<u8> {
        let grid = self.field.grid();
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * grid.len());
        out.extend_from_slice(&SNAPSHOT_MAGIC);
        for v in [SNAPSHOT_VERSION, grid.dim() as u32, grid.n() as u32] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for v in [self.alpha, self.beta, self.t] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for v in self.field.values() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Format(format!("snapshot truncated: {} bytes", bytes.len())));
        }
        if bytes[..4] != SNAPSHOT_MAGIC {
            return Err(Error::Format("not a snapshot file (bad magic)".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
        let version = u32_at(4);
        if version != SNAPSHOT_VERSION {
            return Err(Error::Format(format!("unsupported snapshot version {version}")));
        }
        let grid = GridSpec::new(u32_at(8) as usize, u32_at(12) as usize)?;
        let expected = HEADER_LEN + 8 * grid.len();
        if bytes.len() != expected {
            return Err(Error::Format(format!(
                "snapshot size {} does not match header ({expected})",
                bytes.len()
            )));
        }
        let values = (0..grid.len()).map(|i| f64_at(HEADER_LEN + 8 * i)).collect();
        Ok(Self {
            alpha: f64_at(16),
            beta: f64_at(24),
            t: f64_at(32),
            field: RealField::new(grid, values)?,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_bytes(&bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Snapshot {
        let g = GridSpec::new(2, 8).unwrap();
        let field = RealField::from_fn(g, |x| (x[0] * 3.3).sin() * x[1].exp() + 1e-310).unwrap();
        Snapshot {
            alpha: 1.5,
            beta: 0.33,
            t: 0.1 + 0.2,
            field,
        }
    }

    #[test]
    fn round_trip_is_bit_identical() {
        let s = sample();
        let bytes = s.to_bytes();
        assert_eq!(&bytes[..4], b"GVLB");
        assert_eq!(bytes.len(), 40 + 8 * 64);
        let back = Snapshot::from_bytes(&bytes).unwrap();
        assert_eq!(back.t.to_bits(), s.t.to_bits());
        for (a, b) in back.field.values().iter().zip(s.field.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(back.to_bytes(), bytes);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rho.gvlb");
        let s = sample();
        s.write(&path).unwrap();
        assert_eq!(Snapshot::read(&path).unwrap(), s);
    }

    #[test]
    fn rejects_corruption() {
        let mut bytes = sample().to_bytes();
        assert!(Snapshot::from_bytes(&bytes[..30]).is_err());
        bytes.pop();
        assert!(Snapshot::from_bytes(&bytes).is_err());
        let mut bad = sample().to_bytes();
        bad[0] = b'X';
        assert!(Snapshot::from_bytes(&bad).is_err());
        let mut version = sample().to_bytes();
        version[4] = 9;
        assert!(Snapshot::from_bytes(&version).is_err());
    }
}
