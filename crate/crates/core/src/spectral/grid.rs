use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Equispaced periodic collocation grid on `[-π, π)^dim`.
///
/// Fields on the grid are stored row-major: in 2D the flat index of node
/// `(i, j)` is `i * n + j`, with `i` running along `x` and `j` along `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridSpec {
    dim: usize,
    n: usize,
}

impl GridSpec {
    pub const MIN_POINTS: usize = 8;

    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dim must be 1 or 2, got {dim}")));
        }
        if n < Self::MIN_POINTS || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be even and >= {}, got {n}",
                Self::MIN_POINTS
            )));
        }
        Ok(Self { dim, n })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Period of every axis.
    pub fn length(&self) -> f64 {
        2.0 * PI
    }

    /// Total number of nodes, `n^dim`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.length() / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn volume(&self) -> f64 {
        self.length().powi(self.dim as i32)
    }

    /// Coordinate of node `k` along any axis: `2πk/n − π`.
    pub fn coord(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.n as f64 - PI
    }

    /// Per-axis node indices of a flat index.
    pub fn unravel(&self, index: usize) -> [usize; 2] {
        match self.dim {
            1 => [index, 0],
            _ => [index / self.n, index % self.n],
        }
    }

    /// Coordinates of the node at a flat index (only the first `dim` entries are used).
    pub fn node(&self, index: usize) -> Vec<f64> {
        let ij = self.unravel(index);
        ij[..self.dim].iter().map(|&k| self.coord(k)).collect()
    }

    /// Signed integer wavenumber stored at FFT position `k`, in `{-n/2, …, n/2-1}`.
    pub fn wavenumber(&self, k: usize) -> i64 {
        let n = self.n as i64;
        let k = k as i64;
        if k < n / 2 {
            k
        } else {
            k - n
        }
    }

    /// Wavevector at a flat spectral index.
    pub fn wavevector(&self, index: usize) -> Vec<i64> {
        let ij = self.unravel(index);
        ij[..self.dim].iter().map(|&k| self.wavenumber(k)).collect()
    }

    /// Flat spectral index of a wavevector, if every component is representable.
    pub fn spectral_index(&self, xi: &[i64]) -> Option<usize> {
        if xi.len() != self.dim {
            return None;
        }
        let n = self.n as i64;
        let mut index = 0usize;
        for &c in xi {
            if c < -n / 2 || c >= n / 2 {
                return None;
            }
            index = index * self.n + c.rem_euclid(n) as usize;
        }
        Some(index)
    }

    /// Largest retained wavenumber under the 2/3 rule: products of fields
    /// band-limited to `|ξ_j| <= K` alias only outside that band when `3K < n`.
    pub fn dealias_cutoff(&self) -> i64 {
        (self.n as i64 - 1) / 3
    }
}
