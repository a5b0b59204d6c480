use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::field::{RealField, SpectralField};
use super::grid::GridSpec;
use crate::error::{out_of_range, Error, Result};

/// Fast-transform backend and spectral operators for one grid.
///
/// Plans and symbol tables are built once and shared read-only; every
/// transform allocates its own buffers, so a `Spectral` can be used from
/// several threads at once.
#[derive(Clone)]
pub struct Spectral {
    grid: GridSpec,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// `|ξ|²` in FFT order.
    k2: Vec<f64>,
    /// `ξ_j` per axis with the Nyquist component zeroed (odd-order symbols).
    deriv: Vec<Vec<f64>>,
    /// `(-1)^{ξ_1 + … + ξ_d}`: shifts between the FFT origin and the `x = -π` grid origin.
    phase: Vec<f64>,
    /// 1 inside the 2/3-rule box, 0 outside.
    dealias: Vec<f64>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 2.0 {
        Ok(())
    } else {
        Err(out_of_range("alpha", format!("must lie in (0, 2], got {alpha}")))
    }
}

impl Spectral {
    pub fn new(grid: GridSpec) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid.n());
        let inverse = planner.plan_fft_inverse(grid.n());
        let nyquist = -(grid.n() as i64) / 2;
        let cutoff = grid.dealias_cutoff();

        let len = grid.len();
        let mut k2 = Vec::with_capacity(len);
        let mut deriv = vec![Vec::with_capacity(len); grid.dim()];
        let mut phase = Vec::with_capacity(len);
        let mut dealias = Vec::with_capacity(len);
        for idx in 0..len {
            let xi = grid.wavevector(idx);
            k2.push(xi.iter().map(|&c| (c * c) as f64).sum());
            for (axis, &c) in xi.iter().enumerate() {
                deriv[axis].push(if c == nyquist { 0.0 } else { c as f64 });
            }
            phase.push(if xi.iter().sum::<i64>().rem_euclid(2) == 0 {
                1.0
            } else {
                -1.0
            });
            dealias.push(if xi.iter().all(|c| c.abs() <= cutoff) {
                1.0
            } else {
                0.0
            });
        }

        Self {
            grid,
            forward,
            inverse,
            k2,
            deriv,
            phase,
            dealias,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub(crate) fn k2(&self) -> &[f64] {
        &self.k2
    }

    pub(crate) fn deriv_symbol(&self, axis: usize) -> &[f64] {
        &self.deriv[axis]
    }

    pub(crate) fn dealias_mask(&self) -> &[f64] {
        &self.dealias
    }

    /// `|ξ|^α` in FFT order.
    pub fn fractional_symbol(&self, alpha: f64) -> Vec<f64> {
        self.k2.iter().map(|&k| k.powf(alpha / 2.0)).collect()
    }

    fn run(&self, plan: &Arc<dyn Fft<f64>>, buf: &mut [Complex64]) {
        let n = self.grid.n();
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        // rows (the contiguous axis); in 1D this is the whole transform
        plan.process_with_scratch(buf, &mut scratch);
        if self.grid.dim() == 2 {
            transpose_square(buf, n);
            plan.process_with_scratch(buf, &mut scratch);
            transpose_square(buf, n);
        }
    }

    /// Coefficients relative to the FFT origin (node 0), divided by `n^dim`.
    pub(crate) fn forward_raw(&self, values: &[f64]) -> Vec<Complex64> {
        let scale = 1.0 / self.grid.len() as f64;
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.run(&self.forward, &mut buf);
        for c in &mut buf {
            *c *= scale;
        }
        buf
    }

    /// Nodal values (real part) of raw coefficients.
    pub(crate) fn inverse_raw(&self, mut coeffs: Vec<Complex64>) -> Vec<f64> {
        self.run(&self.inverse, &mut coeffs);
        coeffs.into_iter().map(|c| c.re).collect()
    }

    /// `symbol[i] * hat[i]`.
    pub(crate) fn times_symbol(hat: &[Complex64], symbol: &[f64]) -> Vec<Complex64> {
        hat.iter().zip(symbol).map(|(c, s)| c * s).collect()
    }

    /// `i * symbol[i] * hat[i]`.
    pub(crate) fn times_i_symbol(hat: &[Complex64], symbol: &[f64]) -> Vec<Complex64> {
        hat.iter()
            .zip(symbol)
            .map(|(c, s)| Complex64::new(-c.im * s, c.re * s))
            .collect()
    }

    /// Inverse transform of `symbol[i] * hat[i]` for a real symbol.
    pub(crate) fn apply_real(&self, hat: &[Complex64], symbol: &[f64]) -> Vec<f64> {
        self.inverse_raw(Self::times_symbol(hat, symbol))
    }

    /// Inverse transform of `i * symbol[i] * hat[i]`.
    pub(crate) fn apply_imag(&self, hat: &[Complex64], symbol: &[f64]) -> Vec<f64> {
        self.inverse_raw(Self::times_i_symbol(hat, symbol))
    }

    /// Inverse transforms of spectra of real fields, two per complex FFT:
    /// `a + i b` transforms to `F⁻¹a + i F⁻¹b` when both are Hermitian.
    pub(crate) fn inverse_real_batch(&self, spectra: Vec<Vec<Complex64>>) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(spectra.len());
        let mut it = spectra.into_iter();
        while let Some(mut a) = it.next() {
            match it.next() {
                Some(b) => {
                    for (x, y) in a.iter_mut().zip(&b) {
                        *x += Complex64::new(-y.im, y.re);
                    }
                    self.run(&self.inverse, &mut a);
                    out.push(a.iter().map(|c| c.re).collect());
                    out.push(a.iter().map(|c| c.im).collect());
                }
                None => out.push(self.inverse_raw(a)),
            }
        }
        out
    }

    /// Raw coefficients of the zero-mean potential `T(f)`: `-f̂/|ξ|²`, zero at `ξ = 0`.
    pub(crate) fn potential_hat(&self, hat: &[Complex64]) -> Vec<Complex64> {
        hat.iter()
            .zip(&self.k2)
            .map(|(c, &k2)| if k2 == 0.0 { Complex64::new(0.0, 0.0) } else { -c / k2 })
            .collect()
    }

    fn check_grid(&self, f: &RealField) -> Result<()> {
        if f.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    pub fn forward_transform(&self, f: &RealField) -> Result<SpectralField> {
        self.check_grid(f)?;
        let mut coeffs = self.forward_raw(f.values());
        for (c, p) in coeffs.iter_mut().zip(&self.phase) {
            *c *= p;
        }
        SpectralField::new(self.grid, coeffs)
    }

    pub fn inverse_transform(&self, s: &SpectralField) -> Result<RealField> {
        if s.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        let coeffs = s
            .coeffs()
            .iter()
            .zip(&self.phase)
            .map(|(c, p)| c * p)
            .collect();
        RealField::new(self.grid, self.inverse_raw(coeffs))
    }

    /// `Λ^α f`: multiplies by `|ξ|^α`, annihilating the mean.
    pub fn fractional_laplacian(&self, f: &RealField, alpha: f64) -> Result<RealField> {
        check_alpha(alpha)?;
        self.check_grid(f)?;
        let hat = self.forward_raw(f.values());
        RealField::new(self.grid, self.apply_real(&hat, &self.fractional_symbol(alpha)))
    }

    /// `T(f)`: the zero-mean solution of `ΔU = f − ⟨f⟩`.
    pub fn solve_potential(&self, f: &RealField) -> Result<RealField> {
        self.check_grid(f)?;
        let hat = self.forward_raw(f.values());
        RealField::new(self.grid, self.inverse_raw(self.potential_hat(&hat)))
    }

    /// One derivative per axis, `i ξ_j f̂` with the Nyquist mode dropped.
    pub fn gradient(&self, f: &RealField) -> Result<Vec<RealField>> {
        self.check_grid(f)?;
        let hat = self.forward_raw(f.values());
        (0..self.grid.dim())
            .map(|axis| RealField::new(self.grid, self.apply_imag(&hat, &self.deriv[axis])))
            .collect()
    }

    /// Classical Laplacian `Δf` (symbol `-|ξ|²`).
    pub fn laplacian(&self, f: &RealField) -> Result<RealField> {
        self.check_grid(f)?;
        let hat = self.forward_raw(f.values());
        let symbol: Vec<f64> = self.k2.iter().map(|k| -k).collect();
        RealField::new(self.grid, self.apply_real(&hat, &symbol))
    }

    /// Divergence of a vector field given as one component per axis.
    pub fn divergence(&self, components: &[RealField]) -> Result<RealField> {
        if components.len() != self.grid.dim() {
            return Err(Error::LengthMismatch {
                expected: self.grid.dim(),
                got: components.len(),
            });
        }
        let mut out = vec![0.0; self.grid.len()];
        for (axis, comp) in components.iter().enumerate() {
            self.check_grid(comp)?;
            let hat = self.forward_raw(comp.values());
            for (o, d) in out.iter_mut().zip(self.apply_imag(&hat, &self.deriv[axis])) {
                *o += d;
            }
        }
        RealField::new(self.grid, out)
    }

    /// Projects a field onto the 2/3-rule band.
    pub fn truncate(&self, f: &RealField) -> Result<RealField> {
        self.check_grid(f)?;
        let hat = self.forward_raw(f.values());
        RealField::new(self.grid, self.apply_real(&hat, &self.dealias))
    }
}

fn transpose_square(buf: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}
