//! Reference evaluations of `Λ^α` that share no code with the FFT path.
//!
//! [`naive_dft_oracle`] sums the Fourier series directly in `O(N²)`;
//! [`lattice_kernel_oracle`] evaluates the singular-integral representation
//!
//! ```text
//! Λ^α f(x) = C_{α,d} Σ_{ν ∈ Z^d} P.V. ∫_{T^d} (f(x) − f(y)) / |x − y − 2πν|^{d+α} dy
//! ```
//!
//! by midpoint quadrature on the collocation grid.

use std::f64::consts::PI;

use num_complex::Complex64;
use statrs::function::gamma::gamma;

use super::field::RealField;
use super::transform::check_alpha;
use crate::error::{out_of_range, Result};

/// Largest grid the quadratic-cost oracles accept.
pub const ORACLE_MAX_N: usize = 64;

fn check_oracle_grid(f: &RealField) -> Result<()> {
    let n = f.grid().n();
    if n > ORACLE_MAX_N {
        return Err(out_of_range(
            "n",
            format!("oracle limited to n <= {ORACLE_MAX_N}, got {n}"),
        ));
    }
    Ok(())
}

/// `Λ^α f` by direct summation of the discrete Fourier series.
pub fn naive_dft_oracle(f: &RealField, alpha: f64) -> Result<RealField> {
    check_alpha(alpha)?;
    check_oracle_grid(f)?;
    let grid = *f.grid();
    let n = grid.n();
    let dim = grid.dim();
    let half = n as i64 / 2;
    let wavenumbers: Vec<i64> = (-half..half).collect();

    // e^{-i k x_m} for each wavenumber k (row) and node coordinate x_m (column)
    let table: Vec<Complex64> = wavenumbers
        .iter()
        .flat_map(|&k| (0..n).map(move |m| (k, m)))
        .map(|(k, m)| Complex64::from_polar(1.0, -(k as f64) * grid.coord(m)))
        .collect();
    let twiddle = |ki: usize, m: usize| table[ki * n + m];

    let nodes: Vec<[usize; 2]> = (0..grid.len()).map(|i| grid.unravel(i)).collect();
    let modes: Vec<[usize; 2]> = match dim {
        1 => (0..n).map(|a| [a, 0]).collect(),
        _ => (0..n).flat_map(|a| (0..n).map(move |b| [a, b])).collect(),
    };
    let norm = 1.0 / grid.len() as f64;

    let mut symbol_coeffs = Vec::with_capacity(modes.len());
    for mode in &modes {
        let mut c = Complex64::new(0.0, 0.0);
        for (node, &v) in nodes.iter().zip(f.values()) {
            let mut w = Complex64::new(v, 0.0);
            for axis in 0..dim {
                w *= twiddle(mode[axis], node[axis]);
            }
            c += w;
        }
        let k2: f64 = (0..dim)
            .map(|axis| (wavenumbers[mode[axis]] as f64).powi(2))
            .sum();
        symbol_coeffs.push(c * norm * k2.powf(alpha / 2.0));
    }

    let values = nodes
        .iter()
        .map(|node| {
            let mut s = Complex64::new(0.0, 0.0);
            for (mode, c) in modes.iter().zip(&symbol_coeffs) {
                let mut w = *c;
                for axis in 0..dim {
                    // conj(e^{-ikx}) = e^{ikx}
                    w *= twiddle(mode[axis], node[axis]).conj();
                }
                s += w;
            }
            s.re
        })
        .collect();
    RealField::new(grid, values)
}

/// Normalization `C_{α,d}` that makes the singular integral's Fourier symbol exactly `|ξ|^α` on `R^d`:
///
/// `C_{α,d} = 2^α Γ((d+α)/2) / (π^{d/2} |Γ(−α/2)|)`, evaluated through
/// `|Γ(−α/2)| = Γ(1 − α/2) / (α/2)` to stay on positive arguments.
/// For `(α, d) = (1, 1)` this is `1/π`.
pub fn kernel_constant(alpha: f64, dim: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(out_of_range(
            "alpha",
            format!("kernel representation needs alpha in (0, 2), got {alpha}"),
        ));
    }
    if !(1..=3).contains(&dim) {
        return Err(out_of_range("dim", format!("must be 1, 2 or 3, got {dim}")));
    }
    let d = dim as f64;
    Ok(alpha * 2f64.powf(alpha - 1.0) * gamma((d + alpha) / 2.0)
        / (PI.powf(d / 2.0) * gamma(1.0 - alpha / 2.0)))
}

/// Result of [`lattice_kernel_oracle`] with its a-priori error estimates.
#[derive(Debug, Clone)]
pub struct KernelOracle {
    pub field: RealField,
    /// Estimated contribution of the images with `|ν|_∞ > truncation`.
    pub truncation_error: f64,
    /// Estimated contribution of the excluded singular cell.
    pub quadrature_error: f64,
}

impl KernelOracle {
    pub fn error_estimate(&self) -> f64 {
        self.truncation_error + self.quadrature_error
    }
}

fn unit_sphere_surface(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 4.0 * PI,
    }
}

/// `Λ^α f` from the truncated lattice sum of the singular kernel.
///
/// Images `ν` with `|ν|_∞ <= truncation` are summed; the cell containing the
/// singularity is excluded symmetrically (principal value).
pub fn lattice_kernel_oracle(f: &RealField, alpha: f64, truncation: usize) -> Result<KernelOracle> {
    check_oracle_grid(f)?;
    if truncation < 1 {
        return Err(out_of_range("truncation", "must be >= 1"));
    }
    let grid = *f.grid();
    let dim = grid.dim();
    let c = kernel_constant(alpha, dim)?;
    let n = grid.n();
    let h = grid.spacing();
    let power = dim as f64 + alpha;
    let t = truncation as i64;

    // Kernel summed over images, indexed by node offset modulo n per axis.
    // Offsets are taken as minimal images so the truncated window is centred
    // on the evaluation node; the offset n/2 sits at distance π on both sides
    // and is split evenly between them.
    let half = n as i64 / 2;
    let image_sum = |m: &[i64]| -> f64 {
        let mut s = 0.0;
        let mut nu = vec![-t; dim];
        loop {
            if !(m.iter().all(|&c| c == 0) && nu.iter().all(|&c| c == 0)) {
                let r2: f64 = m
                    .iter()
                    .zip(&nu)
                    .map(|(&mc, &nc)| (h * mc as f64 - 2.0 * PI * nc as f64).powi(2))
                    .sum();
                s += r2.powf(-power / 2.0);
            }
            // odometer over [-t, t]^dim
            let mut axis = 0;
            loop {
                if axis == dim {
                    return s;
                }
                nu[axis] += 1;
                if nu[axis] <= t {
                    break;
                }
                nu[axis] = -t;
                axis += 1;
            }
        }
    };
    let minimal = |m: usize| -> Vec<i64> {
        let m = m as i64;
        if m < half {
            vec![m]
        } else if m == half {
            vec![half, -half]
        } else {
            vec![m - n as i64]
        }
    };
    let kernel: Vec<f64> = (0..grid.len())
        .map(|idx| {
            let ij = grid.unravel(idx);
            let choices: Vec<Vec<i64>> = ij[..dim].iter().map(|&m| minimal(m)).collect();
            let mut total = 0.0;
            let mut count = 0usize;
            match dim {
                1 => {
                    for &a in &choices[0] {
                        total += image_sum(&[a]);
                        count += 1;
                    }
                }
                _ => {
                    for &a in &choices[0] {
                        for &b in &choices[1] {
                            total += image_sum(&[a, b]);
                            count += 1;
                        }
                    }
                }
            }
            total / count as f64
        })
        .collect();

    let values = f.values();
    let weight = c * h.powi(dim as i32);
    let out: Vec<f64> = (0..grid.len())
        .map(|i| {
            let ii = grid.unravel(i);
            let fi = values[i];
            (0..grid.len())
                .map(|j| {
                    let jj = grid.unravel(j);
                    let k = match dim {
                        1 => kernel[(ii[0] + n - jj[0]) % n],
                        _ => kernel[((ii[0] + n - jj[0]) % n) * n + (ii[1] + n - jj[1]) % n],
                    };
                    (fi - values[j]) * k
                })
                .sum::<f64>()
                * weight
        })
        .collect();

    // Far images see (2π)^d (f(x) − ⟨f⟩) through a nearly constant kernel;
    // the lattice tail is bounded by its integral S_d T^{-α}/α.
    let mean = f.mean();
    let oscillation = values.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    let sphere = unit_sphere_surface(dim);
    let truncation_error = c
        * (2.0 * PI).powi(dim as i32)
        * oscillation
        * (2.0 * PI).powf(-power)
        * sphere
        * (truncation as f64).powf(-alpha)
        / alpha;

    // Excluded cell ≈ C |Δf|/(2d) ∫_{|z|<h/2} |z|^{2-d-α} dz.
    let max_lap = (0..grid.len())
        .map(|i| {
            let ij = grid.unravel(i);
            (0..dim)
                .map(|axis| {
                    let mut up = ij;
                    let mut down = ij;
                    up[axis] = (ij[axis] + 1) % n;
                    down[axis] = (ij[axis] + n - 1) % n;
                    let flat = |p: [usize; 2]| if dim == 1 { p[0] } else { p[0] * n + p[1] };
                    (values[flat(up)] - 2.0 * values[i] + values[flat(down)]) / (h * h)
                })
                .sum::<f64>()
                .abs()
        })
        .fold(0.0, f64::max);
    let quadrature_error =
        c * max_lap / (2.0 * dim as f64) * sphere * (h / 2.0).powf(2.0 - alpha) / (2.0 - alpha);

    Ok(KernelOracle {
        field: RealField::new(grid, out)?,
        truncation_error,
        quadrature_error,
    })
}
