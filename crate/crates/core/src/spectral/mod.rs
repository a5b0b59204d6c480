//! Collocation grids, Fourier transforms and the spectral operators
//! `Λ^α`, `∇` and `T` on the periodic torus `[-π, π)^d`.
//!
//! [`Spectral`] holds the FFT plans for one grid and is what the solver
//! uses. The free functions below build one on the fly and are meant for
//! one-off evaluations.

mod field;
mod grid;
pub mod oracle;
mod transform;

pub use field::{RealField, SpectralField};
pub use grid::GridSpec;
pub use oracle::{kernel_constant, lattice_kernel_oracle, naive_dft_oracle, KernelOracle};
pub use transform::Spectral;

pub(crate) use field::check_finite;
pub(crate) use transform::check_alpha;

use crate::error::Result;

pub fn forward_transform(f: &RealField) -> Result<SpectralField> {
    Spectral::new(*f.grid()).forward_transform(f)
}

pub fn inverse_transform(s: &SpectralField) -> Result<RealField> {
    Spectral::new(*s.grid()).inverse_transform(s)
}

pub fn fractional_laplacian(f: &RealField, alpha: f64) -> Result<RealField> {
    Spectral::new(*f.grid()).fractional_laplacian(f, alpha)
}

pub fn solve_potential(f: &RealField) -> Result<RealField> {
    Spectral::new(*f.grid()).solve_potential(f)
}

pub fn gradient(f: &RealField) -> Result<Vec<RealField>> {
    Spectral::new(*f.grid()).gradient(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(dim: usize, n: usize) -> GridSpec {
        GridSpec::new(dim, n).unwrap()
    }

    fn random_field(g: GridSpec, seed: u64) -> RealField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        RealField::new(g, v).unwrap()
    }

    #[test]
    fn cosine_has_half_coefficients_at_plus_minus_one() {
        let g = grid(1, 16);
        let f = RealField::from_fn(g, |x| x[0].cos()).unwrap();
        let s = forward_transform(&f).unwrap();
        for (xi, c) in s.modes() {
            let expected = if xi[0].abs() == 1 { 0.5 } else { 0.0 };
            assert!((c - Complex64::new(expected, 0.0)).norm() < 1e-15, "{xi:?} {c}");
        }
    }

    #[test]
    fn constant_maps_to_zero_mode() {
        let g = grid(2, 8);
        let s = forward_transform(&RealField::constant(g, 1.0).unwrap()).unwrap();
        assert!((s.coeff(&[0, 0]) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let rest: f64 = s.modes().filter(|(xi, _)| xi != &[0, 0]).map(|(_, c)| c.norm()).sum();
        assert!(rest < 1e-14);
    }

    #[test]
    fn sine_coefficients_carry_grid_offset() {
        // sin x = (e^{ix} - e^{-ix}) / 2i
        let g = grid(1, 16);
        let s = forward_transform(&RealField::from_fn(g, |x| x[0].sin()).unwrap()).unwrap();
        assert!((s.coeff(&[1]) - Complex64::new(0.0, -0.5)).norm() < 1e-15);
        assert!((s.coeff(&[-1]) - Complex64::new(0.0, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn round_trip_random_fields() {
        for (dim, n) in [(1, 16), (2, 16), (1, 64), (2, 32)] {
            let f = random_field(grid(dim, n), 7);
            let back = inverse_transform(&forward_transform(&f).unwrap()).unwrap();
            let err = f.max_abs_diff(&back).unwrap() / f.max_abs();
            assert!(err < 1e-12, "dim {dim} n {n}: {err}");
        }
    }

    #[test]
    fn hermitian_symmetry_including_nyquist() {
        for dim in [1, 2] {
            let g = grid(dim, 16);
            let s = forward_transform(&random_field(g, 3)).unwrap();
            for (xi, c) in s.modes() {
                // -ξ with the Nyquist component wrapped onto itself
                let mirrored: Vec<i64> = xi
                    .iter()
                    .map(|&k| if k == -8 { -8 } else { -k })
                    .collect();
                assert!((s.coeff(&mirrored) - c.conj()).norm() < 1e-15, "{xi:?}");
            }
        }
    }

    #[test]
    fn mean_is_zero_coefficient() {
        let f = random_field(grid(2, 16), 11);
        let s = forward_transform(&f).unwrap();
        assert!((s.coeff(&[0, 0]).re - f.mean()).abs() < 1e-15);
    }

    #[test]
    fn fractional_laplacian_examples() {
        let g = grid(1, 16);
        let cos1 = RealField::from_fn(g, |x| x[0].cos()).unwrap();
        let out = fractional_laplacian(&cos1, 1.0).unwrap();
        assert!(out.max_abs_diff(&cos1).unwrap() < 1e-14);

        let cos2 = RealField::from_fn(g, |x| (2.0 * x[0]).cos()).unwrap();
        let expected = RealField::from_fn(g, |x| 2f64.powf(1.5) * (2.0 * x[0]).cos()).unwrap();
        let out = fractional_laplacian(&cos2, 1.5).unwrap();
        assert!(out.max_abs_diff(&expected).unwrap() < 1e-13);

        let g2 = grid(2, 16);
        let s = RealField::from_fn(g2, |x| x[0].sin() + x[1].sin()).unwrap();
        let out = fractional_laplacian(&s, 2.0).unwrap();
        assert!(out.max_abs_diff(&s).unwrap() < 1e-13);
    }

    #[test]
    fn fractional_laplacian_rejects_alpha_out_of_range() {
        let f = RealField::constant(grid(1, 8), 1.0).unwrap();
        for alpha in [0.0, -1.0, 2.5, f64::NAN] {
            assert!(matches!(
                fractional_laplacian(&f, alpha),
                Err(Error::OutOfRange { name: "alpha", .. })
            ));
        }
    }

    #[test]
    fn potential_examples() {
        let g = grid(1, 16);
        let cos = RealField::from_fn(g, |x| x[0].cos()).unwrap();
        let minus_cos = RealField::from_fn(g, |x| -x[0].cos()).unwrap();
        assert!(solve_potential(&cos).unwrap().max_abs_diff(&minus_cos).unwrap() < 1e-15);

        let c = RealField::constant(g, 4.2).unwrap();
        assert!(solve_potential(&c).unwrap().max_abs() < 1e-15);

        let shifted = RealField::from_fn(g, |x| x[0].cos() + 3.0).unwrap();
        assert!(solve_potential(&shifted).unwrap().max_abs_diff(&minus_cos).unwrap() < 1e-14);
    }

    #[test]
    fn potential_has_zero_mean_and_inverts_laplacian() {
        let g = grid(2, 16);
        let f = random_field(g, 5);
        let sp = Spectral::new(g);
        let u = sp.solve_potential(&f).unwrap();
        assert!(u.mean().abs() < 1e-15);
        let lap = sp.laplacian(&u).unwrap();
        let centered =
            RealField::new(g, f.values().iter().map(|v| v - f.mean()).collect()).unwrap();
        // exact only off the Nyquist lines, where Δ and T are both diagonal
        let band = sp.truncate(&centered).unwrap();
        let lap_band = sp.truncate(&lap).unwrap();
        assert!(lap_band.max_abs_diff(&band).unwrap() < 1e-13);
    }

    #[test]
    fn gradient_examples() {
        let g = grid(1, 16);
        let d = gradient(&RealField::from_fn(g, |x| x[0].sin()).unwrap()).unwrap();
        let cos = RealField::from_fn(g, |x| x[0].cos()).unwrap();
        assert!(d[0].max_abs_diff(&cos).unwrap() < 1e-12);

        let d = gradient(&RealField::constant(g, 5.0).unwrap()).unwrap();
        assert!(d[0].max_abs() < 1e-15);

        let g2 = grid(2, 16);
        let f = RealField::from_fn(g2, |x| x[0].cos() * x[1].cos()).unwrap();
        let d = gradient(&f).unwrap();
        let dx = RealField::from_fn(g2, |x| -x[0].sin() * x[1].cos()).unwrap();
        let dy = RealField::from_fn(g2, |x| -x[0].cos() * x[1].sin()).unwrap();
        assert!(d[0].max_abs_diff(&dx).unwrap() < 1e-12);
        assert!(d[1].max_abs_diff(&dy).unwrap() < 1e-12);
    }

    #[test]
    fn gradient_drops_nyquist_mode() {
        // cos(n/2 · x) alternates sign node to node; its odd derivative is zero
        let g = grid(1, 16);
        let f = RealField::from_fn(g, |x| (8.0 * x[0]).cos()).unwrap();
        assert!(gradient(&f).unwrap()[0].max_abs() < 1e-13);
    }

    #[test]
    fn grid_mismatch_rejected() {
        let sp = Spectral::new(grid(1, 16));
        let f = RealField::constant(grid(1, 8), 1.0).unwrap();
        assert_eq!(sp.gradient(&f).unwrap_err(), Error::GridMismatch);
    }

    #[test]
    fn naive_oracle_matches_fast_path() {
        for (dim, n) in [(1, 8), (1, 16), (1, 32), (2, 8), (2, 16)] {
            let f = random_field(grid(dim, n), 21);
            for alpha in [0.5, 1.0, 1.5, 2.0] {
                let fast = fractional_laplacian(&f, alpha).unwrap();
                let slow = naive_dft_oracle(&f, alpha).unwrap();
                let err = fast.max_abs_diff(&slow).unwrap();
                assert!(err < 1e-11, "dim {dim} n {n} alpha {alpha}: {err}");
            }
        }
    }

    #[test]
    fn naive_oracle_examples_and_guard() {
        let g = grid(1, 16);
        let f = RealField::from_fn(g, |x| (3.0 * x[0]).cos()).unwrap();
        let expected = RealField::from_fn(g, |x| 3f64.sqrt() * (3.0 * x[0]).cos()).unwrap();
        assert!(naive_dft_oracle(&f, 0.5).unwrap().max_abs_diff(&expected).unwrap() < 1e-13);

        let one = RealField::constant(g, 1.0).unwrap();
        assert!(naive_dft_oracle(&one, 1.3).unwrap().max_abs() < 1e-13);

        let big = RealField::constant(grid(1, 128), 1.0).unwrap();
        assert!(naive_dft_oracle(&big, 1.0).is_err());
    }

    #[test]
    fn kernel_constant_one_one_is_inverse_pi() {
        assert!((kernel_constant(1.0, 1).unwrap() - 1.0 / std::f64::consts::PI).abs() < 1e-14);
        assert!(kernel_constant(2.0, 1).is_err());
        assert!(kernel_constant(1.0, 2).unwrap() > 0.0);
    }

    #[test]
    fn lattice_oracle_constant_and_symmetry() {
        let g = grid(1, 16);
        let one = RealField::constant(g, 1.0).unwrap();
        for t in [1, 3, 10] {
            assert_eq!(lattice_kernel_oracle(&one, 1.0, t).unwrap().field.max_abs(), 0.0);
        }
        // even about x = 0: node k and node n - k are mirror images
        let f = RealField::from_fn(g, |x| (-x[0] * x[0]).exp() + 0.3 * (2.0 * x[0]).cos()).unwrap();
        let out = lattice_kernel_oracle(&f, 0.7, 5).unwrap().field;
        for k in 1..16 {
            let a = out.values()[k];
            let b = out.values()[16 - k];
            assert!((a - b).abs() < 1e-12, "node {k}: {a} vs {b}");
        }
        assert!(lattice_kernel_oracle(&one, 2.0, 3).is_err());
        assert!(lattice_kernel_oracle(&one, 1.0, 0).is_err());
    }

    // Convergence study behind the 5e-2 tolerance used for cos x, α = 1, T = 50:
    // the error is dominated by the excluded singular cell and falls ~linearly in h.
    #[test]
    fn lattice_oracle_converges_to_spectral_eigenvalue() {
        let mut errors = Vec::new();
        for n in [16, 32, 64] {
            let g = grid(1, n);
            let f = RealField::from_fn(g, |x| x[0].cos()).unwrap();
            let res = lattice_kernel_oracle(&f, 1.0, 50).unwrap();
            let err = res.field.max_abs_diff(&f).unwrap();
            assert!(err <= 2.0 * res.error_estimate(), "n {n}: {err} vs {}", res.error_estimate());
            errors.push(err);
        }
        assert!(errors[1] < errors[0] && errors[2] < errors[1], "{errors:?}");
        assert!(errors[1] < 5e-2, "{errors:?}");
    }
}
