//! Closed-form thresholds, growth bounds and envelopes for the model, and
//! the checks that compare a run against them.

use std::f64::consts::PI;
use std::fmt::{self, Write as _};

use crate::error::{out_of_range, Result};
use crate::integrator::{RunResult, RunStatus};
use crate::model::{nondimensionalize, ModelParams, PhysicalParams, Reaction};
use crate::spectral::{check_alpha, kernel_constant, RealField, Spectral};

/// `ω² = k² c_s² − S_d G ρ₀`; negative values are amplified.
pub fn dispersion(k: f64, sound_speed: f64, gravitational_constant: f64, rho0: f64, s_d: f64) -> f64 {
    k * k * sound_speed * sound_speed - s_d * gravitational_constant * rho0
}

/// `λ_J = 2π c_s / √(S_d G ρ₀)`.
pub fn jeans_length(sound_speed: f64, gravitational_constant: f64, rho0: f64, s_d: f64) -> f64 {
    2.0 * PI * sound_speed / (s_d * gravitational_constant * rho0).sqrt()
}

/// Exponential rate `1 − β|k|^α` of mode `k` in the linearization about `ρ ≡ 1`.
pub fn linear_mode_rate(k: &[i64], alpha: f64, beta: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if k.iter().all(|&c| c == 0) {
        return Err(out_of_range("k", "the zero mode is the conserved mean, not a perturbation"));
    }
    let k2: f64 = k.iter().map(|&c| (c * c) as f64).sum();
    Ok(1.0 - beta * k2.powf(alpha / 2.0))
}

/// Earliest possible blow-up time `log(M/(M − 1))` for initial maximum `M`;
/// infinite when `M <= 1`.
pub fn min_blowup_time(max0: f64) -> f64 {
    if max0 > 1.0 {
        (max0 / (max0 - 1.0)).ln()
    } else {
        f64::INFINITY
    }
}

/// Upper bound `M / (M + (1 − M)e^t)` on the maximum density, valid for
/// every `β` up to the bound's own pole.
pub fn starf_envelope(max0: f64, t: f64) -> Result<f64> {
    let pole = min_blowup_time(max0);
    if t >= pole {
        return Err(out_of_range(
            "t",
            format!("{t} is at or past the envelope pole {pole}"),
        ));
    }
    Ok(max0 / (max0 + (1.0 - max0) * t.exp()))
}

/// An envelope value, or the reason its hypotheses fail.
#[derive(Debug, Clone, PartialEq)]
pub enum Envelope {
    Applies(f64),
    NotApplicable(String),
}

impl Envelope {
    pub fn value(&self) -> Option<f64> {
        match self {
            Envelope::Applies(v) => Some(*v),
            Envelope::NotApplicable(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstantBranch {
    /// The sharp one-dimensional value for `α = 1`.
    Sharp1d,
    /// The constant produced by the generic chain of inequalities; not sharp.
    ProofChain,
}

impl fmt::Display for ConstantBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstantBranch::Sharp1d => "sharp 1d value",
            ConstantBranch::ProofChain => "proof constant, not sharp",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityConstant {
    pub value: f64,
    pub branch: ConstantBranch,
}

/// `C_{α,d} (2π)^d (π√d)^{−(d+α)}`: the kernel lower bound over the
/// largest distance `π√d` on the torus, integrated over the cell.
pub fn proof_chain_constant(alpha: f64, dim: usize) -> Result<f64> {
    let c = kernel_constant(alpha, dim)?;
    let d = dim as f64;
    Ok(c * (2.0 * PI).powf(d) * (PI * d.sqrt()).powf(-(d + alpha)))
}

/// Constant `c_{α,d}` of the small-perturbation stability bound.
pub fn stability_constant(alpha: f64, dim: usize) -> Result<StabilityConstant> {
    let value = proof_chain_constant(alpha, dim)?;
    if alpha == 1.0 && dim == 1 {
        return Ok(StabilityConstant {
            value: 1.0,
            branch: ConstantBranch::Sharp1d,
        });
    }
    Ok(StabilityConstant {
        value,
        branch: ConstantBranch::ProofChain,
    })
}

/// `1 + (M − 1)e^{−(cβ − M)t}` when `M <= c_{α,d} β`.
pub fn small_perturbation_envelope(max0: f64, alpha: f64, dim: usize, beta: f64, t: f64) -> Envelope {
    let c = match stability_constant(alpha, dim) {
        Ok(c) => c.value,
        Err(e) => return Envelope::NotApplicable(e.to_string()),
    };
    if max0 > c * beta {
        return Envelope::NotApplicable(format!(
            "max0 = {max0} exceeds c * beta = {}",
            c * beta
        ));
    }
    Envelope::Applies(1.0 + (max0 - 1.0) * (-(c * beta - max0) * t).exp())
}

pub const GLOBAL_1D_BETA: f64 = 4.0 * PI * PI;

/// `1 + (M − 1)e^{−t}` for `d = 1`, `α = 1`, `β >= 4π²`.
pub fn global_1d_envelope(max0: f64, t: f64, alpha: f64, dim: usize, beta: f64) -> Envelope {
    if dim != 1 || alpha != 1.0 {
        return Envelope::NotApplicable(format!("needs dim = 1 and alpha = 1, got dim = {dim}, alpha = {alpha}"));
    }
    if beta < GLOBAL_1D_BETA {
        return Envelope::NotApplicable(format!("needs beta >= 4 pi^2 = {GLOBAL_1D_BETA:.6}, got {beta}"));
    }
    Envelope::Applies(1.0 + (max0 - 1.0) * (-t).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearVerdict {
    Unstable,
    Damped,
}

impl fmt::Display for LinearVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LinearVerdict::Unstable => "unstable",
            LinearVerdict::Damped => "damped",
        })
    }
}

/// Critical mass of the two-dimensional whole-space problem.
pub const CRITICAL_MASS_R2: f64 = 8.0 * PI;
/// Mass below which the one-dimensional remark guarantees no concentration.
pub const L1_REMARK_THRESHOLD: f64 = 1.0 / (2.0 * PI);

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub beta: f64,
    pub alpha: f64,
    pub dim: usize,
    pub max0: f64,
    /// `λ_J / L = √β`.
    pub jeans_length_ratio: f64,
    /// Dimensional Jeans length, when physical parameters were given.
    pub jeans_length: Option<f64>,
    pub linear_verdict: LinearVerdict,
    pub stability_constant: Option<StabilityConstant>,
    pub small_perturbation_threshold: Option<f64>,
    pub small_perturbation_verdict: String,
    pub global_1d_verdict: String,
    pub l1_remark_threshold: f64,
    pub critical_mass_r2: f64,
    pub initial_mass: Option<f64>,
    pub min_blowup_time: f64,
    pub tau: Option<f64>,
}

impl StabilityReport {
    pub fn new(alpha: f64, beta: f64, dim: usize, max0: f64, initial_mass: Option<f64>) -> Result<Self> {
        ModelParams::new(alpha, beta)?;
        if !(1..=2).contains(&dim) {
            return Err(out_of_range("dim", format!("must be 1 or 2, got {dim}")));
        }
        if !(max0 > 0.0 && max0.is_finite()) {
            return Err(out_of_range("max0", format!("must be positive, got {max0}")));
        }
        let constant = stability_constant(alpha, dim).ok();
        let threshold = constant.map(|c| c.value * beta);
        let small_perturbation_verdict = match small_perturbation_envelope(max0, alpha, dim, beta, 0.0) {
            Envelope::Applies(_) => "stable, envelope applies".to_string(),
            Envelope::NotApplicable(why) => format!("not applicable: {why}"),
        };
        let global_1d_verdict = match global_1d_envelope(max0, 0.0, alpha, dim, beta) {
            Envelope::Applies(_) => "applies".to_string(),
            Envelope::NotApplicable(why) => format!("not applicable: {why}"),
        };
        Ok(Self {
            beta,
            alpha,
            dim,
            max0,
            jeans_length_ratio: beta.sqrt(),
            jeans_length: None,
            linear_verdict: if beta <= 1.0 {
                LinearVerdict::Unstable
            } else {
                LinearVerdict::Damped
            },
            stability_constant: constant,
            small_perturbation_threshold: threshold,
            small_perturbation_verdict,
            global_1d_verdict,
            l1_remark_threshold: L1_REMARK_THRESHOLD,
            critical_mass_r2: CRITICAL_MASS_R2,
            initial_mass,
            min_blowup_time: min_blowup_time(max0),
            tau: None,
        })
    }

    /// Report for a dimensional setup; `β` comes from the physical parameters.
    pub fn from_physical(physical: &PhysicalParams, alpha: f64, max0: f64) -> Result<Self> {
        let nd = nondimensionalize(physical)?;
        let s_d = physical.sphere_surface()?;
        let mut report = Self::new(alpha, nd.beta, physical.dim, max0, None)?;
        report.jeans_length = Some(jeans_length(
            physical.sound_speed,
            physical.gravitational_constant,
            physical.mean_density,
            s_d,
        ));
        report.tau = Some(nd.tau);
        Ok(report)
    }

    /// `(key, value)` pairs; the first three keys are shared with the run configuration.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let opt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), |v| format!("{v:.16e}"));
        let num = |v: f64| format!("{v:.16e}");
        vec![
            ("beta", num(self.beta)),
            ("alpha", num(self.alpha)),
            ("dim", self.dim.to_string()),
            ("max0", num(self.max0)),
            ("jeans_length_ratio", num(self.jeans_length_ratio)),
            ("jeans_length", opt(self.jeans_length)),
            ("linear_verdict", self.linear_verdict.to_string()),
            ("stability_constant", opt(self.stability_constant.map(|c| c.value))),
            (
                "stability_constant_branch",
                self.stability_constant
                    .map_or_else(|| "none".to_string(), |c| c.branch.to_string()),
            ),
            ("small_perturbation_threshold", opt(self.small_perturbation_threshold)),
            ("small_perturbation_verdict", self.small_perturbation_verdict.clone()),
            ("global_1d_verdict", self.global_1d_verdict.clone()),
            ("l1_remark_threshold", num(self.l1_remark_threshold)),
            ("critical_mass_r2", num(self.critical_mass_r2)),
            ("initial_mass", opt(self.initial_mass)),
            ("min_blowup_time", num(self.min_blowup_time)),
            ("tau", opt(self.tau)),
        ]
    }

    pub fn to_kv(&self) -> String {
        self.entries()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "Stability report (dim = {}, alpha = {}, beta = {})", self.dim, self.alpha, self.beta);
        let _ = writeln!(
            s,
            "  Jeans length / box:        {:.6}{}",
            self.jeans_length_ratio,
            self.jeans_length
                .map_or_else(String::new, |l| format!("  (dimensional {l:.6e})"))
        );
        let _ = writeln!(s, "  linearization about 1:     {} (unstable iff beta <= 1)", self.linear_verdict);
        match self.stability_constant {
            Some(c) => {
                let _ = writeln!(s, "  stability constant c:      {:.6} ({})", c.value, c.branch);
            }
            None => {
                let _ = writeln!(s, "  stability constant c:      undefined at alpha = 2");
            }
        }
        if let Some(t) = self.small_perturbation_threshold {
            let _ = writeln!(s, "  small-data threshold c*b:  {t:.6}");
        }
        let _ = writeln!(s, "  small-data bound (max0 = {}): {}", self.max0, self.small_perturbation_verdict);
        let _ = writeln!(s, "  global 1d bound:           {}", self.global_1d_verdict);
        let _ = writeln!(
            s,
            "  mass remarks (informational): 1d threshold {:.6}, R^2 critical mass {:.6}{}",
            self.l1_remark_threshold,
            self.critical_mass_r2,
            self.initial_mass
                .map_or_else(String::new, |m| format!(", initial mass {m:.6}"))
        );
        let _ = writeln!(s, "  minimum blow-up time t*:   {}", self.min_blowup_time);
        if let Some(tau) = self.tau {
            let _ = writeln!(s, "  time unit tau:             {tau:.6e}");
        }
        s
    }
}

/// Tolerance allowed above an envelope value in [`check_run_against_bounds`].
pub fn envelope_tolerance(envelope: f64) -> f64 {
    1e-2 * envelope.abs() + 1e-3
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundVerdict {
    pub name: &'static str,
    /// `None` when applicable, otherwise the reason.
    pub not_applicable: Option<String>,
    pub rows_checked: usize,
    /// Largest `max_rho − envelope` over the checked rows.
    pub max_violation: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlowupTiming {
    pub t_detect: f64,
    pub t_star: f64,
    pub dt: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub bounds: Vec<BoundVerdict>,
    pub blowup: Option<BlowupTiming>,
}

impl BoundCheck {
    pub fn passed(&self) -> bool {
        self.bounds.iter().all(|b| b.passed) && self.blowup.as_ref().is_none_or(|b| b.passed)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for b in &self.bounds {
            match &b.not_applicable {
                Some(why) => {
                    let _ = writeln!(s, "{}: not applicable ({why})", b.name);
                }
                None => {
                    let _ = writeln!(
                        s,
                        "{}: {} (rows {}, max violation {:.6e}, tolerance 1e-2*envelope + 1e-3)",
                        b.name,
                        if b.passed { "pass" } else { "FAIL" },
                        b.rows_checked,
                        b.max_violation
                    );
                }
            }
        }
        if let Some(b) = &self.blowup {
            let _ = writeln!(
                s,
                "blowup_time: {} (t_detect {:.6}, t* {:.6}, dt {:e})",
                if b.passed { "pass" } else { "FAIL" },
                b.t_detect,
                b.t_star,
                b.dt
            );
        }
        let _ = writeln!(s, "overall: {}", if self.passed() { "pass" } else { "FAIL" });
        s
    }
}

fn verdict(name: &'static str, rows: &[(f64, f64)], envelope: impl Fn(f64) -> Envelope) -> BoundVerdict {
    let mut checked = 0;
    let mut worst = f64::NEG_INFINITY;
    let mut passed = true;
    for &(t, max_rho) in rows {
        match envelope(t) {
            Envelope::Applies(e) if e.is_finite() => {
                checked += 1;
                worst = worst.max(max_rho - e);
                passed &= max_rho <= e + envelope_tolerance(e);
            }
            Envelope::Applies(_) => {}
            Envelope::NotApplicable(why) => {
                return BoundVerdict {
                    name,
                    not_applicable: Some(why),
                    rows_checked: 0,
                    max_violation: 0.0,
                    passed: true,
                }
            }
        }
    }
    BoundVerdict {
        name,
        not_applicable: None,
        rows_checked: checked,
        max_violation: if checked > 0 { worst } else { 0.0 },
        passed,
    }
}

/// Compares the `max_rho` series of a run with every envelope whose
/// hypotheses hold.
///
/// Under [`Reaction::Mean`] with mean `m`, `ρ/m` solves the unit-mean
/// problem in time `m t` with `β/m`, and the envelopes are mapped back
/// accordingly. Under [`Reaction::Unit`] the maximum-principle bound holds
/// for any mean, the small-data bounds only for mean 1.
pub fn check_run_against_bounds(result: &RunResult, params: &ModelParams, report: &StabilityReport) -> BoundCheck {
    let first = &result.series[0];
    let volume = (2.0 * PI).powi(report.dim as i32);
    let mean = first.mass / volume;
    let max0 = first.max_rho;
    let rows: Vec<(f64, f64)> = result.series.iter().map(|r| (r.t, r.max_rho)).collect();

    let (m, unit_mean) = match params.reaction {
        Reaction::Mean => (mean, true),
        Reaction::Unit => (1.0, (mean - 1.0).abs() <= 1e-9),
    };
    let (alpha, dim) = (params.alpha, report.dim);
    let beta_s = params.beta / m;
    let scaled = |f: &dyn Fn(f64, f64) -> Envelope, t: f64| match f(max0 / m, m * t) {
        Envelope::Applies(v) => Envelope::Applies(m * v),
        na => na,
    };

    let mut bounds = vec![verdict("maximum_principle", &rows, |t| {
        scaled(
            &|mx, s| starf_envelope(mx, s).map_or(Envelope::Applies(f64::INFINITY), Envelope::Applies),
            t,
        )
    })];
    let off_mean = format!("reaction `unit` with grid mean {mean} != 1");
    bounds.push(verdict("small_perturbation", &rows, |t| {
        if !unit_mean {
            return Envelope::NotApplicable(off_mean.clone());
        }
        scaled(&|mx, s| small_perturbation_envelope(mx, alpha, dim, beta_s, s), t)
    }));
    bounds.push(verdict("global_1d", &rows, |t| {
        if !unit_mean {
            return Envelope::NotApplicable(off_mean.clone());
        }
        scaled(&|mx, s| global_1d_envelope(mx, s, alpha, dim, beta_s), t)
    }));

    let blowup = (result.status == RunStatus::Blowup).then(|| {
        let t_star = min_blowup_time(max0 / m) / m;
        BlowupTiming {
            t_detect: result.t_end,
            t_star,
            dt: result.dt,
            passed: result.t_end >= t_star - result.dt,
        }
    });
    BoundCheck { bounds, blowup }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DecayVerdict {
    Fitted { sigma: f64 },
    NotComputable(String),
}

/// Least-squares exponential decay rate of the Fourier coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub modes_used: usize,
    pub verdict: DecayVerdict,
}

impl DecayFit {
    pub fn sigma(&self) -> Option<f64> {
        match self.verdict {
            DecayVerdict::Fitted { sigma } => Some(sigma),
            DecayVerdict::NotComputable(_) => None,
        }
    }
}

/// Coefficients at or below this magnitude are treated as round-off.
pub const DECAY_NOISE_FLOOR: f64 = 1e-13;

/// Slope `σ` of `log|ρ̂(ξ)| ≈ a − σ|ξ|` over `n/8 <= |ξ| <= n/3`, ignoring
/// coefficients below [`DECAY_NOISE_FLOOR`]. Negative slopes are reported as 0.
pub fn spectral_decay_rate(rho: &RealField) -> DecayFit {
    spectral_decay_rate_with(&Spectral::new(*rho.grid()), rho)
}

pub fn spectral_decay_rate_with(spectral: &Spectral, rho: &RealField) -> DecayFit {
    let hat = match spectral.forward_transform(rho) {
        Ok(h) => h,
        Err(e) => {
            return DecayFit {
                modes_used: 0,
                verdict: DecayVerdict::NotComputable(e.to_string()),
            }
        }
    };
    let n = rho.grid().n() as f64;
    let (lo, hi) = (n / 8.0, n / 3.0);
    let mut points = Vec::new();
    let mut below_floor = 0;
    for (xi, c) in hat.modes() {
        let k = (xi.iter().map(|&v| (v * v) as f64).sum::<f64>()).sqrt();
        if k < lo || k > hi {
            continue;
        }
        if c.norm() > DECAY_NOISE_FLOOR {
            points.push((k, c.norm().ln()));
        } else {
            below_floor += 1;
        }
    }
    let mut radii: Vec<f64> = points.iter().map(|p| p.0).collect();
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    if radii.len() < 3 {
        return DecayFit {
            modes_used: points.len(),
            verdict: DecayVerdict::NotComputable(format!(
                "{} distinct |xi| above the noise floor in [{lo}, {hi}] ({below_floor} modes below it)",
                radii.len()
            )),
        };
    }
    let count = points.len() as f64;
    let mean_k = points.iter().map(|p| p.0).sum::<f64>() / count;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / count;
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_k) * (p.1 - mean_y)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_k).powi(2)).sum();
    DecayFit {
        modes_used: points.len(),
        verdict: DecayVerdict::Fitted {
            sigma: (-sxy / sxx).max(0.0),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{GridSpec, SpectralField};
    use num_complex::Complex64;

    const S1: f64 = 2.0;

    #[test]
    fn dispersion_examples() {
        let (c, g, rho) = (1.3, 0.7, 2.1);
        let kj = 2.0 * PI / jeans_length(c, g, rho, S1);
        assert!(dispersion(kj, c, g, rho, S1).abs() < 1e-12);
        assert_eq!(dispersion(0.0, c, g, rho, S1), -S1 * g * rho);
        // (2 k_J)^2 c^2 = 4 S G ρ
        let expected = 3.0 * S1 * g * rho;
        assert!((dispersion(2.0 * kj, c, g, rho, S1) - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn jeans_length_examples() {
        let s = 4.0 * PI * PI;
        assert!((jeans_length(1.0, 1.0, 1.0, s) - 1.0).abs() < 1e-15);
        let base = jeans_length(0.5, 2.0, 1.0, 2.0 * PI);
        assert!((jeans_length(0.5, 2.0, 4.0, 2.0 * PI) - base / 2.0).abs() < 1e-15);
    }

    #[test]
    fn jeans_length_squared_over_box_is_beta() {
        let p = PhysicalParams {
            sound_speed: 0.8,
            gravitational_constant: 1.7,
            mean_density: 0.4,
            box_length: 3.0,
            dim: 2,
        };
        let lj = jeans_length(0.8, 1.7, 0.4, 2.0 * PI);
        let beta = nondimensionalize(&p).unwrap().beta;
        assert!((lj * lj / 9.0 - beta).abs() < 1e-14 * beta);
        let report = StabilityReport::from_physical(&p, 1.0, 1.2).unwrap();
        assert!((report.jeans_length.unwrap() - 3.0 * beta.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn linear_rate_examples() {
        for alpha in [0.5, 1.0, 2.0] {
            assert_eq!(linear_mode_rate(&[1], alpha, 1.0).unwrap(), 0.0);
        }
        assert_eq!(linear_mode_rate(&[1], 1.0, 0.5).unwrap(), 0.5);
        assert_eq!(linear_mode_rate(&[2], 1.0, 1.0).unwrap(), -1.0);
        assert_eq!(linear_mode_rate(&[0, -2], 1.0, 1.0).unwrap(), -1.0);
        assert!(linear_mode_rate(&[0], 1.0, 1.0).is_err());
        assert!(linear_mode_rate(&[0, 0], 1.0, 1.0).is_err());
    }

    #[test]
    fn min_blowup_time_examples() {
        assert!((min_blowup_time(2.0) - 2f64.ln()).abs() < 1e-15);
        assert!((min_blowup_time(2.0) - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(min_blowup_time(1.0), f64::INFINITY);
        assert_eq!(min_blowup_time(0.5), f64::INFINITY);
        assert!((min_blowup_time(1.1) - 11f64.ln()).abs() < 1e-14);
        assert!((min_blowup_time(1.1) - 2.3979).abs() < 1e-4);
    }

    #[test]
    fn starf_envelope_examples() {
        assert_eq!(starf_envelope(3.0, 0.0).unwrap(), 3.0);
        assert_eq!(starf_envelope(1.0, 5.0).unwrap(), 1.0);
        let v = starf_envelope(2.0, 0.5).unwrap();
        assert!((v - 2.0 / (2.0 - 0.5f64.exp())).abs() < 1e-15);
        assert!((v - 5.69349).abs() < 1e-5);
        assert!(starf_envelope(2.0, 0.7).is_err());
    }

    #[test]
    fn starf_envelope_solves_the_logistic_ode() {
        // fine-step RK4 of y' = y(y − 1) from y = 2 up to t = 0.5
        let f = |y: f64| y * (y - 1.0);
        let (mut y, h) = (2.0, 1e-5);
        for _ in 0..50_000 {
            let k1 = f(y);
            let k2 = f(y + 0.5 * h * k1);
            let k3 = f(y + 0.5 * h * k2);
            let k4 = f(y + h * k3);
            y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        assert!((y - starf_envelope(2.0, 0.5).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn stability_constant_branches() {
        let sharp = stability_constant(1.0, 1).unwrap();
        assert_eq!(sharp.value, 1.0);
        assert_eq!(sharp.branch, ConstantBranch::Sharp1d);
        let chain = proof_chain_constant(1.0, 1).unwrap();
        assert!((chain - 2.0 / (PI * PI)).abs() < 1e-15);
        assert!(chain <= 1.0);
        for dim in 1..=3 {
            for alpha in [0.25, 0.5, 1.0, 1.5, 1.9] {
                assert!(stability_constant(alpha, dim).unwrap().value > 0.0);
            }
        }
        assert_eq!(stability_constant(1.5, 2).unwrap().branch, ConstantBranch::ProofChain);
        assert!(stability_constant(2.0, 1).is_err());
    }

    #[test]
    fn small_perturbation_examples() {
        let beta = 3.0;
        let max0 = 0.5 * beta;
        let t = 0.4;
        let v = small_perturbation_envelope(max0, 1.0, 1, beta, t).value().unwrap();
        assert!((v - (1.0 + (max0 - 1.0) * (-0.5 * beta * t).exp())).abs() < 1e-15);
        assert_eq!(small_perturbation_envelope(1.4, 1.0, 1, 2.0, 0.0), Envelope::Applies(1.4));
        assert_eq!(small_perturbation_envelope(1.0, 1.0, 1, 2.0, 3.0), Envelope::Applies(1.0));
        assert!(small_perturbation_envelope(2.5, 1.0, 1, 2.0, 0.0).value().is_none());
        assert!(small_perturbation_envelope(1.0, 2.0, 1, 2.0, 0.0).value().is_none());
    }

    #[test]
    fn global_1d_examples() {
        let b = GLOBAL_1D_BETA;
        let v = global_1d_envelope(6.0, 1.0, 1.0, 1, b).value().unwrap();
        assert!((v - (1.0 + 5.0 / std::f64::consts::E)).abs() < 1e-15);
        assert!((v - 2.8394).abs() < 1e-4);
        assert_eq!(global_1d_envelope(6.0, 0.0, 1.0, 1, b), Envelope::Applies(6.0));
        assert_eq!(global_1d_envelope(1.0, 2.0, 1.0, 1, b), Envelope::Applies(1.0));
        assert!(global_1d_envelope(6.0, 1.0, 1.0, 1, b - 1e-9).value().is_none());
        assert!(global_1d_envelope(6.0, 1.0, 1.0, 2, b).value().is_none());
        assert!(global_1d_envelope(6.0, 1.0, 1.5, 1, b).value().is_none());
    }

    #[test]
    fn report_examples() {
        let r = StabilityReport::new(1.0, 2.0, 1, 1.5, None).unwrap();
        assert_eq!(r.small_perturbation_verdict, "stable, envelope applies");
        assert_eq!(r.linear_verdict, LinearVerdict::Damped);
        assert!(StabilityReport::new(1.0, 0.5, 1, 1.5, None).unwrap().linear_verdict == LinearVerdict::Unstable);
        assert_eq!(StabilityReport::new(1.0, 1.0, 1, 1.0, None).unwrap().min_blowup_time, f64::INFINITY);
        let kv = r.to_kv();
        assert!(kv.starts_with("beta = "));
        assert!(kv.contains("stability_constant_branch = sharp 1d value"));
        assert!(r.to_text().contains("stable, envelope applies"));
    }

    #[test]
    fn decay_rate_of_exact_exponential_spectrum() {
        for (dim, n) in [(1, 64), (2, 32)] {
            let g = GridSpec::new(dim, n).unwrap();
            let s = SpectralField::from_fn(g, |xi| {
                let k = (xi.iter().map(|&v| (v * v) as f64).sum::<f64>()).sqrt();
                Complex64::new((-0.5 * k).exp(), 0.0)
            });
            let sp = Spectral::new(g);
            let field = sp.inverse_transform(&s).unwrap();
            let sigma = spectral_decay_rate(&field).sigma().unwrap();
            assert!((sigma - 0.5).abs() < 1e-6, "dim {dim}: {sigma}");
        }
    }

    #[test]
    fn decay_rate_of_band_limited_field_is_not_computable() {
        let g = GridSpec::new(1, 64).unwrap();
        let f = RealField::from_fn(g, |x| 1.0 + 0.5 * x[0].cos() + 0.1 * (3.0 * x[0]).sin()).unwrap();
        let fit = spectral_decay_rate(&f);
        assert!(matches!(fit.verdict, DecayVerdict::NotComputable(ref why) if why.contains("noise floor")));
    }
}
