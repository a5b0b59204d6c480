//! Fixed-step classic RK4 with per-step diagnostics and blow-up detection.

use std::fmt;
use std::str::FromStr;

use crate::error::{out_of_range, Error, Result};
use crate::model::{Model, ModelParams};
use crate::spectral::{RealField, Spectral};
use crate::theory::spectral_decay_rate_with;

/// Largest `λ·dt` on the negative real axis for which classic RK4 is stable.
pub const RK4_REAL_AXIS_LIMIT: f64 = 2.785;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Direction {
    #[default]
    Forward,
    Backward,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "forward" => Ok(Direction::Forward),
            "backward" => Ok(Direction::Backward),
            other => Err(Error::Config(format!(
                "direction must be `forward` or `backward`, got `{other}`"
            ))),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub t_final: f64,
    /// Steps between diagnostic rows.
    pub record_every: usize,
    pub snapshot_times: Vec<f64>,
    pub blowup_threshold: f64,
    pub direction: Direction,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_final: 1.0,
            record_every: 1,
            snapshot_times: Vec::new(),
            blowup_threshold: 1e6,
            direction: Direction::Forward,
        }
    }
}

impl SimConfig {
    pub fn new(dt: f64, t_final: f64) -> Self {
        Self {
            dt,
            t_final,
            ..Self::default()
        }
    }

    /// `steps` equal steps covering `[0, t_final]`.
    pub fn from_steps(t_final: f64, steps: usize) -> Self {
        Self::new(t_final / steps.max(1) as f64, t_final)
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(out_of_range("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(out_of_range("t_final", format!("must be positive, got {}", self.t_final)));
        }
        if self.steps() == 0 {
            return Err(out_of_range("dt", format!("exceeds t_final {}", self.t_final)));
        }
        if self.record_every == 0 {
            return Err(out_of_range("record_every", "must be >= 1"));
        }
        if self.blowup_threshold.is_nan() {
            return Err(out_of_range("blowup_threshold", "is NaN"));
        }
        if let Some(t) = self.snapshot_times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(out_of_range("snapshot_times", format!("invalid time {t}")));
        }
        Ok(())
    }

    /// Rejects forward runs whose stiffest linear mode is outside the RK4 stability region.
    pub fn check_stability(&self, model: &Model) -> Result<()> {
        let product = model.stiffness() * self.dt;
        if self.direction == Direction::Forward && product > RK4_REAL_AXIS_LIMIT {
            return Err(out_of_range(
                "dt",
                format!(
                    "beta * max|xi|^alpha * dt = {product:.4} exceeds the RK4 limit {RK4_REAL_AXIS_LIMIT}; \
                     largest stable dt is {:.3e}",
                    RK4_REAL_AXIS_LIMIT / model.stiffness()
                ),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Completed,
    Blowup,
    NonFinite,
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunStatus::Completed => "completed",
            RunStatus::Blowup => "blowup",
            RunStatus::NonFinite => "nonfinite",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub max_rho: f64,
    /// Node coordinates of the first grid maximum.
    pub argmax: Vec<f64>,
    pub min_rho: f64,
    pub mass: f64,
    pub l2_norm: f64,
    /// Trapezoidal `∫₀ᵗ ‖ρ‖_∞ ds` over every step taken.
    pub bkm_integral: f64,
    pub decay_rate_sigma: Option<f64>,
    pub negative_fraction: f64,
}

impl DiagnosticsRow {
    pub fn is_finite(&self) -> bool {
        [
            self.t,
            self.max_rho,
            self.min_rho,
            self.mass,
            self.l2_norm,
            self.bkm_integral,
            self.negative_fraction,
        ]
        .iter()
        .chain(self.decay_rate_sigma.iter())
        .chain(self.argmax.iter())
        .all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub status: RunStatus,
    pub t_end: f64,
    pub dt: f64,
    pub series: Vec<DiagnosticsRow>,
    pub snapshots: Vec<(f64, RealField)>,
    /// Last finite state, at `t_end`.
    pub final_state: RealField,
}

impl RunResult {
    pub fn initial_max(&self) -> f64 {
        self.series.first().map_or(f64::NAN, |r| r.max_rho)
    }

    pub fn final_row(&self) -> &DiagnosticsRow {
        self.series.last().expect("a run records at least its initial row")
    }
}

/// True when the row exceeds the threshold or carries a non-finite quantity.
pub fn detect_blowup(row: &DiagnosticsRow, cfg: &SimConfig) -> bool {
    !row.is_finite() || row.max_rho > cfg.blowup_threshold
}

/// Diagnostics of one state; `bkm_integral` is supplied by the caller.
pub fn diagnostics(spectral: &Spectral, field: &RealField, t: f64, bkm_integral: f64) -> DiagnosticsRow {
    let grid = field.grid();
    let negative = field.values().iter().filter(|&&v| v < 0.0).count();
    DiagnosticsRow {
        t,
        max_rho: field.max(),
        argmax: grid.node(field.argmax()),
        min_rho: field.min(),
        mass: field.mass(),
        l2_norm: field.l2_norm(),
        bkm_integral,
        decay_rate_sigma: spectral_decay_rate_with(spectral, field).sigma(),
        negative_fraction: negative as f64 / grid.len() as f64,
    }
}

fn axpy(base: &[f64], scale: f64, k: &[f64]) -> Vec<f64> {
    base.iter().zip(k).map(|(b, k)| b + scale * k).collect()
}

/// One RK4 update on raw values; `Err(stage)` names the first stage (1–4)
/// whose slope is non-finite, or 5 for the combined update.
fn rk4_values(model: &Model, rho: &[f64], dt: f64, sign: f64) -> std::result::Result<Vec<f64>, usize> {
    let eval = |x: &[f64], stage: usize| {
        let mut k = model.rhs_values(x);
        if k.iter().any(|v| !v.is_finite()) {
            return Err(stage);
        }
        if sign < 0.0 {
            k.iter_mut().for_each(|v| *v = -*v);
        }
        Ok(k)
    };
    let k1 = eval(rho, 1)?;
    let k2 = eval(&axpy(rho, 0.5 * dt, &k1), 2)?;
    let k3 = eval(&axpy(rho, 0.5 * dt, &k2), 3)?;
    let k4 = eval(&axpy(rho, dt, &k3), 4)?;
    let next: Vec<f64> = (0..rho.len())
        .map(|i| rho[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    if next.iter().any(|v| !v.is_finite()) {
        return Err(5);
    }
    Ok(next)
}

pub fn step_rk4(model: &Model, rho: &RealField, dt: f64, direction: Direction) -> Result<RealField> {
    if rho.grid() != model.grid() {
        return Err(Error::GridMismatch);
    }
    if dt.is_nan() || dt <= 0.0 {
        return Err(out_of_range("dt", format!("must be positive, got {dt}")));
    }
    let next = rk4_values(model, rho.values(), dt, direction.sign())
        .map_err(|stage| Error::NonFiniteStage { stage })?;
    RealField::new(*rho.grid(), next)
}

/// Integrates from `rho0` for `cfg.t_final`, reporting time as elapsed
/// integration time in either direction.
pub fn run(model: &Model, rho0: &RealField, cfg: &SimConfig) -> Result<RunResult> {
    cfg.validate()?;
    cfg.check_stability(model)?;
    if rho0.grid() != model.grid() {
        return Err(Error::GridMismatch);
    }
    let initial_max = rho0.max();
    if cfg.blowup_threshold <= initial_max {
        return Err(out_of_range(
            "blowup_threshold",
            format!(
                "{} must exceed the initial max {initial_max}",
                cfg.blowup_threshold
            ),
        ));
    }

    let steps = cfg.steps();
    let dt = cfg.dt;
    let sign = cfg.direction.sign();
    let grid = *rho0.grid();
    let mut snapshot_steps: Vec<(usize, f64)> = cfg
        .snapshot_times
        .iter()
        .map(|&t| (((t / dt).round() as usize).min(steps), t))
        .collect();
    snapshot_steps.sort_by_key(|&(s, _)| s);

    let mut state = rho0.clone();
    let mut bkm = 0.0;
    let mut series = vec![diagnostics(model.spectral(), &state, 0.0, bkm)];
    let mut snapshots = Vec::new();
    let mut next_snapshot = 0;
    let take_snapshots = |step: usize, field: &RealField, snapshots: &mut Vec<(f64, RealField)>, next: &mut usize| {
        while *next < snapshot_steps.len() && snapshot_steps[*next].0 == step {
            snapshots.push((step as f64 * dt, field.clone()));
            *next += 1;
        }
    };
    take_snapshots(0, &state, &mut snapshots, &mut next_snapshot);

    let mut status = RunStatus::Completed;
    let mut last_step = 0;
    for step in 1..=steps {
        let prev_max = state.max();
        let prev_norm = state.max_abs();
        let next = match rk4_values(model, state.values(), dt, sign) {
            Ok(v) => v,
            Err(_) => {
                // The state itself is still finite; decide between a genuine
                // singularity and a numerical fault from the last finite max.
                status = if prev_max > 10.0 * initial_max {
                    RunStatus::Blowup
                } else {
                    RunStatus::NonFinite
                };
                break;
            }
        };
        state = RealField::new(grid, next)?;
        last_step = step;
        let t = step as f64 * dt;
        let max = state.max();
        bkm += 0.5 * dt * (prev_norm + state.max_abs());
        take_snapshots(step, &state, &mut snapshots, &mut next_snapshot);
        let exceeded = max > cfg.blowup_threshold;
        if step % cfg.record_every == 0 || step == steps || exceeded {
            series.push(diagnostics(model.spectral(), &state, t, bkm));
        }
        if exceeded {
            status = RunStatus::Blowup;
            break;
        }
    }

    let t_end = last_step as f64 * dt;
    if series.last().map(|r| r.t) != Some(t_end) {
        series.push(diagnostics(model.spectral(), &state, t_end, bkm));
    }
    Ok(RunResult {
        status,
        t_end,
        dt,
        series,
        snapshots,
        final_state: state,
    })
}

pub fn run_with_params(rho0: &RealField, params: &ModelParams, cfg: &SimConfig) -> Result<RunResult> {
    let model = Model::new(*rho0.grid(), *params)?;
    run(&model, rho0, cfg)
}

/// Share of the fluctuation energy `Σ_{ξ≠0} |ρ̂(ξ)|²` carried by modes
/// outside the 2/3-rule box (the top third of each axis).
pub fn high_band_energy_fraction(spectral: &Spectral, field: &RealField) -> Result<f64> {
    let hat = spectral.forward_transform(field)?;
    let cutoff = field.grid().dealias_cutoff();
    let (mut high, mut total) = (0.0, 0.0);
    for (xi, c) in hat.modes() {
        if xi.iter().all(|&k| k == 0) {
            continue;
        }
        let e = c.norm_sqr();
        total += e;
        if xi.iter().any(|k| k.abs() > cutoff) {
            high += e;
        }
    }
    Ok(if total > 0.0 { high / total } else { 0.0 })
}

/// Outcome of integrating a smoothed state backward in time.
#[derive(Debug, Clone)]
pub struct BackwardDemo {
    /// `(elapsed backward time, high-band fraction)` per step.
    pub fractions: Vec<(f64, f64)>,
    pub status: RunStatus,
    /// Largest fraction reached divided by the starting fraction.
    pub growth: f64,
    pub monotone: bool,
}

/// Runs forward for `t_forward`, then backward for the same span, tracking
/// the high-band energy fraction at every backward step.
pub fn backward_demo(model: &Model, rho0: &RealField, dt: f64, t_forward: f64) -> Result<BackwardDemo> {
    let forward = SimConfig {
        snapshot_times: vec![t_forward],
        ..SimConfig::new(dt, t_forward)
    };
    let fwd = run(model, rho0, &forward)?;
    if fwd.status != RunStatus::Completed {
        return Err(Error::Config(format!("forward leg ended with status {}", fwd.status)));
    }
    let (_, smooth) = fwd.snapshots.last().cloned().expect("snapshot at t_forward");

    let spectral = model.spectral();
    let mut state = smooth;
    let mut fractions = vec![(0.0, high_band_energy_fraction(spectral, &state)?)];
    let mut status = RunStatus::Completed;
    for step in 1..=forward.steps() {
        match rk4_values(model, state.values(), dt, -1.0) {
            Ok(next) => state = RealField::new(*rho0.grid(), next)?,
            Err(_) => {
                status = RunStatus::NonFinite;
                break;
            }
        }
        fractions.push((step as f64 * dt, high_band_energy_fraction(spectral, &state)?));
        if state.max_abs() > forward.blowup_threshold {
            status = RunStatus::Blowup;
            break;
        }
    }
    let start = fractions[0].1;
    let peak = fractions.iter().map(|f| f.1).fold(0.0, f64::max);
    let monotone = fractions.windows(2).all(|w| w[1].1 >= w[0].1);
    Ok(BackwardDemo {
        growth: match (start > 0.0, peak > 0.0) {
            (true, _) => peak / start,
            (false, true) => f64::INFINITY,
            (false, false) => 1.0,
        },
        fractions,
        status,
        monotone,
    })
}
