//! Right-hand side of `∂t ρ = −β Λ^α ρ + ρ(ρ − 1) + ∇ρ·∇T(ρ)`, its
//! parameters, and the initial-data presets.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{out_of_range, Error, Result};
use crate::spectral::{check_alpha, check_finite, GridSpec, RealField, Spectral};

/// Constant subtracted in the reaction term `ρ(ρ − c)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reaction {
    /// `c = 1`, the nondimensional mean density, whatever the actual grid mean is.
    #[default]
    Unit,
    /// `c = ⟨ρ⟩`, the current grid mean. This is the form obtained from
    /// `βΔρ + ∇·(ρ∇T(ρ))` and conserves mass for any mean.
    Mean,
}

impl FromStr for Reaction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit" => Ok(Reaction::Unit),
            "mean" => Ok(Reaction::Mean),
            other => Err(Error::Config(format!(
                "reaction must be `unit` or `mean`, got `{other}`"
            ))),
        }
    }
}

impl fmt::Display for Reaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Reaction::Unit => "unit",
            Reaction::Mean => "mean",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub alpha: f64,
    pub beta: f64,
    /// Form the quadratic products with 2/3-rule truncation.
    pub dealias: bool,
    pub reaction: Reaction,
}

impl ModelParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let p = Self {
            alpha,
            beta,
            dealias: false,
            reaction: Reaction::Unit,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_dealias(mut self, dealias: bool) -> Self {
        self.dealias = dealias;
        self
    }

    pub fn with_reaction(mut self, reaction: Reaction) -> Self {
        self.reaction = reaction;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(out_of_range("beta", format!("must be finite and >= 0, got {}", self.beta)));
        }
        Ok(())
    }
}

/// Dimensional description of an isothermal self-gravitating gas in a periodic box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub sound_speed: f64,
    pub gravitational_constant: f64,
    pub mean_density: f64,
    pub box_length: f64,
    pub dim: usize,
}

/// Surface of the unit sphere in `dim` dimensions: 2, 2π, 4π.
pub fn sphere_surface(dim: usize) -> Result<f64> {
    match dim {
        1 => Ok(2.0),
        2 => Ok(2.0 * PI),
        3 => Ok(4.0 * PI),
        _ => Err(out_of_range("dim", format!("must be 1, 2 or 3, got {dim}"))),
    }
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("sound_speed", self.sound_speed),
            ("gravitational_constant", self.gravitational_constant),
            ("mean_density", self.mean_density),
            ("box_length", self.box_length),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(out_of_range(name, format!("must be positive, got {v}")));
            }
        }
        sphere_surface(self.dim).map(|_| ())
    }

    pub fn sphere_surface(&self) -> Result<f64> {
        sphere_surface(self.dim)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nondimensional {
    pub beta: f64,
    /// Time unit `1/√(S_d G ⟨ρ⟩)`.
    pub tau: f64,
}

/// `β = 4π² c_s² / (S_d G ⟨ρ⟩ L²)` and the dynamical time unit.
pub fn nondimensionalize(p: &PhysicalParams) -> Result<Nondimensional> {
    p.validate()?;
    let s_d = p.sphere_surface()?;
    let gravity = s_d * p.gravitational_constant * p.mean_density;
    Ok(Nondimensional {
        beta: 4.0 * PI * PI * p.sound_speed * p.sound_speed / (gravity * p.box_length * p.box_length),
        tau: 1.0 / gravity.sqrt(),
    })
}

/// The discretized right-hand side on one grid, with its FFT plans and
/// the `|ξ|^α` table precomputed.
#[derive(Debug, Clone)]
pub struct Model {
    spectral: Spectral,
    params: ModelParams,
    symbol: Vec<f64>,
}

impl Model {
    pub fn new(grid: GridSpec, params: ModelParams) -> Result<Self> {
        params.validate()?;
        let spectral = Spectral::new(grid);
        let symbol = spectral.fractional_symbol(params.alpha);
        Ok(Self {
            spectral,
            params,
            symbol,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        self.spectral.grid()
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    /// `β · max |ξ|^α` over the grid: the stiffest decay rate of the linear part.
    pub fn stiffness(&self) -> f64 {
        self.params.beta * self.symbol.iter().copied().fold(0.0, f64::max)
    }

    fn check_grid(&self, rho: &RealField) -> Result<()> {
        if rho.grid() != self.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    pub fn rhs(&self, rho: &RealField) -> Result<RealField> {
        self.check_grid(rho)?;
        let out = self.rhs_values(rho.values());
        check_finite(&out)?;
        RealField::new(*self.grid(), out)
    }

    /// Unchecked evaluation on raw nodal values; non-finite input propagates.
    pub(crate) fn rhs_values(&self, rho: &[f64]) -> Vec<f64> {
        let sp = &self.spectral;
        let dealias = self.params.dealias;
        let mut hat = sp.forward_raw(rho);
        let shift = match self.params.reaction {
            Reaction::Unit => 1.0,
            Reaction::Mean => hat[0].re,
        };
        let beta = self.params.beta;
        let linear: Vec<Complex64> = hat
            .iter()
            .zip(&self.symbol)
            .map(|(c, s)| -c * (beta * s))
            .collect();
        if dealias {
            for (c, m) in hat.iter_mut().zip(sp.dealias_mask()) {
                *c *= m;
            }
        }
        let pot = sp.potential_hat(&hat);

        // ∂_j ρ and ∂_j T interleaved, then either the truncated ρ or the linear term
        let dim = self.grid().dim();
        let mut spectra = Vec::with_capacity(2 * dim + 1);
        for axis in 0..dim {
            let symbol = sp.deriv_symbol(axis);
            spectra.push(Spectral::times_i_symbol(&hat, symbol));
            spectra.push(Spectral::times_i_symbol(&pot, symbol));
        }
        spectra.push(if dealias { hat } else { linear.clone() });
        let mut fields = sp.inverse_real_batch(spectra);
        let last = fields.pop().expect("batch is nonempty");
        let rho_q: &[f64] = if dealias { &last } else { rho };

        let mut quad: Vec<f64> = rho_q.iter().map(|r| r * r).collect();
        for pair in fields.chunks_exact(2) {
            for ((q, a), b) in quad.iter_mut().zip(&pair[0]).zip(&pair[1]) {
                *q += a * b;
            }
        }

        if dealias {
            let mut total = sp.forward_raw(&quad);
            for ((c, m), l) in total.iter_mut().zip(sp.dealias_mask()).zip(&linear) {
                *c = *c * m + l;
            }
            sp.inverse_raw(total)
                .into_iter()
                .zip(rho)
                .map(|(v, r)| v - shift * r)
                .collect()
        } else {
            quad.iter()
                .zip(&last)
                .zip(rho)
                .map(|((q, l), r)| q + l - shift * r)
                .collect()
        }
    }

    /// `βΔρ + ∇·(ρ∇T(ρ))`, the conservative form of the `α = 2` equation.
    ///
    /// It coincides with [`Model::rhs`] under [`Reaction::Mean`] (and under
    /// [`Reaction::Unit`] when `⟨ρ⟩ = 1`) up to aliasing.
    pub fn rhs_divergence_form(&self, rho: &RealField) -> Result<RealField> {
        if self.params.alpha != 2.0 {
            return Err(out_of_range(
                "alpha",
                format!("divergence form needs alpha = 2, got {}", self.params.alpha),
            ));
        }
        self.check_grid(rho)?;
        let sp = &self.spectral;
        let hat = sp.forward_raw(rho.values());
        let pot = sp.potential_hat(&hat);
        let mask = sp.dealias_mask();

        let (rho_q, pot_q) = if self.params.dealias {
            let hat_q: Vec<Complex64> = hat.iter().zip(mask).map(|(c, m)| c * m).collect();
            let pot_q: Vec<Complex64> = pot.iter().zip(mask).map(|(c, m)| c * m).collect();
            (sp.inverse_raw(hat_q), pot_q)
        } else {
            (rho.values().to_vec(), pot.clone())
        };

        // spectral accumulation of βΔρ + Σ_j ∂_j(ρ ∂_j U)
        let mut total: Vec<Complex64> = hat
            .iter()
            .zip(sp.k2())
            .map(|(c, k2)| -c * k2 * self.params.beta)
            .collect();
        for axis in 0..self.grid().dim() {
            let symbol = sp.deriv_symbol(axis);
            let d_pot = sp.apply_imag(&pot_q, symbol);
            let flux: Vec<f64> = rho_q.iter().zip(&d_pot).map(|(r, u)| r * u).collect();
            let mut flux_hat = sp.forward_raw(&flux);
            if self.params.dealias {
                for (c, m) in flux_hat.iter_mut().zip(mask) {
                    *c *= m;
                }
            }
            for ((t, c), s) in total.iter_mut().zip(&flux_hat).zip(symbol) {
                *t += Complex64::new(-c.im * s, c.re * s);
            }
        }
        let out = sp.inverse_raw(total);
        check_finite(&out)?;
        RealField::new(*self.grid(), out)
    }
}

pub fn rhs(rho: &RealField, params: &ModelParams) -> Result<RealField> {
    Model::new(*rho.grid(), *params)?.rhs(rho)
}

pub fn rhs_divergence_form(rho: &RealField, params: &ModelParams) -> Result<RealField> {
    Model::new(*rho.grid(), *params)?.rhs_divergence_form(rho)
}

/// Named initial densities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset {
    /// `|sin x| + |sin y|` (2D only).
    Paper2d,
    /// `1 + a·cos x` (`·cos y` in 2D).
    CosBump,
    /// `1 + a·g(x)` with `g` a unit-peak Gaussian of the given width, periodized.
    Gauss { width: f64 },
    /// `1 + a·p(x)`, `p` a seeded random sum of modes `1 <= |ξ| <= 4` with
    /// uniform phases, scaled so that `max p = 1`.
    RandModes,
    /// `1 + a·(Σ_j |sin x_j| − m)` with `m` the grid mean of the sum (`→ 2d/π`):
    /// the kinked `|sin|` profile with unit grid mean.
    AbsSin,
}

impl Preset {
    pub const NAMES: [&'static str; 5] = ["paper2d", "cosbump", "gauss", "randmodes", "abssin"];

    /// Parses a preset name; `width` is only used by `gauss`.
    pub fn parse(name: &str, width: f64) -> Result<Self> {
        match name {
            "paper2d" => Ok(Preset::Paper2d),
            "cosbump" => Ok(Preset::CosBump),
            "gauss" => Ok(Preset::Gauss { width }),
            "randmodes" => Ok(Preset::RandModes),
            "abssin" => Ok(Preset::AbsSin),
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Paper2d => "paper2d",
            Preset::CosBump => "cosbump",
            Preset::Gauss { .. } => "gauss",
            Preset::RandModes => "randmodes",
            Preset::AbsSin => "abssin",
        }
    }
}

/// Initial density together with the summary every preset reports.
#[derive(Debug, Clone)]
pub struct InitialCondition {
    pub field: RealField,
    pub max: f64,
    pub min: f64,
    pub mean: f64,
}

impl InitialCondition {
    fn from_field(field: RealField) -> Result<Self> {
        let min = field.min();
        if min < 0.0 {
            let index = field
                .values()
                .iter()
                .position(|&v| v == min)
                .unwrap_or_default();
            return Err(Error::NegativeDensity { index, min });
        }
        Ok(Self {
            max: field.max(),
            min,
            mean: field.mean(),
            field,
        })
    }
}

/// Random low-mode perturbation with zero mean and unit grid maximum.
pub fn random_modes(grid: GridSpec, seed: u64) -> Result<RealField> {
    const MAX_MODE: i64 = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let range: Vec<i64> = (-MAX_MODE..=MAX_MODE).collect();
    let mut modes: Vec<(Vec<i64>, f64)> = Vec::new();
    let candidates: Vec<Vec<i64>> = match grid.dim() {
        1 => range.iter().map(|&a| vec![a]).collect(),
        _ => range
            .iter()
            .flat_map(|&a| range.iter().map(move |&b| vec![a, b]))
            .collect(),
    };
    for xi in candidates {
        let k2: i64 = xi.iter().map(|c| c * c).sum();
        // one representative of each ±ξ pair: first nonzero component positive
        let leading_positive = xi.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0);
        if k2 == 0 || k2 > MAX_MODE * MAX_MODE || !leading_positive {
            continue;
        }
        modes.push((xi, rng.gen_range(0.0..2.0 * PI)));
    }
    let raw: Vec<f64> = (0..grid.len())
        .map(|i| {
            let x = grid.node(i);
            modes
                .iter()
                .map(|(xi, phase)| {
                    let arg: f64 = xi.iter().zip(&x).map(|(&k, &xj)| k as f64 * xj).sum();
                    (arg + phase).cos()
                })
                .sum()
        })
        .collect();
    let peak = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    RealField::new(grid, raw.into_iter().map(|v| v / peak).collect())
}

/// Unit-peak Gaussian of standard deviation `width`, periodized over the torus.
fn periodic_gaussian(x: &[f64], width: f64) -> f64 {
    x.iter()
        .map(|&xj| {
            (-4..=4)
                .map(|nu| {
                    let d = xj - 2.0 * PI * nu as f64;
                    (-d * d / (2.0 * width * width)).exp()
                })
                .sum::<f64>()
        })
        .product()
}

pub fn initial_condition(
    preset: Preset,
    grid: GridSpec,
    amplitude: f64,
    seed: u64,
) -> Result<InitialCondition> {
    let dim = grid.dim();
    let field = match preset {
        Preset::Paper2d => {
            if dim != 2 {
                return Err(Error::Config("preset `paper2d` needs dim = 2".into()));
            }
            RealField::from_fn(grid, |x| x[0].sin().abs() + x[1].sin().abs())?
        }
        Preset::CosBump => {
            RealField::from_fn(grid, |x| 1.0 + amplitude * x.iter().map(|v| v.cos()).product::<f64>())?
        }
        Preset::Gauss { width } => {
            if !(width > 0.0 && width.is_finite()) {
                return Err(out_of_range("width", format!("must be positive, got {width}")));
            }
            RealField::from_fn(grid, |x| 1.0 + amplitude * periodic_gaussian(x, width))?
        }
        Preset::RandModes => {
            let p = random_modes(grid, seed)?;
            RealField::new(grid, p.values().iter().map(|v| 1.0 + amplitude * v).collect())?
        }
        Preset::AbsSin => {
            let profile = RealField::from_fn(grid, |x| x.iter().map(|v| v.sin().abs()).sum::<f64>())?;
            let offset = profile.mean();
            RealField::new(
                grid,
                profile.values().iter().map(|p| 1.0 + amplitude * (p - offset)).collect(),
            )?
        }
    };
    InitialCondition::from_field(field)
}

/// Divides a density by its grid mean.
pub fn renormalize_mean(field: &RealField) -> Result<RealField> {
    let mean = field.mean();
    if mean <= 0.0 {
        return Err(out_of_range("mean", format!("cannot renormalize mean {mean}")));
    }
    RealField::new(*field.grid(), field.values().iter().map(|v| v / mean).collect())
}

impl InitialCondition {
    /// Rescales to unit grid mean and refreshes the summary.
    pub fn renormalized(self) -> Result<Self> {
        Self::from_field(renormalize_mean(&self.field)?)
    }
}
