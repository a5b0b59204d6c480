use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::integrator::{Direction, SimConfig};
use crate::model::{initial_condition, InitialCondition, ModelParams, Preset, Reaction};
use crate::spectral::GridSpec;

/// Run configuration read from a flat `key = value` file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dim: usize,
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    pub dealias: bool,
    pub preset: String,
    pub amplitude: f64,
    pub seed: u64,
    pub dt: f64,
    pub t_final: f64,
    pub record_every: usize,
    pub snapshot_times: Vec<f64>,
    pub blowup_threshold: f64,
    pub direction: Direction,
    pub out_dir: PathBuf,
    pub renormalize_mean: bool,
    pub reaction: Reaction,
    /// Width of the `gauss` preset.
    pub width: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dim: 1,
            n: 128,
            alpha: 1.0,
            beta: 1.0,
            dealias: false,
            preset: "cosbump".into(),
            amplitude: 0.5,
            seed: 0,
            dt: 1e-3,
            t_final: 1.0,
            record_every: 1,
            snapshot_times: Vec::new(),
            blowup_threshold: 1e6,
            direction: Direction::Forward,
            out_dir: PathBuf::from("out"),
            renormalize_mean: false,
            reaction: Reaction::Unit,
            width: 0.5,
        }
    }
}

/// Keys in canonical order.
pub const CONFIG_KEYS: [&str; 18] = [
    "dim",
    "n",
    "alpha",
    "beta",
    "dealias",
    "preset",
    "amplitude",
    "seed",
    "dt",
    "t_final",
    "record_every",
    "snapshot_times",
    "blowup_threshold",
    "direction",
    "out_dir",
    "renormalize_mean",
    "reaction",
    "width",
];

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value `{value}` for key `{key}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(Error::Config(format!(
            "invalid value `{value}` for key `{key}`: expected true or false"
        ))),
    }
}

/// Splits `key = value` lines, skipping blanks and `#` comments.
pub(crate) fn key_values(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out: Vec<(usize, String, String)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "line {}: expected `key = value`, got `{line}`",
                lineno + 1
            )));
        };
        let key = key.trim().to_string();
        if out.iter().any(|(_, k, _)| *k == key) {
            return Err(Error::Config(format!("line {}: duplicate key `{key}`", lineno + 1)));
        }
        out.push((lineno + 1, key, value.trim().to_string()));
    }
    Ok(out)
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (line, key, value) in key_values(text)? {
            let v = value.as_str();
            match key.as_str() {
                "dim" => cfg.dim = parse_value(&key, v)?,
                "n" => cfg.n = parse_value(&key, v)?,
                "alpha" => cfg.alpha = parse_value(&key, v)?,
                "beta" => cfg.beta = parse_value(&key, v)?,
                "dealias" => cfg.dealias = parse_bool(&key, v)?,
                "preset" => cfg.preset = v.to_string(),
                "amplitude" => cfg.amplitude = parse_value(&key, v)?,
                "seed" => cfg.seed = parse_value(&key, v)?,
                "dt" => cfg.dt = parse_value(&key, v)?,
                "t_final" => cfg.t_final = parse_value(&key, v)?,
                "record_every" => cfg.record_every = parse_value(&key, v)?,
                "snapshot_times" => {
                    cfg.snapshot_times = v
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(|s| parse_value(&key, s))
                        .collect::<Result<_>>()?
                }
                "blowup_threshold" => cfg.blowup_threshold = parse_value(&key, v)?,
                "direction" => cfg.direction = v.parse()?,
                "out_dir" => cfg.out_dir = PathBuf::from(v),
                "renormalize_mean" => cfg.renormalize_mean = parse_bool(&key, v)?,
                "reaction" => cfg.reaction = v.parse()?,
                "width" => cfg.width = parse_value(&key, v)?,
                other => {
                    return Err(Error::Config(format!("line {line}: unknown key `{other}`")));
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Checks every field that can be checked without building the model.
    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        self.model_params()?;
        self.sim_config().validate()?;
        self.preset()?;
        Ok(())
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.dim, self.n)
    }

    pub fn model_params(&self) -> Result<ModelParams> {
        Ok(ModelParams::new(self.alpha, self.beta)?
            .with_dealias(self.dealias)
            .with_reaction(self.reaction))
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            dt: self.dt,
            t_final: self.t_final,
            record_every: self.record_every,
            snapshot_times: self.snapshot_times.clone(),
            blowup_threshold: self.blowup_threshold,
            direction: self.direction,
        }
    }

    pub fn preset(&self) -> Result<Preset> {
        Preset::parse(&self.preset, self.width)
    }

    pub fn initial_condition(&self) -> Result<InitialCondition> {
        let ic = initial_condition(self.preset()?, self.grid()?, self.amplitude, self.seed)?;
        if self.renormalize_mean {
            ic.renormalized()
        } else {
            Ok(ic)
        }
    }

    /// Canonical text: every key, in [`CONFIG_KEYS`] order, shortest round-trip numbers.
    pub fn to_canonical(&self) -> String {
        let times: Vec<String> = self.snapshot_times.iter().map(|t| format!("{t:?}")).collect();
        let mut s = String::new();
        for key in CONFIG_KEYS {
            let value = match key {
                "dim" => self.dim.to_string(),
                "n" => self.n.to_string(),
                "alpha" => format!("{:?}", self.alpha),
                "beta" => format!("{:?}", self.beta),
                "dealias" => self.dealias.to_string(),
                "preset" => self.preset.clone(),
                "amplitude" => format!("{:?}", self.amplitude),
                "seed" => self.seed.to_string(),
                "dt" => format!("{:?}", self.dt),
                "t_final" => format!("{:?}", self.t_final),
                "record_every" => self.record_every.to_string(),
                "snapshot_times" => times.join(","),
                "blowup_threshold" => format!("{:?}", self.blowup_threshold),
                "direction" => self.direction.to_string(),
                "out_dir" => self.out_dir.display().to_string(),
                "renormalize_mean" => self.renormalize_mean.to_string(),
                "reaction" => self.reaction.to_string(),
                "width" => format!("{:?}", self.width),
                _ => unreachable!("every canonical key is listed"),
            };
            let _ = writeln!(s, "{key} = {value}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig::default();
        let text = cfg.to_canonical();
        assert_eq!(RunConfig::parse(&text).unwrap(), cfg);
        assert_eq!(RunConfig::parse("").unwrap(), cfg);
    }

    #[test]
    fn parses_every_key() {
        let text = "\
# a comment
dim = 2
n = 64
alpha = 1.5
beta = 0.33
dealias = true
preset = paper2d
amplitude = 0
seed = 9
dt = 5e-4
t_final = 9
record_every = 10
snapshot_times = 0, 4.5,9
blowup_threshold = 1e5
direction = forward
out_dir = runs/a
renormalize_mean = false
reaction = mean
width = 0.25
";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.dim, 2);
        assert_eq!(cfg.snapshot_times, vec![0.0, 4.5, 9.0]);
        assert_eq!(cfg.reaction, Reaction::Mean);
        assert_eq!(cfg.out_dir, PathBuf::from("runs/a"));
        let again = RunConfig::parse(&cfg.to_canonical()).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.to_canonical(), cfg.to_canonical());
    }

    #[test]
    fn unknown_key_is_named() {
        let err = RunConfig::parse("beta = 1\nviscosity = 2\n").unwrap_err();
        assert!(err.to_string().contains("viscosity"), "{err}");
    }

    #[test]
    fn rejects_bad_values() {
        assert!(RunConfig::parse("n = 7").is_err());
        assert!(RunConfig::parse("alpha = 3").is_err());
        assert!(RunConfig::parse("dealias = yes").is_err());
        assert!(RunConfig::parse("preset = tophat").is_err());
        assert!(RunConfig::parse("beta = 1\nbeta = 2").is_err());
        assert!(RunConfig::parse("just text").is_err());
        assert!(RunConfig::parse("direction = sideways").is_err());
    }
}
