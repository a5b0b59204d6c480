//! File formats: run configuration, physical parameters, diagnostic CSVs,
//! binary snapshots and PPM rasters.

mod config;
mod csv;
mod render;
mod snapshot;

pub use config::{RunConfig, CONFIG_KEYS};
pub use csv::{
    fmt_real, parse_series_csv, series_to_csv, sweep_to_csv, SERIES_HEADER, SERIES_SCHEMA, SWEEP_SCHEMA,
};
pub use render::{render, Raster};
pub use snapshot::{Snapshot, SNAPSHOT_MAGIC, SNAPSHOT_VERSION};

use crate::error::{Error, Result};
use crate::model::PhysicalParams;

/// Dimensional input for the stability report.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalFile {
    pub params: PhysicalParams,
    pub alpha: f64,
    /// Initial maximum density in units of the mean.
    pub max0: f64,
}

/// Parses `sound_speed`, `gravitational_constant`, `mean_density`,
/// `box_length`, `dim` (all required) and `alpha`, `max0` (default 1).
pub fn parse_physical(text: &str) -> Result<PhysicalFile> {
    let mut fields: [Option<f64>; 7] = [None; 7];
    const KEYS: [&str; 7] = [
        "sound_speed",
        "gravitational_constant",
        "mean_density",
        "box_length",
        "dim",
        "alpha",
        "max0",
    ];
    for (line, key, value) in config::key_values(text)? {
        let Some(slot) = KEYS.iter().position(|k| *k == key) else {
            return Err(Error::Config(format!("line {line}: unknown key `{key}`")));
        };
        fields[slot] = Some(
            value
                .parse()
                .map_err(|_| Error::Config(format!("invalid value `{value}` for key `{key}`")))?,
        );
    }
    let required = |i: usize| fields[i].ok_or_else(|| Error::Config(format!("missing key `{}`", KEYS[i])));
    let dim = required(4)?;
    if dim.fract() != 0.0 || dim < 1.0 {
        return Err(Error::Config(format!("dim must be a positive integer, got {dim}")));
    }
    let params = PhysicalParams {
        sound_speed: required(0)?,
        gravitational_constant: required(1)?,
        mean_density: required(2)?,
        box_length: required(3)?,
        dim: dim as usize,
    };
    params.validate()?;
    Ok(PhysicalFile {
        params,
        alpha: fields[5].unwrap_or(1.0),
        max0: fields[6].unwrap_or(1.0),
    })
}
