use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::integrator::DiagnosticsRow;

pub const SERIES_SCHEMA: &str = "# schema: gravlab-series v1";
pub const SERIES_HEADER: &str =
    "t,max_rho,argmax_coords,min_rho,mass,l2_norm,bkm_integral,decay_rate_sigma,negative_fraction";
pub const SWEEP_SCHEMA: &str = "# schema: gravlab-sweep v1";

/// 17 significant digits: exact for every finite `f64`.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_real(field: &str, line: usize) -> Result<f64> {
    field
        .parse()
        .map_err(|_| Error::Format(format!("line {line}: bad number `{field}`")))
}

pub fn series_to_csv(series: &[DiagnosticsRow]) -> String {
    let mut s = format!("{SERIES_SCHEMA}\n{SERIES_HEADER}\n");
    for r in series {
        let coords: Vec<String> = r.argmax.iter().map(|&v| fmt_real(v)).collect();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            fmt_real(r.t),
            fmt_real(r.max_rho),
            coords.join(";"),
            fmt_real(r.min_rho),
            fmt_real(r.mass),
            fmt_real(r.l2_norm),
            fmt_real(r.bkm_integral),
            r.decay_rate_sigma.map(fmt_real).unwrap_or_default(),
            fmt_real(r.negative_fraction),
        );
    }
    s
}

pub fn parse_series_csv(text: &str) -> Result<Vec<DiagnosticsRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l == SERIES_SCHEMA => {}
        Some((_, l)) => {
            return Err(Error::Format(format!(
                "expected schema line `{SERIES_SCHEMA}`, got `{l}`"
            )))
        }
        None => return Err(Error::Format("empty series file".into())),
    }
    match lines.next() {
        Some((_, l)) if l == SERIES_HEADER => {}
        _ => return Err(Error::Format(format!("expected header `{SERIES_HEADER}`"))),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let lineno = i + 1;
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 9 {
            return Err(Error::Format(format!(
                "line {lineno}: expected 9 fields, got {}",
                f.len()
            )));
        }
        rows.push(DiagnosticsRow {
            t: parse_real(f[0], lineno)?,
            max_rho: parse_real(f[1], lineno)?,
            argmax: f[2]
                .split(';')
                .map(|c| parse_real(c, lineno))
                .collect::<Result<_>>()?,
            min_rho: parse_real(f[3], lineno)?,
            mass: parse_real(f[4], lineno)?,
            l2_norm: parse_real(f[5], lineno)?,
            bkm_integral: parse_real(f[6], lineno)?,
            decay_rate_sigma: if f[7].is_empty() {
                None
            } else {
                Some(parse_real(f[7], lineno)?)
            },
            negative_fraction: parse_real(f[8], lineno)?,
        });
    }
    Ok(rows)
}

/// One `max_rho` column per run, aligned on the union of recorded times;
/// runs that ended earlier leave their cells empty.
pub fn sweep_to_csv(betas: &[f64], series: &[Vec<DiagnosticsRow>]) -> String {
    let mut times: Vec<f64> = series.iter().flatten().map(|r| r.t).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let mut s = format!("{SWEEP_SCHEMA}\nt");
    for b in betas {
        let _ = write!(s, ",max_rho_beta={b:?}");
    }
    s.push('\n');
    let mut cursors = vec![0usize; series.len()];
    for t in times {
        s.push_str(&fmt_real(t));
        for (rows, cur) in series.iter().zip(cursors.iter_mut()) {
            s.push(',');
            if *cur < rows.len() && rows[*cur].t == t {
                s.push_str(&fmt_real(rows[*cur].max_rho));
                *cur += 1;
            }
        }
        s.push('\n');
    }
    s
}
