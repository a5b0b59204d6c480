use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use gravlab_core::integrator::{backward_demo, run, RunResult, RunStatus};
use gravlab_core::io::{parse_physical, render, series_to_csv, sweep_to_csv, RunConfig, Snapshot};
use gravlab_core::model::{random_modes, Model, ModelParams, Reaction};
use gravlab_core::spectral::{lattice_kernel_oracle, naive_dft_oracle, GridSpec, RealField, Spectral};
use gravlab_core::theory::{check_run_against_bounds, StabilityReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_BLOWUP: i32 = 2;
pub const EXIT_NO_GROWTH: i32 = 3;

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn snapshot_pair(model: &Model, params: &ModelParams, t: f64, field: &RealField, dir: &Path, tag: &str) -> Result<()> {
    let potential = model.spectral().solve_potential(field)?;
    for (name, f) in [("rho", field), ("potential", &potential)] {
        Snapshot {
            alpha: params.alpha,
            beta: params.beta,
            t,
            field: f.clone(),
        }
        .write(&dir.join(format!("{name}_{tag}.gvlb")))?;
    }
    Ok(())
}

/// Runs one configuration and writes its artifacts into `dir`.
pub fn execute_run(cfg: &RunConfig, dir: &Path) -> Result<RunResult> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let grid = cfg.grid()?;
    let params = cfg.model_params()?;
    let ic = cfg.initial_condition()?;
    let model = Model::new(grid, params)?;
    write(&dir.join("config.txt"), cfg.to_canonical())?;

    let result = run(&model, &ic.field, &cfg.sim_config())?;

    write(&dir.join("series.csv"), series_to_csv(&result.series))?;
    for (t, field) in &result.snapshots {
        snapshot_pair(&model, &params, *t, field, dir, &format!("t{t:.6}"))?;
    }
    snapshot_pair(&model, &params, result.t_end, &result.final_state, dir, "final")?;

    let report = StabilityReport::new(params.alpha, params.beta, grid.dim(), ic.max, Some(ic.field.mass()))?;
    let check = check_run_against_bounds(&result, &params, &report);
    let mut bounds = format!(
        "initial max = {:?}, min = {:?}, mean = {:?}\nstatus = {}, t_end = {:?}\n\n",
        ic.max, ic.min, ic.mean, result.status, result.t_end
    );
    bounds.push_str(&report.to_text());
    bounds.push('\n');
    bounds.push_str(&check.to_text());
    write(&dir.join("bounds.txt"), bounds)?;
    Ok(result)
}

fn status_exit(status: RunStatus) -> Result<i32> {
    match status {
        RunStatus::Completed => Ok(EXIT_OK),
        RunStatus::Blowup => Ok(EXIT_BLOWUP),
        RunStatus::NonFinite => bail!("run produced non-finite values before any blow-up signature"),
    }
}

pub fn cmd_run(cfg: &RunConfig, out: Option<&Path>) -> Result<i32> {
    let dir = out.map_or_else(|| cfg.out_dir.clone(), Path::to_path_buf);
    let result = execute_run(cfg, &dir)?;
    let last = result.final_row();
    println!(
        "status {} at t = {:.6}: max_rho {:.6e} (initial {:.6e}), artifacts in {}",
        result.status,
        result.t_end,
        last.max_rho,
        result.initial_max(),
        dir.display()
    );
    status_exit(result.status)
}

/// Worker count: explicit flag, then `GRAVLAB_WORKERS`, then available cores.
pub fn worker_count(flag: Option<usize>) -> Result<usize> {
    if let Some(w) = flag {
        return Ok(w.max(1));
    }
    match std::env::var("GRAVLAB_WORKERS") {
        Ok(v) => {
            let w: usize = v
                .trim()
                .parse()
                .with_context(|| format!("GRAVLAB_WORKERS must be a positive integer, got `{v}`"))?;
            Ok(w.max(1))
        }
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub beta: f64,
    pub status: RunStatus,
    pub initial_max: f64,
    pub final_max: f64,
    pub t_end: f64,
}

impl SweepRow {
    /// `blowup`, `growth` (final max above initial) or `decay`.
    pub fn verdict(&self) -> &'static str {
        match self.status {
            RunStatus::Blowup => "blowup",
            _ if self.final_max > self.initial_max => "growth",
            _ => "decay",
        }
    }

    pub fn collapses(&self) -> bool {
        self.verdict() != "decay"
    }
}

pub fn sweep_table(rows: &[SweepRow]) -> String {
    let mut s = String::from("beta,status,t_end,initial_max,final_max,verdict\n");
    for r in rows {
        s.push_str(&format!(
            "{:?},{},{:.16e},{:.16e},{:.16e},{}\n",
            r.beta,
            r.status,
            r.t_end,
            r.initial_max,
            r.final_max,
            r.verdict()
        ));
    }
    s
}

pub fn parse_betas(list: &str) -> Result<Vec<f64>> {
    let betas: Vec<f64> = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().with_context(|| format!("bad beta `{s}`")))
        .collect::<Result<_>>()?;
    if betas.is_empty() {
        bail!("beta list is empty");
    }
    Ok(betas)
}

/// One run per `β`, each in its own `beta_<β>` directory, plus `sweep.csv`
/// and `sweep_verdicts.csv` in `dir`.
pub fn execute_sweep(cfg: &RunConfig, betas: &[f64], dir: &Path, workers: usize) -> Result<Vec<SweepRow>> {
    if betas.is_empty() {
        bail!("beta list is empty");
    }
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .context("building worker pool")?;
    let results: Vec<Result<RunResult>> = pool.install(|| {
        betas
            .par_iter()
            .map(|&beta| {
                let child = RunConfig {
                    beta,
                    out_dir: dir.join(format!("beta_{beta:?}")),
                    ..cfg.clone()
                };
                execute_run(&child, &child.out_dir).with_context(|| format!("run with beta = {beta}"))
            })
            .collect()
    });
    let results: Vec<RunResult> = results.into_iter().collect::<Result<_>>()?;

    let series: Vec<_> = results.iter().map(|r| r.series.clone()).collect();
    write(&dir.join("sweep.csv"), sweep_to_csv(betas, &series))?;
    let rows: Vec<SweepRow> = betas
        .iter()
        .zip(&results)
        .map(|(&beta, r)| SweepRow {
            beta,
            status: r.status,
            initial_max: r.initial_max(),
            final_max: r.final_row().max_rho,
            t_end: r.t_end,
        })
        .collect();
    write(&dir.join("sweep_verdicts.csv"), sweep_table(&rows))?;
    Ok(rows)
}

pub fn cmd_sweep(cfg: &RunConfig, betas: &[f64], out: Option<&Path>, workers: usize) -> Result<i32> {
    let dir = out.map_or_else(|| cfg.out_dir.clone(), Path::to_path_buf);
    let rows = execute_sweep(cfg, betas, &dir, workers)?;
    println!("{:>10}  {:>9}  {:>10}  {:>14}  {:>14}  verdict", "beta", "status", "t_end", "initial max", "final max");
    for r in &rows {
        println!(
            "{:>10}  {:>9}  {:>10.4}  {:>14.6e}  {:>14.6e}  {}",
            r.beta,
            r.status.to_string(),
            r.t_end,
            r.initial_max,
            r.final_max,
            r.verdict()
        );
    }
    if rows.iter().any(|r| r.status == RunStatus::NonFinite) {
        bail!("a sweep member produced non-finite values");
    }
    Ok(EXIT_OK)
}

pub enum StabilityInput<'a> {
    Config(&'a RunConfig),
    Physical(&'a Path),
}

pub fn cmd_stability(input: StabilityInput<'_>, out: Option<&Path>) -> Result<i32> {
    let (report, default_dir) = match input {
        StabilityInput::Config(cfg) => {
            let ic = cfg.initial_condition()?;
            let report = StabilityReport::new(cfg.alpha, cfg.beta, cfg.dim, ic.max, Some(ic.field.mass()))?;
            (report, cfg.out_dir.clone())
        }
        StabilityInput::Physical(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let p = parse_physical(&text)?;
            (StabilityReport::from_physical(&p.params, p.alpha, p.max0)?, PathBuf::from("."))
        }
    };
    let text = format!("{}\n{}", report.to_text(), report.to_kv());
    print!("{text}");
    let dir = out.map_or(default_dir, Path::to_path_buf);
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    write(&dir.join("stability.txt"), text)?;
    Ok(EXIT_OK)
}

/// Tolerances of the oracle comparisons.
pub const NAIVE_TOLERANCE: f64 = 1e-11;
pub const FORM_TOLERANCE: f64 = 1e-10;
/// The lattice sum must agree within this multiple of its own error estimate.
pub const LATTICE_FACTOR: f64 = 2.0;

#[derive(Debug, Clone)]
pub struct OracleLine {
    pub name: String,
    pub discrepancy: f64,
    pub tolerance: f64,
}

impl OracleLine {
    pub fn passed(&self) -> bool {
        self.discrepancy <= self.tolerance
    }
}

/// Naive-DFT, lattice-kernel and divergence-form comparisons on small grids.
pub fn oracle_checks(seed: u64) -> Result<Vec<OracleLine>> {
    let mut lines = Vec::new();
    for (dim, n) in [(1, 16), (1, 32), (2, 16)] {
        let grid = GridSpec::new(dim, n)?;
        let f = random_modes(grid, seed)?;
        let sp = Spectral::new(grid);
        for alpha in [0.5, 1.0, 1.5, 2.0] {
            let fast = sp.fractional_laplacian(&f, alpha)?;
            let naive = naive_dft_oracle(&f, alpha)?;
            lines.push(OracleLine {
                name: format!("naive DFT   dim {dim} n {n:>2} alpha {alpha}"),
                discrepancy: fast.max_abs_diff(&naive)?,
                tolerance: NAIVE_TOLERANCE,
            });
        }
    }
    let grid = GridSpec::new(1, 32)?;
    let f = random_modes(grid, seed)?;
    let sp = Spectral::new(grid);
    for alpha in [0.5, 1.0, 1.5] {
        let fast = sp.fractional_laplacian(&f, alpha)?;
        let lattice = lattice_kernel_oracle(&f, alpha, 64)?;
        lines.push(OracleLine {
            name: format!("lattice     dim 1 n 32 alpha {alpha}"),
            discrepancy: fast.max_abs_diff(&lattice.field)?,
            tolerance: LATTICE_FACTOR * lattice.error_estimate(),
        });
    }
    for (dim, n) in [(1, 32), (2, 16)] {
        let grid = GridSpec::new(dim, n)?;
        let p = random_modes(grid, seed)?;
        let rho = RealField::new(grid, p.values().iter().map(|v| 1.0 + 0.4 * v).collect())?;
        let params = ModelParams::new(2.0, 0.5)?.with_dealias(true).with_reaction(Reaction::Mean);
        let model = Model::new(grid, params)?;
        lines.push(OracleLine {
            name: format!("alpha=2 divergence form dim {dim} n {n}"),
            discrepancy: model.rhs(&rho)?.max_abs_diff(&model.rhs_divergence_form(&rho)?)?,
            tolerance: FORM_TOLERANCE,
        });
    }
    Ok(lines)
}

pub fn cmd_oracle(cfg: &RunConfig) -> Result<i32> {
    let lines = oracle_checks(cfg.seed)?;
    for l in &lines {
        println!(
            "{:<40} max discrepancy {:.3e}  tolerance {:.3e}  {}",
            l.name,
            l.discrepancy,
            l.tolerance,
            if l.passed() { "ok" } else { "FAIL" }
        );
    }
    Ok(if lines.iter().all(OracleLine::passed) {
        EXIT_OK
    } else {
        EXIT_ERROR
    })
}

pub const BACKWARD_SCHEMA: &str = "# schema: gravlab-backward v1";

pub fn cmd_backward(cfg: &RunConfig, t_forward: f64, out: Option<&Path>) -> Result<i32> {
    let dir = out.map_or_else(|| cfg.out_dir.clone(), Path::to_path_buf);
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let model = Model::new(cfg.grid()?, cfg.model_params()?)?;
    let ic = cfg.initial_condition()?;
    let demo = backward_demo(&model, &ic.field, cfg.dt, t_forward)?;
    let mut csv = format!("{BACKWARD_SCHEMA}\nt,high_band_fraction\n");
    for (s, frac) in &demo.fractions {
        // physical time runs from t_forward back toward 0
        csv.push_str(&format!("{:.16e},{:.16e}\n", t_forward - s, frac));
    }
    write(&dir.join("backward.csv"), csv)?;
    println!(
        "backward from t = {t_forward}: high-band fraction grew {:.3e}x ({}monotone), status {}",
        demo.growth,
        if demo.monotone { "" } else { "not " },
        demo.status
    );
    Ok(if demo.growth >= 10.0 { EXIT_OK } else { EXIT_NO_GROWTH })
}

pub fn cmd_render(snapshot: &Path, out: Option<&Path>) -> Result<i32> {
    let snap = Snapshot::read(snapshot)?;
    let raster = render(&snap.field);
    let ppm = out.map_or_else(|| snapshot.with_extension("ppm"), Path::to_path_buf);
    write(&ppm, raster.to_ppm())?;
    write(&ppm.with_extension("txt"), raster.annotation(snap.t))?;
    println!("wrote {} ({}x{})", ppm.display(), raster.width, raster.height);
    Ok(EXIT_OK)
}
