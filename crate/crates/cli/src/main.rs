use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use gravlab::commands::{self, StabilityInput, EXIT_ERROR};
use gravlab_core::io::RunConfig;

/// Pseudospectral solver for a fractional-diffusion gravitational collapse model.
#[derive(Parser)]
#[command(name = "gravlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArg {
    /// Run configuration (`key = value` lines); defaults apply when omitted.
    #[arg(short, long)]
    config: Option<PathBuf>,
}

impl ConfigArg {
    fn load(&self) -> Result<RunConfig> {
        Ok(match &self.config {
            Some(path) => RunConfig::read(path)?,
            None => RunConfig::default(),
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration. Exit 0 completed, 2 blow-up, 1 error.
    Run {
        #[command(flatten)]
        config: ConfigArg,
        /// Output directory (overrides `out_dir`).
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// One run per beta, run concurrently, with a combined table.
    Sweep {
        #[command(flatten)]
        config: ConfigArg,
        /// Comma-separated beta values.
        #[arg(long)]
        betas: String,
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Concurrent runs (default: GRAVLAB_WORKERS, then available cores).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Thresholds and bounds for a configuration or a dimensional setup.
    Stability {
        #[arg(short, long, conflicts_with = "physical")]
        config: Option<PathBuf>,
        /// Physical parameters file (sound_speed, gravitational_constant, ...).
        #[arg(long)]
        physical: Option<PathBuf>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Compare the spectral operators with independent reference evaluations.
    Oracle {
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Smooth forward, then integrate backward. Exit 0 if high modes grow 10x, else 3.
    Backward {
        #[command(flatten)]
        config: ConfigArg,
        /// Length of the forward leg.
        #[arg(long, default_value_t = 0.1)]
        forward_time: f64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Render a snapshot as a PPM image with a min/max sidecar.
    Render {
        snapshot: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Run { config, out } => commands::cmd_run(&config.load()?, out.as_deref()),
        Command::Sweep {
            config,
            betas,
            out,
            workers,
        } => {
            let cfg = config.load()?;
            let betas = commands::parse_betas(&betas)?;
            commands::cmd_sweep(&cfg, &betas, out.as_deref(), commands::worker_count(workers)?)
        }
        Command::Stability { config, physical, out } => match (config, physical) {
            (_, Some(path)) => commands::cmd_stability(StabilityInput::Physical(&path), out.as_deref()),
            (config, None) => {
                let cfg = ConfigArg { config }.load()?;
                commands::cmd_stability(StabilityInput::Config(&cfg), out.as_deref())
            }
        },
        Command::Oracle { config } => commands::cmd_oracle(&config.load()?),
        Command::Backward {
            config,
            forward_time,
            out,
        } => commands::cmd_backward(&config.load()?, forward_time, out.as_deref()),
        Command::Render { snapshot, out } => commands::cmd_render(&snapshot, out.as_deref()),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
