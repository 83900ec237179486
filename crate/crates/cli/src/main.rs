use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Result};
use clap::{Parser, ValueEnum};
use mhdlab_cli::{run_experiment, ExperimentConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    HeatVerify,
    Counterexample,
    MaxregVerify,
    StokesVerify,
    MhdRun,
    OdeBound,
    ConstantsFit,
    Report,
}

impl Command {
    fn kind(self) -> &'static str {
        match self {
            Self::HeatVerify => "heat-verify",
            Self::Counterexample => "counterexample",
            Self::MaxregVerify => "maxreg-verify",
            Self::StokesVerify => "stokes-verify",
            Self::MhdRun => "mhd-run",
            Self::OdeBound => "ode-bound",
            Self::ConstantsFit => "constants-fit",
            Self::Report => "report",
        }
    }
}

/// Runs one verification experiment described by a TOML config file.
///
/// Exit status: 0 when every check passes, 1 when a bound is violated,
/// 2 on configuration or runtime errors.
#[derive(Debug, Parser)]
#[command(name = "mhdlab", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Worker threads for ensembles and sweeps (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Overrides the seed in the config file.
    #[arg(long)]
    seed: Option<u64>,
}

fn run(cli: &Cli) -> Result<bool> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            bail!("--jobs: must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()?;
    }
    let mut cfg = ExperimentConfig::load(&cli.config)?;
    if cfg.experiment.kind() != cli.command.kind() {
        bail!(
            "config describes a '{}' experiment, not '{}'",
            cfg.experiment.kind(),
            cli.command.kind()
        );
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let start = Instant::now();
    let outcome = run_experiment(&cfg)?;
    let written = outcome.write(&cfg.output_dir)?;
    print!("{}", mhdlab_cli::output::summary(&outcome.report));
    for path in written {
        eprintln!("wrote {}", path.display());
    }
    eprintln!("elapsed {:.2?}", start.elapsed());
    Ok(outcome.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
