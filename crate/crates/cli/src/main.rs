//! Command-line driver for variable-exponent Lebesgue computations on
//! discretized boxes.
//!
//! Reads a TOML scenario (grid, exponent, function, parameters), runs one
//! command against it, and exits 0 on success, 1 when a verification suite
//! found a violation, and 2 on configuration errors.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

mod commands;
mod config;

use commands::Outcome;
use config::ScenarioConfig;

#[derive(Parser)]
#[command(name = "varlex", version, about = "variable-exponent Lebesgue space computations")]
struct Args {
    /// Scenario configuration file (TOML).
    #[arg(long)]
    config: PathBuf,

    /// What to compute or check.
    #[arg(long)]
    command: Command,

    /// Overrides `params.seed` from the configuration.
    #[arg(long)]
    seed: Option<u64>,

    /// Directory for CSV output; created if missing. Without it, `report`
    /// prints its CSV and the other commands only print their summaries.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Overrides `params.tol` from the configuration.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    /// Luxemburg norm of the scenario function.
    Norm,
    /// Modular of the scenario function.
    Modular,
    /// Cube-supremum and tail-deviation constants of the exponent.
    Constants,
    /// Maximal function values and the norm ratio |Mf| / |f|.
    Maximal,
    /// Stopping-cube decomposition of |f| with its structural checks.
    Cz,
    /// Every randomized invariant suite plus the scenario classification.
    Verify,
    /// One CSV aggregating point values with every verification row.
    Report,
}

/// Exit-code 2 failures: configuration problems and runtime errors.
enum Failure {
    Config(Vec<String>),
    Other(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(Outcome::Clean) => ExitCode::SUCCESS,
        Ok(Outcome::Violations(n)) => {
            eprintln!("{n} violation(s) found");
            ExitCode::from(1)
        }
        Err(Failure::Config(errs)) => {
            for e in &errs {
                eprintln!("config error: {e}");
            }
            eprintln!("{} config error(s)", errs.len());
            ExitCode::from(2)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(args: &Args) -> Result<Outcome, Failure> {
    let text = fs::read_to_string(&args.config).map_err(|e| {
        Failure::Config(vec![format!("{}: {e}", args.config.display())])
    })?;
    let mut cfg: ScenarioConfig = config::parse_config(&text).map_err(Failure::Config)?;

    // Overrides are re-validated so a bad --tol fails like a bad config.
    if args.seed.is_some() || args.tol.is_some() {
        if let Some(seed) = args.seed {
            cfg.params.seed = seed;
        }
        if let Some(tol) = args.tol {
            cfg.params.tol = tol;
        }
        let errors = cfg.validate();
        if !errors.is_empty() {
            return Err(Failure::Config(errors));
        }
    }

    if let Some(dir) = &args.out {
        fs::create_dir_all(dir)
            .map_err(|e| Failure::Other(anyhow::anyhow!("creating {}: {e}", dir.display())))?;
        // Echo the effective configuration so output directories are
        // self-describing and runs are reproducible.
        let echo = dir.join("effective-config.toml");
        fs::write(&echo, config::serialize_config(&cfg))
            .map_err(|e| Failure::Other(anyhow::anyhow!("writing {}: {e}", echo.display())))?;
    }
    let out = args.out.as_deref();

    let outcome = match args.command {
        Command::Norm => commands::norm(&cfg, out)?,
        Command::Modular => commands::modular_value(&cfg, out)?,
        Command::Constants => commands::constants(&cfg, out)?,
        Command::Maximal => commands::maximal(&cfg, out)?,
        Command::Cz => commands::cz(&cfg, out)?,
        Command::Verify => commands::verify(&cfg, out)?,
        Command::Report => commands::report(&cfg, out)?,
    };
    Ok(outcome)
}
