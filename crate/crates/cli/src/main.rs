//! `inlsv`: ground states, simulations, classification and checks for the
//! radial inhomogeneous NLS with potential.
//!
//! Exit codes: 0 success, 1 precondition failure, 2 numeric failure, 64 usage.

mod artifacts;
mod commands;
mod error;
mod svg;
mod verify;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::artifacts::OutDir;
use crate::commands::{GroundStateArgs, Outcome, DEFAULT_PLOTS};
use crate::error::CliError;

const EXIT_USAGE: u8 = 64;

#[derive(Debug, Parser)]
#[command(name = "inlsv", version, about = "Radial numerics for the 3D inhomogeneous NLS with potential")]
struct Cli {
    /// Directory for CSV/JSON/SVG artifacts.
    #[arg(long, global = true, env = "INLSV_OUT_DIR", default_value = "inlsv-out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for the ground state Q; writes ground_state.csv (r, Q) and ground_state.json.
    GroundState {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        b: f64,
        #[arg(long, default_value_t = 20.0)]
        r_max: f64,
        #[arg(long, default_value_t = 4096)]
        n: usize,
        /// Bisection tolerance on Q(0).
        #[arg(long)]
        tol: Option<f64>,
        /// Largest accepted Pohozaev residual; above it the exit code is 2.
        #[arg(long, default_value_t = 1e-3)]
        max_residual: f64,
    },
    /// Run the time evolution described by a TOML config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Columns to plot against t; `prefix*` puts all matching columns in one figure.
        #[arg(long, value_delimiter = ',')]
        plot: Option<Vec<String>>,
        #[arg(long)]
        no_plot: bool,
    },
    /// Evaluate the theorem hypotheses for the config's initial data.
    Classify {
        #[arg(long)]
        config: PathBuf,
        /// Also run the evolution and compare its events with the prediction.
        #[arg(long)]
        simulate: bool,
    },
    /// Classify and evolve u0 = c Q for each amplitude c.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0.8,0.9,1.1,1.2")]
        c: Vec<f64>,
        /// Parallel runs (defaults to the number of CPUs).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Norms and sign flags of a named potential.
    CheckPotential {
        #[arg(long)]
        name: String,
        #[arg(long)]
        amp: f64,
        #[arg(long, default_value_t = 20.0)]
        r_max: f64,
        #[arg(long, default_value_t = 4096)]
        n: usize,
    },
    /// Scaling exponents and admissibility checks for (alpha, b).
    Exponents {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        b: f64,
        #[arg(long, default_value_t = 1e-3)]
        theta: f64,
    },
    /// Run the invariant suite and print a pass/fail table.
    Verify,
}

fn dispatch(cli: &Cli) -> Result<Outcome, CliError> {
    let mut out = OutDir::create(&cli.out)?;
    let (name, config, result) = match &cli.command {
        Command::GroundState { alpha, b, r_max, n, tol, max_residual } => {
            let args = GroundStateArgs { alpha: *alpha, b: *b, r_max: *r_max, n: *n, tol: *tol, max_residual: *max_residual };
            ("ground-state", None, commands::ground_state(&mut out, &args))
        }
        Command::Simulate { config, plot, no_plot } => {
            let plots: Vec<String> = if *no_plot {
                Vec::new()
            } else {
                plot.clone().unwrap_or_else(|| DEFAULT_PLOTS.iter().map(|s| s.to_string()).collect())
            };
            ("simulate", Some(config.clone()), commands::simulate(&mut out, config, &plots))
        }
        Command::Classify { config, simulate } => {
            ("classify", Some(config.clone()), commands::classify(&mut out, config, *simulate))
        }
        Command::Sweep { config, c, jobs } => ("sweep", Some(config.clone()), commands::sweep(&mut out, config, c, *jobs)),
        Command::CheckPotential { name, amp, r_max, n } => {
            ("check-potential", None, commands::check_potential(&mut out, name, *amp, *r_max, *n))
        }
        Command::Exponents { alpha, b, theta } => ("exponents", None, commands::exponents(&mut out, *alpha, *b, *theta)),
        Command::Verify => ("verify", None, commands::verify(&mut out)),
    };
    let outcome = result?;
    commands::finish(&mut out, name, commands::config_arg(&config))?;
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match dispatch(&cli) {
        Ok(outcome) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(outcome.stdout.as_bytes());
            if outcome.numeric_failure {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("inlsv: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
