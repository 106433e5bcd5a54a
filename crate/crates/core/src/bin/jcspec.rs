//! Command-line front end: deterministic spectrum, eigen-table, and sweep
//! runs with CSV output.
//!
//! Exit codes: 0 success, 2 config error, 3 numerical failure, 4 ambiguity.

use clap::{Parser, Subcommand, ValueEnum};
use jcspec::analysis::SweepVariable;
use jcspec::config::RunConfig;
use jcspec::pipeline;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "jcspec",
    about = "Fluorescence spectra of a driven two-level atom in a damped cavity",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the incoherent fluorescence spectrum and its labeled peaks.
    Spectrum {
        /// JSON configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Override a config key, e.g. --set method=both (repeatable).
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Output directory for spectrum.csv and peaks.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Tabulate analytic quasi-energies against numeric eigenvalues.
    Eigen {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep kappa or omega and report anomalous-peak enhancement.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Which parameter to vary.
        #[arg(long, value_enum)]
        vary: Vary,
        /// Comma-separated values in the config dialect
        /// (two_kappa_over_g for kappa, omega_over_g for omega).
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Vary {
    Kappa,
    Omega,
}

fn load_config(path: &PathBuf, overrides: &[String]) -> jcspec::Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    RunConfig::load(&text, overrides)
}

fn run() -> jcspec::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Spectrum { config, set, out } => {
            let config = load_config(&config, &set)?;
            pipeline::run_spectrum(&config, &out)
        }
        Command::Eigen { config, out } => {
            let config = load_config(&config, &[])?;
            pipeline::run_eigen(&config, &out)
        }
        Command::Sweep {
            config,
            vary,
            values,
            out,
        } => {
            let config = load_config(&config, &[])?;
            let vary = match vary {
                Vary::Kappa => SweepVariable::Kappa,
                Vary::Omega => SweepVariable::Omega,
            };
            pipeline::run_sweep(&config, vary, &values, &out)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("jcspec: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
