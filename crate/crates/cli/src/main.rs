use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qmc_cli::commands::{cmd_analyze, cmd_classical, cmd_validate, AnalyzeOptions};
use qmc_cli::input::{load_coloring, load_dilation};
use qmc_cli::reproduce::cmd_reproduce;
use qmc_cli::{CliResult, OutFormat, Outcome};

/// Coupling-based mixing analysis for quantum Markov chains and road-colored
/// classical chains.
#[derive(Debug, Parser)]
#[command(name = "qmc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check unitarity, invariance and modular compatibility of a dilation.
    Validate {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        out: OutFormat,
    },
    /// Completeness verdict, mixing certificate, duality and defect curves.
    Analyze {
        path: PathBuf,
        /// Exponent of the duality pairing; repeat for several values.
        #[arg(long = "alpha", default_values_t = [0.0, 0.25, 0.5])]
        alphas: Vec<f64>,
        /// Largest n in the bound table; 0 prints the validation only.
        #[arg(long, default_value_t = 20)]
        max_n: usize,
        /// Random samples per duality check.
        #[arg(long, default_value_t = 20)]
        samples: usize,
        /// Horizon of the finite-horizon defect curve.
        #[arg(long)]
        defect_n: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "text")]
        out: OutFormat,
    },
    /// Synchronization probabilities and coupling bounds of a road coloring.
    Classical {
        path: PathBuf,
        #[arg(long, default_value_t = 20)]
        n_max: usize,
        /// Cross-check against brute-force word enumeration up to this n.
        #[arg(long)]
        enumerate_max: Option<usize>,
        #[arg(long, value_enum, default_value = "text")]
        out: OutFormat,
    },
    /// Recompute every reference constant from the bundled examples.
    #[command(name = "reproduce-paper")]
    Reproduce {
        #[arg(long)]
        json: bool,
    },
}

fn run(cli: Cli) -> CliResult<Outcome> {
    match cli.command {
        Command::Validate { path, out } => cmd_validate(&load_dilation(&path)?, out),
        Command::Analyze { path, alphas, max_n, samples, defect_n, seed, out } => {
            let opts = AnalyzeOptions { alphas, max_n, samples, seed, defect_n };
            cmd_analyze(&load_dilation(&path)?, &opts, out)
        }
        Command::Classical { path, n_max, enumerate_max, out } => {
            cmd_classical(&load_coloring(&path)?, n_max, enumerate_max, out)
        }
        Command::Reproduce { json } => cmd_reproduce(json),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            ExitCode::from(outcome.code as u8)
        }
        Err(e) => {
            eprintln!("qmc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
