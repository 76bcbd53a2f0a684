//! `qnd` — design and simulation CLI for Kerr-based QND photon-number
//! measurement: resonator design reports, measurement-error sweeps, Bayesian
//! posterior distributions, brute-force validation, and seeded sampling.

mod commands;
mod config;
mod envelope;
mod error;
mod validate;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use commands::{cmd_error_curve, cmd_estimate, cmd_posterior, cmd_sample, OutcomeArg, OutputOpts};
use config::{OutputFormat, RunConfig};
use error::CliError;
use validate::{cmd_validate, Corruption};

#[derive(Parser)]
#[command(name = "qnd", version, about = "Kerr QND photon-number measurement toolkit")]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override a config value: section.key=value (repeatable).
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// Output path; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// RNG seed; overrides [rng].seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Payload format where a command supports both.
    #[arg(long, value_enum, global = true)]
    format: Option<OutputFormat>,

    /// Suppress status messages on stderr.
    #[arg(long, global = true)]
    quiet: bool,

    /// Stamp envelopes with wall-clock time (breaks byte-for-byte
    /// reproducibility of repeated runs).
    #[arg(long, global = true)]
    timestamp: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Resonator design report: phase factors, optimal probe number,
    /// minimum imprecision, pump power, SQL margin.
    Estimate,
    /// Sweep the squared imprecision at the optimal angle over n_bar_p, eta,
    /// or q_load (CSV).
    ErrorCurve,
    /// Prior/posterior photon-number distribution for one homodyne outcome.
    Posterior {
        /// Outcome value, or 'sample' to draw one seeded record first.
        #[arg(long)]
        x: OutcomeArg,
    },
    /// Run the brute-force validation battery; exit 3 if any check fails.
    Validate {
        /// Deliberately corrupt one input to demonstrate harness
        /// sensitivity.
        #[arg(long, value_enum)]
        corrupt: Option<Corruption>,
    },
    /// Stream seeded measurement records with posterior statistics
    /// (JSON lines).
    Sample {
        /// Number of records.
        #[arg(long)]
        count: usize,
    },
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config_path = cli.config.ok_or(config::ConfigError::MissingKey("--config PATH"))?;
    let config = RunConfig::load(&config_path, &cli.overrides)?;
    let io = OutputOpts {
        out: cli.out,
        format: cli.format,
        seed: cli.seed,
        quiet: cli.quiet,
        timestamp: cli.timestamp,
    };
    match &cli.command {
        Command::Estimate => cmd_estimate(&config, &io),
        Command::ErrorCurve => cmd_error_curve(&config, &io),
        Command::Posterior { x } => cmd_posterior(&config, x, &io),
        Command::Validate { corrupt } => cmd_validate(&config, *corrupt, &io),
        Command::Sample { count } => cmd_sample(&config, *count, &io),
    }
}
