//! kdtli: near-field interference signals of rotating symmetric-top
//! molecules — thermal alignment distributions, Monte Carlo validation,
//! fringe-visibility sweeps and brute-force oracle comparisons.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use commands::Outcome;
use config::{RatioConfig, RunConfig};
use kdtli::VisibilityMode;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Sum,
    Integral,
    Classical,
    Oracle,
}

impl From<ModeArg> for VisibilityMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Sum => VisibilityMode::QuantumSum,
            ModeArg::Integral => VisibilityMode::QuantumIntegral,
            ModeArg::Classical => VisibilityMode::Classical,
            ModeArg::Oracle => VisibilityMode::Oracle,
        }
    }
}

#[derive(Parser)]
#[command(name = "kdtli", version, about)]
struct Cli {
    /// TOML run configuration; built-in defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// RNG seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the thermal alignment density p_th(q) per shape ratio (CSV).
    Qdist {
        /// Shape ratios I/I3 (numbers or "linear"), overriding the config.
        #[arg(long, value_delimiter = ',')]
        ratios: Option<Vec<String>>,
    },
    /// Monte Carlo sampling vs the closed-form distribution (JSON report).
    McValidate {
        /// Sample count override.
        #[arg(long)]
        samples: Option<usize>,
        /// Report KS distances without failing the run (for small samples).
        #[arg(long)]
        advisory: bool,
    },
    /// Fringe-visibility sweep tables (CSV).
    Visibility {
        /// Restrict to one formula; default emits sum, integral, classical.
        #[arg(long)]
        mode: Option<ModeArg>,
    },
    /// Brute-force three-grating simulation vs closed form (JSON report).
    OracleCompare,
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let out = cli.out.as_deref();
    match cli.command {
        Command::Qdist { ratios } => {
            let parsed: Option<Vec<RatioConfig>> = ratios.map(|rs| {
                rs.into_iter()
                    .map(|s| match s.parse::<f64>() {
                        Ok(x) => RatioConfig::Number(x),
                        Err(_) => RatioConfig::Name(s),
                    })
                    .collect()
            });
            commands::cmd_qdist(&cfg, parsed.as_deref(), out)
        }
        Command::McValidate { samples, advisory } => {
            commands::cmd_mc_validate(&cfg, samples, advisory, out)
        }
        Command::Visibility { mode } => {
            commands::cmd_visibility(&cfg, mode.map(Into::into), out)
        }
        Command::OracleCompare => commands::cmd_oracle_compare(&cfg, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::ValidationFailed) => {
            eprintln!("validation thresholds not met (see report)");
            ExitCode::from(1)
        }
        Err(e) => {
            if commands::core_error_is_validation(&e) {
                eprintln!("validation failure: {e:#}");
                ExitCode::from(1)
            } else {
                eprintln!("error: {e:#}");
                ExitCode::from(2)
            }
        }
    }
}
