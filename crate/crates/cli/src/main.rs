//! Command-line surface for the cavity-magnon Gaussian simulator.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{OutputFormat, PairName};

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration, arguments, or I/O: exit code 2.
    Config(String),
    /// Solver or stability failure: exit code 3.
    Numerical(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "magnon-sim",
    about = "Gaussian dynamics, stability, and entanglement of a driven chiral \
             cavity coupled to two magnon modes",
    after_help = "Frequencies in configs are cyclic GHz; internal math runs in \
                  angular rad/ns. Presets: fig2 fig3a..fig3f fig4 fig5a fig5b \
                  fig6 fig7a fig7b."
)]
struct Cli {
    /// JSON configuration file (merged over defaults/preset).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Named built-in parameter set.
    #[arg(long, global = true)]
    preset: Option<String>,

    /// Dotted-key override, e.g. --set params.nu_c=9.5 (repeatable).
    #[arg(long = "set", global = true)]
    sets: Vec<String>,

    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Output format.
    #[arg(long, global = true, value_parser = ["csv", "json"])]
    format: Option<String>,

    /// Parallel worker cap (default: all cores; env MAGNON_SIM_JOBS).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the derived drive/coupling parameters and the sideband
    /// suppression ratio.
    Params,
    /// Grid of stability verdicts and spectral margins.
    StabilityMap,
    /// Grid of stability plus pairwise entanglement of the steady state.
    EntMap,
    /// Propagate one model from vacuum and tabulate populations.
    Evolve,
    /// Co-propagate a model pair and report their divergence.
    Compare {
        /// Which pair to compare (overrides the config).
        #[arg(long, value_parser = ["full-rwa", "rwa-effective"])]
        pair: Option<String>,
    },
    /// Entanglement vs coupling ratio curves for the interaction-only model.
    RatioSweep,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let mut cfg = config::resolve(cli.preset.as_deref(), cli.config.as_deref(), &cli.sets)?;
    if let Some(j) = cli.jobs {
        cfg.jobs = Some(j);
    } else if cfg.jobs.is_none() {
        if let Ok(env) = std::env::var("MAGNON_SIM_JOBS") {
            let j: usize = env.parse().map_err(|_| {
                CliError::Config(format!("MAGNON_SIM_JOBS must be an integer, got '{env}'"))
            })?;
            cfg.jobs = Some(j);
        }
    }

    let format = match cli.format.as_deref() {
        Some("csv") => OutputFormat::Csv,
        Some("json") => OutputFormat::Json,
        Some(other) => return Err(CliError::Config(format!("unknown format '{other}'"))),
        None => cfg.output.format.unwrap_or(OutputFormat::Csv),
    };
    let path = cli
        .output
        .clone()
        .or_else(|| cfg.output.path.clone().map(PathBuf::from));
    let path = path.as_deref();

    let dispatch = |cfg: &config::RunConfig| -> Result<(), CliError> {
        match &cli.command {
            Command::Params => commands::params(cfg, path, format),
            Command::StabilityMap => commands::stability_map(cfg, path, format),
            Command::EntMap => commands::ent_map(cfg, path, format),
            Command::Evolve => commands::evolve(cfg, path, format),
            Command::Compare { pair } => {
                let pair_flag = match pair.as_deref() {
                    Some("full-rwa") => Some(PairName::FullRwa),
                    Some("rwa-effective") => Some(PairName::RwaEffective),
                    Some(other) => return Err(CliError::Config(format!("unknown pair '{other}'"))),
                    None => None,
                };
                commands::compare(cfg, pair_flag, path, format)
            }
            Command::RatioSweep => commands::ratio_sweep_cmd(cfg, path, format),
        }
    };

    match cfg.jobs {
        Some(j) if j > 0 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j)
                .build()
                .map_err(|e| CliError::Config(format!("cannot build worker pool: {e}")))?;
            pool.install(|| dispatch(&cfg))
        }
        _ => dispatch(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CliError::Config(_) => ExitCode::from(2),
                CliError::Numerical(_) => ExitCode::from(3),
            }
        }
    }
}
