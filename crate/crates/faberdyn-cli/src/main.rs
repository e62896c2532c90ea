//! `faberdyn` — polynomial-propagator experiments on non-reciprocal chains.
//!
//! Exit codes: 0 success, 1 run failure, 2 configuration error. Failures are
//! reported on stderr as a single JSON object so callers can parse them.

mod config;
mod experiments;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{load_file, resolve, CliError, CliResult, FileConfig, Overrides, EXPERIMENTS};

#[derive(Parser)]
#[command(
    name = "faberdyn",
    version,
    about = "Non-unitary dynamics of non-reciprocal chains via polynomial propagation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its artifacts (CSV files + manifest.json).
    #[command(allow_negative_numbers = true)]
    Run {
        /// Experiment name (see `list-experiments`).
        experiment: String,
        /// TOML configuration file; flags override its values.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Number of lattice sites.
        #[arg(long = "L")]
        n_sites: Option<usize>,
        /// Hopping asymmetry gamma.
        #[arg(long)]
        gamma: Option<f64>,
        /// Ising anisotropy Delta.
        #[arg(long)]
        delta: Option<f64>,
        /// Symmetric hopping J (the unit of energy).
        #[arg(long)]
        j: Option<f64>,
        /// Final time.
        #[arg(long = "t")]
        t_final: Option<f64>,
        /// Step size (trajectory experiments: snapshot spacing).
        #[arg(long)]
        dt: Option<f64>,
        /// Boundary condition: open/obc or periodic/pbc.
        #[arg(long)]
        boundary: Option<String>,
        /// Base RNG seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Ensemble size for trajectory experiments.
        #[arg(long = "n-traj")]
        n_trajectories: Option<usize>,
        /// Worker threads (0 = library default). Falls back to the
        /// FABERDYN_THREADS environment variable when absent.
        #[arg(long)]
        threads: Option<usize>,
        /// Output directory (artifacts land in <out-dir>/<experiment>/).
        #[arg(long = "out-dir")]
        out_dir: Option<String>,
    },
    /// List the available experiments in stable order.
    ListExperiments,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            return fail(&CliError::Config(e.to_string()));
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}

fn fail(e: &CliError) -> ExitCode {
    let record = serde_json::json!({ "error": e.kind(), "message": e.message() });
    eprintln!("{record}");
    ExitCode::from(e.exit_code() as u8)
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::ListExperiments => {
            for (name, description) in EXPERIMENTS {
                println!("{name:<18} {description}");
            }
            Ok(())
        }
        Command::Run {
            experiment,
            config,
            n_sites,
            gamma,
            delta,
            j,
            t_final,
            dt,
            boundary,
            seed,
            n_trajectories,
            threads,
            out_dir,
        } => {
            let file = match &config {
                Some(path) => load_file(path)?,
                None => FileConfig::default(),
            };
            let threads = match threads {
                Some(n) => Some(n),
                None => threads_from_env()?,
            };
            let flags = Overrides {
                n_sites,
                gamma,
                delta,
                j,
                t_final,
                dt,
                boundary,
                seed,
                n_trajectories,
                threads,
                out_dir,
            };
            let resolved = resolve(&experiment, &file, &flags)?;
            configure_thread_pool(resolved.threads)?;
            experiments::run(&resolved)?;
            println!(
                "wrote {}",
                resolved.out_dir.join(&resolved.experiment).display()
            );
            Ok(())
        }
    }
}

/// FABERDYN_THREADS, used when --threads is absent (flag > env > file).
fn threads_from_env() -> CliResult<Option<usize>> {
    match std::env::var("FABERDYN_THREADS") {
        Ok(v) => v.trim().parse::<usize>().map(Some).map_err(|_| {
            CliError::Config(format!(
                "FABERDYN_THREADS must be a non-negative integer, got `{v}`"
            ))
        }),
        Err(_) => Ok(None),
    }
}

fn configure_thread_pool(threads: usize) -> CliResult<()> {
    if threads == 0 {
        return Ok(());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot size the thread pool: {e}")))
}
