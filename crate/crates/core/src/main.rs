use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use midanneal::harness::{default_output_dir, oracles, run_experiment, write_output, ExperimentConfig, ExperimentId};
use midanneal::{Error, Result};

/// Quantum-annealing experiments on mid-anneal measurement.
#[derive(Parser)]
#[command(name = "midanneal", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its output directory.
    Run {
        /// One of: lambda_mu_map, mu_slices, delta_ef_sweep, constraint_sweep,
        /// p0_vs_maxqd, delta_ehc_scan, hd_scan, size_scan.
        experiment: String,
        #[arg(long)]
        config: PathBuf,
        /// Output directory (default: the config's output_dir, else results/<experiment>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides master_seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Check a config file without running anything.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a named reference check: integrator, norm, collective, endpoint, mu_star, combinatorics.
    Oracle { name: String },
}

fn read_config(path: &PathBuf) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.clone(), source: e })?;
    ExperimentConfig::from_json(&text)
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { experiment, config, out, seed, threads } => {
            let id = ExperimentId::parse(&experiment)?;
            let mut cfg = read_config(&config)?;
            if cfg.experiment != id {
                return Err(Error::Config(format!("config describes {}, not {id}", cfg.experiment)));
            }
            if let Some(seed) = seed {
                cfg.master_seed = seed;
            }
            if threads.is_some() {
                cfg.threads = threads;
            }
            let dir = out.unwrap_or_else(|| default_output_dir(&cfg));
            let output = run_experiment(&cfg)?;
            write_output(&cfg, &output, &dir)?;
            println!("{}: {} records written to {}", id, output.records.len(), dir.display());
            Ok(())
        }
        Command::Validate { config } => {
            let cfg = read_config(&config)?;
            println!("{}: valid {} config", config.display(), cfg.experiment);
            Ok(())
        }
        Command::Oracle { name } => {
            let report = oracles::run_oracle(&name)?;
            println!("{report}");
            if report.passed {
                Ok(())
            } else {
                Err(Error::DataCorruption(format!("oracle {name} failed")))
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
