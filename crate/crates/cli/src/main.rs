use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use polling_experiments::{analyze, check_config, load_config, run_scenario, study, CliError, StudyKind, StudySpec};

/// Two-queue Markovian polling system with a priority queue: analysis,
/// simulation and limit-regime studies.
#[derive(Parser)]
#[command(name = "mpoll", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a configuration file and print the derived model.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write derived quantities and analytic means.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate a configuration and compare it with the analytic means.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Service starts to simulate, warm-up included.
        #[arg(long, default_value_t = 200_000)]
        customers: u64,
        /// Fraction of the customers discarded as warm-up.
        #[arg(long, default_value_t = 0.1)]
        warmup: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep toward a limit regime and compare scaled delays with the limit law.
    Study {
        /// heavy-traffic, large-switchover or double-limit (experimental).
        #[arg(long)]
        kind: StudyKind,
        /// Configuration shape; loads or switch-overs are set per sweep point.
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated sweep values (loads, or mean total switch-over times).
        #[arg(long, value_delimiter = ',')]
        sweep: Option<Vec<f64>>,
        /// Service starts per sweep point, warm-up included.
        #[arg(long)]
        customers: Option<u64>,
        #[arg(long, default_value_t = 0.1)]
        warmup: f64,
        /// Mean total switch-over time of the double-limit study.
        #[arg(long, default_value_t = 100.0)]
        switchover: f64,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate { config } => {
            let c = load_config(&config)?;
            let model = check_config(&c)?;
            println!("configuration is valid");
            for (k, v) in polling_experiments::scenario::derived_rows(&model) {
                println!("  {k:<10} {v}");
            }
        }
        Command::Analyze { config, out } => {
            let c = load_config(&config)?;
            let means = analyze(&c, &out)?;
            for note in &means.notes {
                eprintln!("note: {note}");
            }
            println!("wrote {}", out.display());
        }
        Command::Simulate {
            config,
            seed,
            customers,
            warmup,
            out,
        } => {
            let report = run_scenario(&config, &out, seed, customers, warmup)?;
            for note in &report.analytic.notes {
                eprintln!("note: {note}");
            }
            println!("wrote {}", out.display());
        }
        Command::Study {
            kind,
            config,
            seed,
            out,
            sweep,
            customers,
            warmup,
            switchover,
        } => {
            let base = load_config(&config)?;
            let mut spec = StudySpec::new(kind, base, out);
            spec.seed = seed;
            spec.warmup = warmup;
            spec.double_limit_switchover = switchover;
            if let Some(s) = sweep {
                spec.sweep = s;
            }
            if let Some(n) = customers {
                spec.served = n;
            }
            let outcome = study(&spec)?;
            print!(
                "{}",
                std::fs::read_to_string(&outcome.summary_txt).map_err(|e| CliError::Io {
                    path: outcome.summary_txt.clone(),
                    source: e,
                })?
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
