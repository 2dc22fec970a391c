//! Benchmark driver.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use aitstar::bench::{run_experiment, summarize_csv, BenchError, ExperimentConfig};
use aitstar::scenarios::{Scenario, BUILTIN_SCENARIOS};

#[derive(Parser)]
#[command(name = "bench", about = "Seeded motion-planning benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its CSV trace and summary.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        trials: Option<u32>,
        /// Time budget per trial in seconds.
        #[arg(long)]
        budget: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Measure time in deterministic logical ticks.
        #[arg(long)]
        logical_time: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute the summary of a trace CSV and print it.
    Summarize {
        #[arg(long)]
        csv: PathBuf,
        /// Comma-separated time grid; defaults to the grid of the neighboring summary.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
    },
    /// List the built-in scenarios.
    Scenarios,
}

fn run(cli: Cli) -> Result<(), BenchError> {
    match cli.command {
        Command::Run {
            config,
            trials,
            budget,
            seed,
            logical_time,
            out,
        } => {
            let mut c = ExperimentConfig::load(&config)?;
            c.trials = trials.unwrap_or(c.trials);
            c.budget_s = budget.or(c.budget_s);
            c.seed = seed.unwrap_or(c.seed);
            c.logical_time |= logical_time;
            c.out_dir = out.unwrap_or(c.out_dir);
            c.validate()?;
            let output = run_experiment(&c)?;
            for p in &output.summary.planners {
                println!(
                    "{:<11} success {:>5.1}%  initial time {:.6} s  final cost {:.6}",
                    p.planner,
                    100.0 * p.success_rate,
                    p.initial_time.median,
                    p.final_cost.median
                );
            }
            println!("wrote {}", output.csv_path.display());
            println!("wrote {}", output.summary_path.display());
        }
        Command::Summarize { csv, grid } => {
            print!("{}", summarize_csv(&csv, grid)?.to_toml()?);
        }
        Command::Scenarios => {
            for name in BUILTIN_SCENARIOS {
                let s = Scenario::builtin(name, 4)?;
                let infimum = s.reference_cost.map_or("unknown".to_string(), |c| format!("{c:.6}"));
                println!("{name:<15} {} obstacles in R^4, cost infimum {infimum}", s.obstacles.len());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bench: {e}");
            ExitCode::FAILURE
        }
    }
}
