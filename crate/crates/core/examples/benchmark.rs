//! Runs an experiment through the library API, writes the CSV and summary
//! and prints the median cost over time. Without a config, a small wall-gap
//! experiment is written to the temporary directory.
//!
//! ```text
//! cargo run --release --example benchmark -- [config.toml]
//! ```

use aitstar::bench::{run_experiment, ExperimentConfig};

fn main() {
    let config = match std::env::args().nth(1) {
        Some(path) => ExperimentConfig::load(path.as_ref()).expect("config"),
        None => {
            let mut c = ExperimentConfig::new("wall_gap", 2, &["aitstar", "bitstar", "rrtstar"]);
            c.trials = 10;
            c.budget_s = Some(1.0);
            c.resolution = 1e-3;
            c.logical_time = true;
            c.out_dir = std::env::temp_dir().join("aitstar_benchmark_example");
            c
        }
    };
    let output = run_experiment(&config).expect("experiment");

    let summary = &output.summary;
    print!("{:<11}", "t (s)");
    for p in &summary.planners {
        print!(" {:>12}", p.planner);
    }
    println!();
    for (i, t) in summary.time_grid.iter().enumerate() {
        print!("{t:<11}");
        for p in &summary.planners {
            print!(" {:>12.4}", p.cost_at[i].median);
        }
        println!();
    }
    for p in &summary.planners {
        println!("{}: success {:.0}%", p.planner, 100.0 * p.success_rate);
    }
    println!("wrote {} and {}", output.csv_path.display(), output.summary_path.display());
}
