//! Every planner in the crate on one scenario under a logical clock, so the
//! numbers are identical from run to run.
//!
//! ```text
//! cargo run --release --example baselines_comparison -- [scenario] [dimension] [seconds]
//! ```

use aitstar::bench::{build_planner, ExperimentConfig, PLANNERS};
use aitstar::{solve, ClockMode, Scenario, StopCondition};

fn main() {
    let mut args = std::env::args().skip(1);
    let scenario = args.next().unwrap_or_else(|| "wall_gap".to_string());
    let n: usize = args.next().map_or(4, |s| s.parse().expect("dimension"));
    let budget: f64 = args.next().map_or(2.0, |s| s.parse().expect("seconds"));
    let problem = Scenario::builtin(&scenario, n)
        .and_then(|s| s.to_problem())
        .expect("built-in scenario");
    let mut config = ExperimentConfig::new(&scenario, n, &PLANNERS);
    config.resolution = 1e-4;

    println!("{scenario} R{n}, {budget} logical seconds");
    println!("{:<11} {:>12} {:>10} {:>10} {:>10}", "planner", "first (ms)", "first", "final", "checks");
    for name in PLANNERS {
        let mut planner = build_planner(name, &problem, &config, 1).expect("planner");
        let outcome = solve(planner.as_mut(), StopCondition::time(budget), ClockMode::Logical);
        let first = outcome.trace.initial();
        println!(
            "{name:<11} {:>12} {:>10} {:>10.4} {:>10}",
            first.map_or("-".to_string(), |e| format!("{:.2}", e.time_s * 1e3)),
            first.map_or("-".to_string(), |e| format!("{:.4}", e.cost)),
            outcome.trace.final_cost,
            planner.counters().motion_checks
        );
    }
}
