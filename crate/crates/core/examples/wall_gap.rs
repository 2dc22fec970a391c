//! AIT* and BIT* side by side on the wall-gap scenario, on the same seed.
//!
//! ```text
//! cargo run --release --example wall_gap -- [dimension] [seconds]
//! ```

use aitstar::{make_wall_gap, solve, ClockMode, Planner, PlannerConfig, StopCondition};

fn main() {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(4, |s| s.parse().expect("dimension"));
    let budget: f64 = args.next().map_or(1.0, |s| s.parse().expect("seconds"));
    let problem = make_wall_gap(n).expect("scenario").to_problem().expect("problem");
    let config = PlannerConfig {
        resolution: 1e-4,
        ..Default::default()
    };

    let planners = [
        ("AIT*", Planner::ait_star(&problem, config.clone()).expect("config")),
        ("BIT*", Planner::bit_star(&problem, config).expect("config")),
    ];
    for (name, mut planner) in planners {
        let outcome = solve(&mut planner, StopCondition::time(budget), ClockMode::Wall);
        let c = planner.counters();
        match outcome.trace.initial() {
            Some(first) => println!(
                "{name}: first {:.4} at {:.2} ms, final {:.4} ({} improvements, {} motion checks, {} reverse expansions)",
                first.cost,
                first.time_s * 1e3,
                outcome.trace.final_cost,
                outcome.trace.events.len(),
                c.motion_checks,
                c.reverse_expansions
            ),
            None => println!("{name}: no solution in {budget} s"),
        }
    }
}
