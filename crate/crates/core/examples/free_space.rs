//! AIT* in an obstacle-free unit cube. The first solution is close to the
//! straight line and later batches shrink the informed set around it.
//!
//! ```text
//! cargo run --release --example free_space -- [dimension]
//! ```

use aitstar::{make_free, solve, ClockMode, Planner, PlannerConfig, StopCondition};

fn main() {
    let n: usize = std::env::args().nth(1).map_or(4, |s| s.parse().expect("dimension"));
    let problem = make_free(n).expect("scenario").to_problem().expect("problem");
    let mut planner = Planner::ait_star(&problem, PlannerConfig::default()).expect("config");
    let outcome = solve(&mut planner, StopCondition::time(0.5), ClockMode::Wall);

    println!("R{n}, straight-line cost {:.6}", problem.min_cost());
    for e in &outcome.trace.events {
        println!("{:>9.4} s  cost {:.6}  samples {}", e.time_s, e.cost, e.counters.samples);
    }
    let solution = outcome.solution.expect("free space is always solved");
    println!(
        "final {:.6} after {} batches, {} waypoints",
        solution.cost,
        planner.batches(),
        solution.path.len()
    );
}
