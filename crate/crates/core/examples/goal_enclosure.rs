//! The goal sits inside a box whose only opening faces away from the start.
//! The reverse search's first heuristic leads straight into the box wall,
//! so the forward search keeps invalidating edges and the reverse search
//! repairs itself around them.
//!
//! ```text
//! cargo run --release --example goal_enclosure -- [dimension]
//! ```

use aitstar::{make_goal_enclosure, Event, Planner, PlannerConfig};

fn main() {
    let n: usize = std::env::args().nth(1).map_or(4, |s| s.parse().expect("dimension"));
    let problem = make_goal_enclosure(n).expect("scenario").to_problem().expect("problem");
    let config = PlannerConfig {
        resolution: 1e-4,
        ..Default::default()
    };
    let mut planner = Planner::ait_star(&problem, config).expect("config");

    let mut invalid = 0;
    let mut repair_work = 0;
    for i in 0..200_000u64 {
        let before = planner.reverse_search().expansions();
        match planner.iterate() {
            Event::EdgeEvaluated { valid: false } => {
                invalid += 1;
                repair_work += planner.reverse_search().expansions() - before;
            }
            Event::SolutionImproved { cost } => {
                println!(
                    "iteration {i}: cost {cost:.4} after {invalid} invalid edges ({repair_work} repair expansions)"
                );
                break;
            }
            _ => {}
        }
    }
    if let Some(path) = planner.solution_path() {
        for x in &path {
            println!("  {:?}", &x[..]);
        }
    }
}
