//! Drives the reverse search directly: labels one batch, then invalidates
//! edges of the reverse tree one at a time and compares the repaired labels
//! to a search from scratch.
//!
//! ```text
//! cargo run --release --example reverse_search_repair
//! ```

use aitstar::graph::Graph;
use aitstar::{make_free, InformedSampler, ReverseSearch, Termination, ValidityOracle};

fn main() {
    let problem = make_free(2).expect("scenario").to_problem().expect("problem");
    let mut oracle = ValidityOracle::for_problem(&problem, 1e-3);
    let mut sampler = InformedSampler::new(&problem, 7);
    let mut graph = Graph::new(&problem, 1.001);
    let states = sampler.sample(&problem, 300, f64::INFINITY).expect("box sampling");
    graph.add_samples(states, &mut oracle);
    graph.set_radius(0.15);

    let mut search = ReverseSearch::new();
    search.restart(&mut graph);
    search.settle(&mut graph);
    let start = graph.start();
    println!("h(start) = {:.6} over {} states", search.cost_to_go(start), graph.len());

    for round in 1..=5 {
        let Some(parent) = graph.reverse().parent(start) else {
            break;
        };
        let before = search.expansions();
        search.repair(&mut graph, (parent, start), Termination::Quiescence, |_| false);
        let repaired = search.cost_to_go(start);

        let mut fresh = graph.clone();
        let mut scratch = ReverseSearch::new();
        scratch.restart(&mut fresh);
        scratch.settle(&mut fresh);
        println!(
            "round {round}: cut ({}, {}), repair expanded {} states, h(start) {repaired:.6}, from scratch {:.6} ({} expansions)",
            parent.index(),
            start.index(),
            search.expansions() - before,
            scratch.cost_to_go(start),
            scratch.expansions()
        );
    }
}
