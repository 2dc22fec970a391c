//! Near-optimal reference cost for a built-in scenario from a dense random
//! geometric graph, searched by lazy edge-queue A*.
//!
//! ```text
//! cargo run --release --example dense_reference -- [scenario] [dimension] [samples] [resolution] [seed]
//! ```

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use aitstar::kdtree::KdTree;
use aitstar::space::{distance, rgg_radius};
use aitstar::{InformedSampler, Scenario, State, ValidityOracle};

#[derive(PartialEq)]
struct Key(f64, f64, usize, usize);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0
            .total_cmp(&other.0)
            .then(self.1.total_cmp(&other.1))
            .then(self.2.cmp(&other.2))
            .then(self.3.cmp(&other.3))
    }
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let name = args.get(1).map_or("wall_gap", String::as_str);
    let n: usize = args.get(2).map_or(4, |s| s.parse().expect("dimension"));
    let samples: usize = args.get(3).map_or(100_000, |s| s.parse().expect("sample count"));
    let resolution: f64 = args.get(4).map_or(1e-4, |s| s.parse().expect("resolution"));
    let seed: u64 = args.get(5).map_or(0, |s| s.parse().expect("seed"));

    let scenario = Scenario::builtin(name, n).expect("scenario");
    let problem = scenario.to_problem().expect("problem");
    let mut oracle = ValidityOracle::for_problem(&problem, resolution);
    let mut sampler = InformedSampler::new(&problem, seed);

    let mut states: Vec<State> = vec![problem.start().clone()];
    states.extend(problem.goals().iter().cloned());
    let goals = 1..states.len();
    for s in sampler.sample(&problem, samples, f64::INFINITY).expect("uniform samples") {
        if oracle.is_valid_state(&s) {
            states.push(s);
        }
    }
    let mut index = KdTree::new(n);
    for (i, s) in states.iter().enumerate() {
        index.insert(s, i);
    }
    let r = rgg_radius(n, states.len(), problem.space().volume(), 1.001);
    let h = |x: &State| {
        problem
            .goals()
            .iter()
            .map(|g| distance(x, g))
            .fold(f64::INFINITY, f64::min)
    };

    let mut g = vec![f64::INFINITY; states.len()];
    let mut parent = vec![usize::MAX; states.len()];
    let mut closed = vec![false; states.len()];
    let mut queue = BinaryHeap::new();
    g[0] = 0.0;
    closed[0] = true;
    let push_edges = |u: usize, g_u: f64, closed: &[bool], queue: &mut BinaryHeap<Reverse<Key>>| {
        for v in index.within_radius(&states[u], r) {
            if !closed[v] {
                let through = g_u + distance(&states[u], &states[v]);
                queue.push(Reverse(Key(through + h(&states[v]), through, u, v)));
            }
        }
    };
    push_edges(0, 0.0, &closed, &mut queue);
    let mut best = None;
    while let Some(Reverse(Key(_, through, u, v))) = queue.pop() {
        if closed[v] || !oracle.is_valid_motion(&states[u], &states[v]) {
            continue;
        }
        closed[v] = true;
        g[v] = through;
        parent[v] = u;
        if goals.contains(&v) {
            best = Some(v);
            break;
        }
        push_edges(v, through, &closed, &mut queue);
    }

    println!("scenario {name} dimension {n} states {} radius {r:.6}", states.len());
    match best {
        Some(goal) => {
            let mut hops = 0;
            let mut cur = goal;
            while cur != 0 {
                cur = parent[cur];
                hops += 1;
            }
            println!("cost {:.12} hops {hops}", g[goal]);
        }
        None => println!("cost inf"),
    }
    if let Some(reference) = scenario.reference_cost {
        println!("analytic infimum {reference:.12}");
    }
    let c = oracle.counters();
    println!("motion checks {} interpolated states {}", c.motion_checks, c.interpolated_states);
}
