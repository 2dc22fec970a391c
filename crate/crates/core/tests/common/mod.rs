//! Independent oracles and random instances shared by the integration and
//! acceptance tests.
#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use aitstar::graph::{Graph, StateId};
use aitstar::reverse_search::ReverseSearch;
use aitstar::scenarios::{AxisAlignedBox, Scenario, ValidityOracle};
use aitstar::space::{ProblemInstance, State};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Unit square with 1 to 6 random boxes and free start and goal at least
/// 0.3 apart.
pub fn random_world(rng: &mut ChaCha8Rng) -> Scenario {
    let boxes = rng.random_range(1..=6);
    let obstacles: Vec<AxisAlignedBox> = (0..boxes)
        .map(|_| {
            let w: f64 = rng.random_range(0.05..0.3);
            let h: f64 = rng.random_range(0.05..0.3);
            let x = rng.random_range(0.0..1.0 - w);
            let y = rng.random_range(0.0..1.0 - h);
            AxisAlignedBox::new(vec![x, y], vec![x + w, y + h])
        })
        .collect();
    loop {
        let start = vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)];
        let goal = vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)];
        if obstacles.iter().any(|b| b.contains(&start) || b.contains(&goal)) || dist(&start, &goal) < 0.3 {
            continue;
        }
        return Scenario {
            name: "random".into(),
            dimension: 2,
            start,
            goal,
            reference_cost: None,
            obstacles: obstacles.clone(),
        };
    }
}

/// A graph of up to `samples` valid uniform states with a fixed radius.
pub fn random_graph(rng: &mut ChaCha8Rng, problem: &ProblemInstance, samples: usize, radius: f64) -> Graph {
    let mut g = Graph::new(problem, 1.001);
    let mut oracle = ValidityOracle::for_problem(problem, 1e-3);
    let states: Vec<State> = (0..samples)
        .map(|_| State::new(vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)]))
        .collect();
    g.add_samples(states, &mut oracle);
    g.set_radius(radius);
    g
}

/// Undirected edges of the implicit graph by brute force: pairs within the
/// radius, plus forward tree edges, without blacklisted pairs.
pub fn explicit_edges(g: &Graph) -> Vec<Vec<(StateId, f64)>> {
    let ids: Vec<StateId> = g.ids().collect();
    let r2 = g.radius() * g.radius();
    let mut adj: Vec<Vec<(StateId, f64)>> = vec![Vec::new(); g.capacity()];
    let add = |adj: &mut Vec<Vec<(StateId, f64)>>, a: StateId, b: StateId| {
        if a != b && !g.invalid_edges().contains(a, b) && !adj[a.index()].iter().any(|(y, _)| *y == b) {
            let c = dist(g.state(a), g.state(b));
            adj[a.index()].push((b, c));
            adj[b.index()].push((a, c));
        }
    };
    for (i, &a) in ids.iter().enumerate() {
        for &b in &ids[i + 1..] {
            let d2: f64 = g.state(a).iter().zip(g.state(b).iter()).map(|(x, y)| (x - y) * (x - y)).sum();
            if d2 <= r2 {
                add(&mut adj, a, b);
            }
        }
    }
    for &a in &ids {
        if let Some(p) = g.forward().parent(a) {
            add(&mut adj, a, p);
        }
    }
    adj
}

#[derive(PartialEq)]
struct Dist(f64);
impl Eq for Dist {}
impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Dist {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Multi-source Dijkstra.
pub fn dijkstra(adj: &[Vec<(StateId, f64)>], sources: &[StateId]) -> Vec<f64> {
    let mut d = vec![f64::INFINITY; adj.len()];
    let mut heap = BinaryHeap::new();
    for &s in sources {
        d[s.index()] = 0.0;
        heap.push(Reverse((Dist(0.0), s)));
    }
    while let Some(Reverse((Dist(du), u))) = heap.pop() {
        if du > d[u.index()] {
            continue;
        }
        for &(v, c) in &adj[u.index()] {
            let nd = du + c;
            if nd < d[v.index()] {
                d[v.index()] = nd;
                heap.push(Reverse((Dist(nd), v)));
            }
        }
    }
    d
}

/// Cost-to-go under the admissible edge estimate.
pub fn cost_to_go_oracle(g: &Graph) -> Vec<f64> {
    dijkstra(&explicit_edges(g), g.goals())
}

/// Keeps only edges that pass a fresh collision check.
pub fn valid_edges(g: &Graph, resolution: f64) -> Vec<Vec<(StateId, f64)>> {
    let mut oracle = ValidityOracle::for_problem(g.problem(), resolution);
    let mut adj = explicit_edges(g);
    for a in 0..adj.len() {
        let sa = StateId(a as u32);
        let kept: Vec<(StateId, f64)> = adj[a]
            .iter()
            .copied()
            .filter(|(b, _)| oracle.is_valid_motion(g.state(sa), g.state(*b)))
            .collect();
        adj[a] = kept;
    }
    adj
}

/// Optimal start-to-goal cost over the fully evaluated graph.
pub fn optimal_cost_oracle(g: &Graph, resolution: f64) -> f64 {
    let d = dijkstra(&valid_edges(g, resolution), &[g.start()]);
    g.goals().iter().map(|x| d[x.index()]).fold(f64::INFINITY, f64::min)
}

/// Largest violation of `h(x) = oracle(x)` over stored states; infinite
/// mismatches count as infinite.
pub fn max_label_error(rs: &ReverseSearch, g: &Graph, oracle: &[f64]) -> f64 {
    g.ids()
        .map(|x| {
            let (a, b) = (rs.cost_to_go(x), oracle[x.index()]);
            if a == b {
                0.0
            } else {
                (a - b).abs()
            }
        })
        .fold(0.0, f64::max)
}

/// Largest violation of `h(x) ≤ ĉ(x, y) + h(y)` over graph edges.
pub fn consistency_violation(rs: &ReverseSearch, g: &Graph) -> f64 {
    let adj = explicit_edges(g);
    let mut worst = 0.0f64;
    for x in g.ids() {
        for &(y, c) in &adj[x.index()] {
            let (hx, hy) = (rs.cost_to_go(x), rs.cost_to_go(y));
            if hx.is_finite() && hy.is_finite() {
                worst = worst.max(hx - (c + hy));
            }
        }
    }
    worst
}

/// Picks a random non-blacklisted edge within the radius.
pub fn random_edge(rng: &mut ChaCha8Rng, g: &mut Graph) -> Option<(StateId, StateId)> {
    let ids: Vec<StateId> = g.ids().collect();
    for _ in 0..100 {
        let x = ids[rng.random_range(0..ids.len())];
        let ns: Vec<StateId> = g.neighbors(x);
        if !ns.is_empty() {
            return Some((x, ns[rng.random_range(0..ns.len())]));
        }
    }
    None
}

use aitstar::planner::{Event, Planner, PlannerConfig};
use aitstar::reverse_search::Termination;

/// Worst deviations seen by [`reverse_search_oracle`].
#[derive(Debug, Default)]
pub struct OracleReport {
    pub graphs: usize,
    pub invalidations: usize,
    pub dijkstra_error: f64,
    pub restart_error: f64,
    pub inconsistency: f64,
    pub degradation: f64,
}

impl OracleReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.dijkstra_error <= tol && self.restart_error <= tol && self.inconsistency <= tol && self.degradation <= tol
    }
}

pub fn labels(rs: &ReverseSearch, g: &Graph) -> Vec<f64> {
    (0..g.capacity()).map(|i| rs.cost_to_go(StateId(i as u32))).collect()
}

/// Largest decrease of any label from `before` to `after`.
pub fn decrease(before: &[f64], after: &[f64]) -> f64 {
    before
        .iter()
        .zip(after)
        .map(|(b, a)| if a >= b { 0.0 } else { b - a })
        .fold(0.0, f64::max)
}

pub fn label_difference(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| if x == y { 0.0 } else { (x - y).abs() })
        .fold(0.0, f64::max)
}

/// Labels of a fresh search on a copy of `g`.
pub fn restart_labels(g: &Graph) -> Vec<f64> {
    let mut copy = g.clone();
    let mut rs = ReverseSearch::new();
    rs.recompute(&mut copy, Termination::Quiescence, |_| false);
    labels(&rs, &copy)
}

/// Random R² graphs: quiescent labels against Dijkstra, then `cuts` random
/// invalidations each repaired incrementally and cross-checked against
/// Dijkstra and a restart.
pub fn reverse_search_oracle(graphs: usize, cuts: usize, seed: u64) -> OracleReport {
    let mut report = OracleReport::default();
    for i in 0..graphs {
        let mut rng = rng(seed + i as u64);
        let world = random_world(&mut rng);
        let problem = world.to_problem().unwrap();
        let samples = rng.random_range(20..=198);
        let radius = rng.random_range(0.08..0.35);
        let mut g = random_graph(&mut rng, &problem, samples, radius);
        let mut rs = ReverseSearch::new();
        rs.recompute(&mut g, Termination::Quiescence, |_| false);
        assert_eq!(rs.queue_len(), 0);
        assert!(rs.queue_matches_inconsistent(&g));
        report.dijkstra_error = report.dijkstra_error.max(max_label_error(&rs, &g, &cost_to_go_oracle(&g)));
        report.inconsistency = report.inconsistency.max(consistency_violation(&rs, &g));
        for _ in 0..cuts {
            let Some(edge) = random_edge(&mut rng, &mut g) else {
                break;
            };
            let before = labels(&rs, &g);
            rs.repair(&mut g, edge, Termination::Quiescence, |_| false);
            assert!(rs.queue_matches_inconsistent(&g));
            report.invalidations += 1;
            let after = labels(&rs, &g);
            report.dijkstra_error = report.dijkstra_error.max(max_label_error(&rs, &g, &cost_to_go_oracle(&g)));
            report.restart_error = report.restart_error.max(label_difference(&after, &restart_labels(&g)));
            report.inconsistency = report.inconsistency.max(consistency_violation(&rs, &g));
            report.degradation = report.degradation.max(decrease(&before, &after));
        }
        report.graphs += 1;
    }
    report
}

pub fn small_config(seed: u64, batch_size: usize) -> PlannerConfig {
    PlannerConfig {
        seed,
        batch_size,
        resolution: 1e-3,
        ..Default::default()
    }
}

/// Worst gap between the planner cost and the explicit-graph optimum at
/// batch exhaustion, over `instances` random R² worlds with one or two
/// batches each. Returns `(checks, worst gap)`.
pub fn batch_optimality(instances: usize, seed: u64, adaptive: bool) -> (usize, f64) {
    let mut worst = 0.0f64;
    let mut checks = 0;
    for i in 0..instances {
        let mut rng = rng(seed + i as u64);
        let world = random_world(&mut rng);
        let problem = world.to_problem().unwrap();
        let config = small_config(seed + i as u64, 100);
        let mut planner = if adaptive {
            Planner::ait_star(&problem, config).unwrap()
        } else {
            Planner::bit_star(&problem, config).unwrap()
        };
        let batches = 1 + i % 2;
        planner.search_batch();
        for _ in 0..batches {
            planner.add_batch();
            planner.search_batch();
            let optimum = optimal_cost_oracle(planner.graph(), 1e-3);
            let cost = planner.cost();
            let gap = if cost == optimum { 0.0 } else { (cost - optimum).abs() };
            worst = worst.max(gap);
            checks += 1;
        }
    }
    (checks, worst)
}

/// Worst invariant violations seen by [`fuzz_invariants`].
#[derive(Debug, Default)]
pub struct FuzzReport {
    pub runs: usize,
    pub iterations: u64,
    pub checkpoints: usize,
    pub invalidations_checked: usize,
    pub queue_mismatches: usize,
    pub inconsistency: f64,
    pub inadmissibility: f64,
    pub restart_error: f64,
    pub degradation: f64,
    pub non_monotone_costs: usize,
}

impl FuzzReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.queue_mismatches == 0
            && self.non_monotone_costs == 0
            && self.inconsistency <= tol
            && self.inadmissibility <= tol
            && self.restart_error <= tol
            && self.degradation <= tol
    }
}

pub fn settled(planner: &Planner) -> (Graph, ReverseSearch) {
    let mut g = planner.graph().clone();
    let mut rs = planner.reverse_search().clone();
    rs.settle(&mut g);
    (g, rs)
}

/// Random AIT* runs with label invariants checked along the way.
///
/// After every iteration the reverse queue must hold exactly the
/// inconsistent states. Every `every` iterations the labels are settled and
/// checked for consistency, admissibility against the fully evaluated graph
/// and equality with a restart. The first few invalidations of each run are
/// checked for monotone degradation.
pub fn fuzz_invariants(runs: usize, iterations: u64, every: u64, seed: u64) -> FuzzReport {
    let mut report = FuzzReport::default();
    for i in 0..runs {
        let mut rng = rng(seed + i as u64);
        let world = random_world(&mut rng);
        let problem = world.to_problem().unwrap();
        let batch = rng.random_range(10..=100);
        let mut planner = Planner::ait_star(&problem, small_config(seed + i as u64, batch)).unwrap();
        let mut last_cost = f64::INFINITY;
        let mut degradation_checks = 0;
        for it in 1..=iterations {
            let watch = degradation_checks < 3;
            let before = watch.then(|| {
                let (g, rs) = settled(&planner);
                labels(&rs, &g)
            });
            let event = planner.iterate();
            report.iterations += 1;
            if !planner.reverse_search().queue_matches_inconsistent(planner.graph()) {
                report.queue_mismatches += 1;
            }
            if planner.cost() > last_cost {
                report.non_monotone_costs += 1;
            }
            last_cost = planner.cost();
            if let (Event::EdgeEvaluated { valid: false }, Some(before)) = (event, before) {
                let (g, rs) = settled(&planner);
                report.degradation = report.degradation.max(decrease(&before, &labels(&rs, &g)));
                degradation_checks += 1;
                report.invalidations_checked += 1;
            }
            if it % every == 0 || it == iterations {
                let (g, rs) = settled(&planner);
                report.inconsistency = report.inconsistency.max(consistency_violation(&rs, &g));
                report.restart_error = report.restart_error.max(label_difference(&labels(&rs, &g), &restart_labels(&g)));
                let true_to_go = dijkstra(&valid_edges(&g, 1e-3), g.goals());
                for x in g.ids() {
                    let h = rs.cost_to_go(x);
                    if h > true_to_go[x.index()] {
                        report.inadmissibility = report.inadmissibility.max(h - true_to_go[x.index()]);
                    }
                }
                report.checkpoints += 1;
            }
        }
        report.runs += 1;
    }
    report
}
