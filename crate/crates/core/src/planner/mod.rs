//! Batch-sampled anytime tree search with lazy edge evaluation.
//!
//! With [`HeuristicMode::Adaptive`] the forward search is ordered by the
//! cost-to-go labels of the [`ReverseSearch`], which is repaired whenever an
//! edge turns out to be invalid (AIT*). With [`HeuristicMode::Apriori`] the
//! same engine orders by the Euclidean distance to the goal and never runs
//! the reverse search (BIT*).

mod queue;

pub use queue::{EdgeQueue, ForwardEdgeKey};

use thiserror::Error;

use crate::graph::{Graph, StateId};
use crate::reverse_search::{ReverseSearch, Termination};
use crate::scenarios::{ValidityOracle, DEFAULT_RESOLUTION};
use crate::space::{distance, InformedSampler, ProblemInstance, State};
use crate::trace::{AnytimePlanner, Counters};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum HeuristicMode {
    /// Cost-to-go from the lazy reverse search.
    #[default]
    Adaptive,
    /// Euclidean distance to the nearest goal.
    Apriori,
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("batch size must be at least 1")]
    BatchSize,
    #[error("rewire factor must exceed 1, got {0}")]
    Eta(f64),
    #[error("collision resolution must be positive, got {0}")]
    Resolution(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlannerConfig {
    pub batch_size: usize,
    pub eta: f64,
    /// Fraction of the maximum extent.
    pub resolution: f64,
    pub heuristic: HeuristicMode,
    /// Drop samples outside the informed set at each new batch.
    pub pruning: bool,
    pub seed: u64,
    pub termination: Termination,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            batch_size: 100,
            eta: 1.001,
            resolution: DEFAULT_RESOLUTION,
            heuristic: HeuristicMode::Adaptive,
            pruning: true,
            seed: 0,
            termination: Termination::Lazy,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.batch_size < 1 {
            return Err(ConfigError::BatchSize);
        }
        if !(self.eta > 1.0) {
            return Err(ConfigError::Eta(self.eta));
        }
        if !(self.resolution > 0.0) {
            return Err(ConfigError::Resolution(self.resolution));
        }
        Ok(())
    }
}

/// Outcome of one iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Event {
    None,
    EdgeEvaluated { valid: bool },
    SolutionImproved { cost: f64 },
    BatchAdded { samples: usize },
}

/// One pass of the forward search, before any batch handling.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Step {
    Event(Event),
    /// The best queued edge cannot improve the solution, or the queue is
    /// empty.
    Exhausted,
}

#[derive(Clone, Debug)]
pub struct Planner {
    problem: ProblemInstance,
    config: PlannerConfig,
    graph: Graph,
    reverse: ReverseSearch,
    queue: EdgeQueue,
    oracle: ValidityOracle,
    sampler: InformedSampler,
    cost: f64,
    best_goal: Option<StateId>,
    queue_pops: u64,
    iterations: u64,
    batches: u64,
}

impl Planner {
    /// Seeds the approximation with the start and goals, runs the reverse
    /// search and queues the start's outgoing edges.
    pub fn new(problem: &ProblemInstance, config: PlannerConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let graph = Graph::new(problem, config.eta);
        let mut planner = Planner {
            problem: problem.clone(),
            graph,
            reverse: ReverseSearch::new(),
            queue: EdgeQueue::new(),
            oracle: ValidityOracle::for_problem(problem, config.resolution),
            sampler: InformedSampler::new(problem, config.seed),
            cost: f64::INFINITY,
            best_goal: None,
            queue_pops: 0,
            iterations: 0,
            batches: 0,
            config,
        };
        planner.reset_search();
        Ok(planner)
    }

    pub fn ait_star(problem: &ProblemInstance, config: PlannerConfig) -> Result<Self, ConfigError> {
        Planner::new(
            problem,
            PlannerConfig {
                heuristic: HeuristicMode::Adaptive,
                ..config
            },
        )
    }

    pub fn bit_star(problem: &ProblemInstance, config: PlannerConfig) -> Result<Self, ConfigError> {
        Planner::new(
            problem,
            PlannerConfig {
                heuristic: HeuristicMode::Apriori,
                ..config
            },
        )
    }

    pub fn config(&self) -> &PlannerConfig {
        &self.config
    }

    pub fn problem(&self) -> &ProblemInstance {
        &self.problem
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn reverse_search(&self) -> &ReverseSearch {
        &self.reverse
    }

    pub fn queue(&self) -> &EdgeQueue {
        &self.queue
    }

    /// Current solution cost, infinite before the first solution.
    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn batches(&self) -> u64 {
        self.batches
    }

    /// Cost-to-go estimate used to order the forward search.
    pub fn heuristic(&self, x: StateId) -> f64 {
        match self.config.heuristic {
            HeuristicMode::Adaptive => self.reverse.cost_to_go(x),
            HeuristicMode::Apriori => self.graph.h_hat_apriori(x),
        }
    }

    pub fn edge_key(&self, parent: StateId, child: StateId) -> ForwardEdgeKey {
        let g = self.graph.forward().cost(parent);
        let through = g + self.graph.c_hat(parent, child);
        ForwardEdgeKey(through + self.heuristic(child), through, g)
    }

    pub fn counters(&self) -> Counters {
        let checks = self.oracle.counters();
        Counters {
            samples: self.graph.len() as u64,
            state_checks: checks.state_checks,
            motion_checks: checks.motion_checks,
            interpolated_states: checks.interpolated_states,
            queue_pops: self.queue_pops,
            reverse_expansions: self.reverse.expansions(),
            iterations: self.iterations,
        }
    }

    /// Best path found so far.
    pub fn solution_path(&self) -> Option<Vec<State>> {
        let goal = self.best_goal?;
        Some(
            self.graph
                .forward_path(goal)
                .into_iter()
                .map(|x| self.graph.state(x).clone())
                .collect(),
        )
    }

    fn enqueue_outgoing(&mut self, x: StateId) {
        let start = self.graph.start();
        for (p, c) in self.graph.expand(x) {
            if c != start && c != p {
                let key = self.edge_key(p, c);
                self.queue.insert(p, c, key);
            }
        }
    }

    fn rekey_all(&mut self) {
        for (p, c) in self.queue.edges() {
            let key = self.edge_key(p, c);
            self.queue.rekey(p, c, key);
        }
    }

    fn rekey_incoming(&mut self, states: &mut Vec<StateId>) {
        states.sort_unstable();
        states.dedup();
        for &c in states.iter() {
            for k in 0..self.queue.in_degree(c) {
                let key = self.edge_key(self.queue.parent_at(c, k), c);
                self.queue.rekey_parent_at(c, k, key);
            }
        }
    }

    fn rekey_outgoing(&mut self, states: &[StateId]) {
        for &p in states {
            for k in 0..self.queue.out_degree(p) {
                let key = self.edge_key(p, self.queue.child_at(p, k));
                self.queue.rekey_child_at(p, k, key);
            }
        }
    }

    /// `Q_F ← expand(x_init)` followed by a restarted reverse search.
    fn reset_search(&mut self) {
        self.queue.clear();
        let start = self.graph.start();
        self.enqueue_outgoing(start);
        if self.config.heuristic == HeuristicMode::Adaptive {
            let queue = &self.queue;
            self.reverse
                .recompute(&mut self.graph, self.config.termination, |x| queue.touches(x));
            self.reverse.take_changed();
            self.rekey_all();
        }
    }

    /// Prunes (if enabled), samples a new batch in the informed set,
    /// shrinks the radius and restarts both searches. Returns the number of
    /// samples stored.
    pub fn add_batch(&mut self) -> usize {
        if self.config.pruning && self.cost.is_finite() && self.graph.prune(self.cost) > 0 {
            self.reverse.forget_removed(&self.graph);
        }
        let added = match self.sampler.sample(&self.problem, self.config.batch_size, self.cost) {
            Ok(states) => self.graph.add_samples(states, &mut self.oracle).len(),
            // zero-measure informed set: the current solution is optimal
            Err(_) => 0,
        };
        self.graph.update_radius(self.cost);
        self.batches += 1;
        self.reset_search();
        added
    }

    fn forward_step(&mut self) -> Step {
        let Some((_, parent, child)) = self.queue.pop() else {
            return Step::Exhausted;
        };
        self.queue_pops += 1;
        let g_parent = self.graph.forward().cost(parent);
        let c_hat = self.graph.c_hat(parent, child);
        let h = self.heuristic(child);
        if !(g_parent + c_hat + h < self.cost) {
            return Step::Exhausted;
        }
        if self.graph.forward().contains_edge(parent, child) {
            self.enqueue_outgoing(child);
            return Step::Event(Event::None);
        }
        if !(g_parent + c_hat < self.graph.forward().cost(child)) {
            return Step::Event(Event::None);
        }
        if self.graph.invalid_edges().contains(parent, child) {
            return Step::Event(Event::None);
        }
        let (a, b) = (self.graph.state(parent), self.graph.state(child));
        if !self.oracle.is_valid_motion(a, b) {
            self.handle_invalid_edge(parent, child);
            return Step::Event(Event::EdgeEvaluated { valid: false });
        }
        let edge_cost = distance(a, b);
        if g_parent + edge_cost + h < self.cost && g_parent + edge_cost < self.graph.forward().cost(child) {
            let old_parent = self.graph.forward().parent(child);
            let mut changed = self.graph.connect_forward(parent, child, edge_cost);
            changed.retain(|x| *x != child);
            self.rekey_outgoing(&[child]);
            self.rekey_outgoing(&changed);
            self.enqueue_outgoing(child);
            if let Some(q) = old_parent.filter(|q| !self.graph.within_radius(*q, child)) {
                self.handle_removed_edge(q, child);
            }
            if let Some((goal, cost)) = self.graph.best_goal() {
                if cost < self.cost {
                    self.cost = cost;
                    self.best_goal = Some(goal);
                    return Step::Event(Event::SolutionImproved { cost });
                }
            }
        }
        Step::Event(Event::EdgeEvaluated { valid: true })
    }

    /// A rewired far tree edge is no longer part of the graph.
    fn handle_removed_edge(&mut self, a: StateId, b: StateId) {
        self.queue.remove(a, b);
        self.queue.remove(b, a);
        if self.config.heuristic == HeuristicMode::Adaptive {
            let queue = &self.queue;
            self.reverse
                .edge_removed(&mut self.graph, (a, b), self.config.termination, |x| queue.touches(x));
            let mut changed = self.reverse.take_changed();
            self.rekey_incoming(&mut changed);
        }
    }

    fn handle_invalid_edge(&mut self, parent: StateId, child: StateId) {
        self.queue.remove(child, parent);
        match self.config.heuristic {
            HeuristicMode::Adaptive => {
                let queue = &self.queue;
                self.reverse.repair(
                    &mut self.graph,
                    (parent, child),
                    self.config.termination,
                    |x| queue.touches(x),
                );
                let mut changed = self.reverse.take_changed();
                self.rekey_incoming(&mut changed);
            }
            HeuristicMode::Apriori => {
                self.graph.invalidate(parent, child);
            }
        }
    }

    /// One iteration of the main loop. Adds a batch when the best queued
    /// edge cannot improve the current solution.
    pub fn iterate(&mut self) -> Event {
        self.iterations += 1;
        match self.forward_step() {
            Step::Event(e) => e,
            Step::Exhausted => Event::BatchAdded {
                samples: self.add_batch(),
            },
        }
    }

    /// Runs the forward search on the current approximation until the best
    /// queued edge cannot improve the solution, without adding a batch.
    /// Returns the number of iterations.
    pub fn search_batch(&mut self) -> u64 {
        let mut n = 0;
        loop {
            self.iterations += 1;
            n += 1;
            if self.forward_step() == Step::Exhausted {
                return n;
            }
        }
    }
}

impl AnytimePlanner for Planner {
    fn name(&self) -> &'static str {
        match self.config.heuristic {
            HeuristicMode::Adaptive => "aitstar",
            HeuristicMode::Apriori => "bitstar",
        }
    }

    fn step(&mut self) {
        self.iterate();
    }

    fn best_cost(&self) -> f64 {
        self.cost
    }

    fn best_path(&self) -> Option<Vec<State>> {
        self.solution_path()
    }

    fn counters(&self) -> Counters {
        Planner::counters(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::make_wall_gap;
    use crate::space::{FreeSpace, StateSpace};
    use crate::trace::{solve, ClockMode, StopCondition};
    use std::sync::Arc;

    fn free_problem() -> ProblemInstance {
        ProblemInstance::new(
            StateSpace::unit_cube(2).unwrap(),
            vec![0.25, 0.5].into(),
            vec![vec![0.75, 0.5].into()],
            Arc::new(FreeSpace),
        )
        .unwrap()
    }

    fn config(seed: u64) -> PlannerConfig {
        PlannerConfig {
            seed,
            resolution: 1e-3,
            ..Default::default()
        }
    }

    #[test]
    fn rejects_bad_config() {
        let p = free_problem();
        let bad = PlannerConfig {
            eta: 1.0,
            ..Default::default()
        };
        assert_eq!(Planner::new(&p, bad).unwrap_err(), ConfigError::Eta(1.0));
        let bad = PlannerConfig {
            batch_size: 0,
            ..Default::default()
        };
        assert_eq!(Planner::new(&p, bad).unwrap_err(), ConfigError::BatchSize);
    }

    #[test]
    fn initialization() {
        let p = free_problem();
        let planner = Planner::ait_star(&p, config(1)).unwrap();
        let goal = planner.graph().goals()[0];
        assert_eq!(planner.reverse_search().key(planner.graph(), goal).1, 0.0);
        assert_eq!(planner.cost(), f64::INFINITY);
        // r(2) over the unit square exceeds the start-goal distance 0.5
        let r = crate::space::rgg_radius(2, 2, 1.0, 1.001);
        assert!(r > 0.5);
        assert_eq!(planner.queue().len(), 1);

        let far = ProblemInstance::new(
            StateSpace::unit_cube(4).unwrap(),
            vec![0.0; 4].into(),
            vec![vec![1.0; 4].into()],
            Arc::new(FreeSpace),
        )
        .unwrap();
        let r4 = crate::space::rgg_radius(4, 2, 1.0, 1.001);
        assert!(r4 < 2.0);
        assert!(Planner::ait_star(&far, config(1)).unwrap().queue().is_empty());
    }

    #[test]
    fn empty_queue_adds_batch() {
        let far = ProblemInstance::new(
            StateSpace::unit_cube(4).unwrap(),
            vec![0.0; 4].into(),
            vec![vec![1.0; 4].into()],
            Arc::new(FreeSpace),
        )
        .unwrap();
        let mut planner = Planner::ait_star(&far, config(1)).unwrap();
        assert_eq!(planner.iterate(), Event::BatchAdded { samples: 100 });
    }

    #[test]
    fn free_space_direct_solution() {
        let p = free_problem();
        let mut planner = Planner::ait_star(&p, config(3)).unwrap();
        let mut events = Vec::new();
        for _ in 0..5 {
            events.push(planner.iterate());
        }
        assert_eq!(events[0], Event::SolutionImproved { cost: 0.5 });
        assert_eq!(planner.cost(), 0.5);
        let path = planner.solution_path().unwrap();
        assert_eq!(path.len(), 2);
    }

    #[test]
    fn invalid_edge_grows_blacklist() {
        let s = make_wall_gap(2).unwrap();
        let p = s.to_problem().unwrap();
        let mut planner = Planner::ait_star(&p, config(5)).unwrap();
        let mut invalid = 0;
        while invalid < 20 {
            assert!(planner.batches() < 50);
            let before = planner.graph().invalid_edges().len();
            let start_h = planner.heuristic(planner.graph().start());
            if let Event::EdgeEvaluated { valid: false } = planner.iterate() {
                assert_eq!(planner.graph().invalid_edges().len(), before + 1);
                assert!(planner.heuristic(planner.graph().start()) >= start_h);
                invalid += 1;
            }
        }
    }

    #[test]
    fn bit_star_mode_does_not_use_reverse_search() {
        let s = make_wall_gap(2).unwrap();
        let p = s.to_problem().unwrap();
        let mut planner = Planner::bit_star(&p, config(5)).unwrap();
        while !planner.cost().is_finite() {
            assert!(planner.batches() < 200);
            planner.iterate();
        }
        assert_eq!(planner.reverse_search().expansions(), 0);
    }

    #[test]
    fn solve_is_deterministic_and_monotone() {
        let s = make_wall_gap(2).unwrap();
        let p = s.to_problem().unwrap();
        let run = || {
            let mut planner = Planner::ait_star(&p, config(9)).unwrap();
            solve(&mut planner, StopCondition::time(0.1), ClockMode::Logical)
        };
        let (a, b) = (run(), run());
        assert_eq!(a.trace, b.trace);
        assert!(!a.trace.events.is_empty());
        assert!(a.trace.events.windows(2).all(|w| w[1].cost < w[0].cost));
        let sol = a.solution.unwrap();
        assert!(sol.validate(&p, 1e-3));
        assert!(sol.cost >= s.reference_cost.unwrap());
    }

    #[test]
    fn forward_costs_stay_coherent() {
        let s = make_wall_gap(2).unwrap();
        let p = s.to_problem().unwrap();
        let mut planner = Planner::ait_star(&p, config(17)).unwrap();
        for i in 0..500 {
            planner.iterate();
            if i % 25 == 0 {
                let g = planner.graph();
                assert!(planner.reverse_search().queue_matches_inconsistent(g));
                for x in g.ids() {
                    if let Some(parent) = g.forward().parent(x) {
                        let recomputed = g.forward().cost(parent) + distance(g.state(parent), g.state(x));
                        assert!((recomputed - g.forward().cost(x)).abs() < 1e-12);
                    }
                }
            }
        }
    }
}
