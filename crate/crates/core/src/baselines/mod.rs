//! RRT-family reference planners.
//!
//! All three planners steer by straight-line interpolation truncated at the
//! maximum edge length and share the validity oracle of the graph planners.

mod rrt;
mod rrt_connect;
mod rrt_star;

pub use rrt::Rrt;
pub use rrt_connect::RrtConnect;
pub use rrt_star::RrtStar;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::kdtree::KdTree;
use crate::scenarios::{ValidityOracle, DEFAULT_RESOLUTION};
use crate::space::{distance, ProblemInstance, State};
use crate::trace::{solve, ClockMode, Outcome, StopCondition};

#[derive(Debug, Error, PartialEq)]
pub enum RrtConfigError {
    #[error("goal bias must lie in [0, 1], got {0}")]
    GoalBias(f64),
    #[error("maximum edge length must be positive, got {0}")]
    MaxEdgeLength(f64),
    #[error("rewire factor must exceed 1, got {0}")]
    Eta(f64),
    #[error("collision resolution must be positive, got {0}")]
    Resolution(f64),
}

/// Maximum edge length for an `n`-dimensional space of the given extent.
pub fn default_max_edge_length(n: usize, max_extent: f64) -> f64 {
    match n {
        4 => 0.5,
        8 => 1.25,
        16 => 3.0,
        _ => 0.2 * max_extent,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RrtConfig {
    pub goal_bias: f64,
    pub max_edge_length: f64,
    /// Rewire factor, RRT* only.
    pub eta: f64,
    pub seed: u64,
    pub resolution: f64,
}

impl RrtConfig {
    pub fn for_problem(problem: &ProblemInstance) -> Self {
        RrtConfig {
            goal_bias: 0.05,
            max_edge_length: default_max_edge_length(problem.dimension(), problem.space().max_extent()),
            eta: 1.001,
            seed: 0,
            resolution: DEFAULT_RESOLUTION,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_resolution(mut self, resolution: f64) -> Self {
        self.resolution = resolution;
        self
    }

    pub fn validate(&self) -> Result<(), RrtConfigError> {
        if !(0.0..=1.0).contains(&self.goal_bias) {
            return Err(RrtConfigError::GoalBias(self.goal_bias));
        }
        if !(self.max_edge_length > 0.0) {
            return Err(RrtConfigError::MaxEdgeLength(self.max_edge_length));
        }
        if !(self.eta > 1.0) {
            return Err(RrtConfigError::Eta(self.eta));
        }
        if !(self.resolution > 0.0) {
            return Err(RrtConfigError::Resolution(self.resolution));
        }
        Ok(())
    }
}

/// The point at most `max` along the segment from `from` to `to`.
pub fn steer(from: &[f64], to: &[f64], max: f64) -> State {
    let d = distance(from, to);
    if d <= max {
        return State::from(to);
    }
    let t = max / d;
    from.iter().zip(to).map(|(a, b)| a + (b - a) * t).collect::<Vec<_>>().into()
}

/// Goal-biased uniform sample of the bounded space.
fn biased_sample(rng: &mut ChaCha8Rng, problem: &ProblemInstance, goal_bias: f64) -> State {
    if goal_bias > 0.0 && rng.random::<f64>() < goal_bias {
        let goals = problem.goals();
        goals[rng.random_range(0..goals.len())].clone()
    } else {
        problem.space().sample_uniform(rng)
    }
}

/// Tree storage with cost-to-come and a nearest-neighbor index.
#[derive(Clone, Debug)]
struct Tree {
    states: Vec<State>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    cost: Vec<f64>,
    index: KdTree<usize>,
}

impl Tree {
    fn new(dim: usize) -> Self {
        Tree {
            states: Vec::new(),
            parent: Vec::new(),
            children: Vec::new(),
            cost: Vec::new(),
            index: KdTree::new(dim),
        }
    }

    fn with_root(dim: usize, root: State) -> Self {
        let mut t = Tree::new(dim);
        t.add(root, None, 0.0);
        t
    }

    fn len(&self) -> usize {
        self.states.len()
    }

    fn add(&mut self, s: State, parent: Option<usize>, cost: f64) -> usize {
        let id = self.states.len();
        self.index.insert(&s, id);
        self.states.push(s);
        self.parent.push(parent);
        self.children.push(Vec::new());
        self.cost.push(cost);
        if let Some(p) = parent {
            self.children[p].push(id);
        }
        id
    }

    fn nearest(&self, x: &[f64]) -> usize {
        self.index.nearest(x).expect("tree has a root").0
    }

    /// States from the root to `x`.
    fn path_to(&self, x: usize) -> Vec<State> {
        let mut path = vec![self.states[x].clone()];
        let mut cur = x;
        while let Some(p) = self.parent[cur] {
            path.push(self.states[p].clone());
            cur = p;
        }
        path.reverse();
        path
    }

    /// Moves `x` under `parent` and refreshes the costs of its subtree.
    fn reparent(&mut self, x: usize, parent: usize, cost: f64) {
        if let Some(old) = self.parent[x] {
            self.children[old].retain(|c| *c != x);
        }
        self.parent[x] = Some(parent);
        self.children[parent].push(x);
        let delta = cost - self.cost[x];
        self.cost[x] = cost;
        let mut stack = self.children[x].clone();
        while let Some(y) = stack.pop() {
            self.cost[y] += delta;
            stack.extend_from_slice(&self.children[y]);
        }
    }
}

fn path_cost(path: &[State]) -> f64 {
    path.windows(2).map(|w| distance(&w[0], &w[1])).sum()
}

fn new_oracle(problem: &ProblemInstance, config: &RrtConfig) -> ValidityOracle {
    ValidityOracle::for_problem(problem, config.resolution)
}

/// Runs RRT-Connect until the first solution or until `stop` holds.
pub fn rrt_connect_solve(
    problem: &ProblemInstance,
    config: RrtConfig,
    stop: StopCondition,
    mode: ClockMode,
) -> Result<Outcome, RrtConfigError> {
    let mut planner = RrtConnect::new(problem, config)?;
    Ok(solve(&mut planner, stop, mode))
}

/// Runs RRT* until `stop` holds.
pub fn rrt_star_solve(
    problem: &ProblemInstance,
    config: RrtConfig,
    stop: StopCondition,
    mode: ClockMode,
) -> Result<Outcome, RrtConfigError> {
    let mut planner = RrtStar::new(problem, config)?;
    Ok(solve(&mut planner, stop, mode))
}
