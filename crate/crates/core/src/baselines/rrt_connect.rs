use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{new_oracle, path_cost, steer, RrtConfig, RrtConfigError, Tree};
use crate::scenarios::ValidityOracle;
use crate::space::{distance, ProblemInstance, State};
use crate::trace::{AnytimePlanner, Counters};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Extend {
    Trapped,
    Advanced(usize),
    Reached(usize),
}

/// Bidirectional RRT with the connect heuristic. One tree grows from the
/// start, the other from all goals; the trees swap roles every iteration.
/// Stops at the first connection and never refines it.
#[derive(Clone, Debug)]
pub struct RrtConnect {
    problem: ProblemInstance,
    config: RrtConfig,
    rng: ChaCha8Rng,
    oracle: ValidityOracle,
    /// `trees[0]` is rooted at the start.
    trees: [Tree; 2],
    active: usize,
    path: Option<Vec<State>>,
    cost: f64,
    attempts: u64,
    iterations: u64,
}

impl RrtConnect {
    pub fn new(problem: &ProblemInstance, config: RrtConfig) -> Result<Self, RrtConfigError> {
        config.validate()?;
        let n = problem.dimension();
        let start = Tree::with_root(n, problem.start().clone());
        let mut goals = Tree::new(n);
        for g in problem.goals() {
            goals.add(g.clone(), None, 0.0);
        }
        Ok(RrtConnect {
            problem: problem.clone(),
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            oracle: new_oracle(problem, &config),
            trees: [start, goals],
            active: 0,
            path: None,
            cost: f64::INFINITY,
            attempts: 0,
            iterations: 0,
            config,
        })
    }

    pub fn tree_sizes(&self) -> (usize, usize) {
        (self.trees[0].len(), self.trees[1].len())
    }

    fn extend(&mut self, tree: usize, target: &[f64]) -> Extend {
        let near = self.trees[tree].nearest(target);
        let from = self.trees[tree].states[near].clone();
        if &from[..] == target {
            return Extend::Reached(near);
        }
        let new = steer(&from, target, self.config.max_edge_length);
        self.attempts += 1;
        if !self.oracle.is_valid_state(&new) || !self.oracle.is_valid_motion(&from, &new) {
            return Extend::Trapped;
        }
        let reached = &new[..] == target;
        let cost = self.trees[tree].cost[near] + distance(&from, &new);
        let id = self.trees[tree].add(new, Some(near), cost);
        if reached {
            Extend::Reached(id)
        } else {
            Extend::Advanced(id)
        }
    }

    fn connect(&mut self, tree: usize, target: &[f64]) -> Extend {
        loop {
            match self.extend(tree, target) {
                Extend::Advanced(_) => continue,
                other => return other,
            }
        }
    }

    fn join(&mut self, a_node: usize, b_node: usize) {
        let (start_node, goal_node) = if self.active == 0 {
            (a_node, b_node)
        } else {
            (b_node, a_node)
        };
        let mut path = self.trees[0].path_to(start_node);
        let mut back = self.trees[1].path_to(goal_node);
        back.reverse();
        path.extend(back);
        path.dedup();
        self.cost = path_cost(&path);
        self.path = Some(path);
    }
}

impl AnytimePlanner for RrtConnect {
    fn name(&self) -> &'static str {
        "rrtconnect"
    }

    fn step(&mut self) {
        self.iterations += 1;
        if self.path.is_some() {
            return;
        }
        let a = self.active;
        let b = 1 - a;
        let target = if self.iterations == 1 {
            // aim straight at the other root first
            let root = self.trees[b].nearest(&self.trees[a].states[0]);
            self.trees[b].states[root].clone()
        } else {
            self.problem.space().sample_uniform(&mut self.rng)
        };
        match self.extend(a, &target) {
            Extend::Trapped => {}
            Extend::Advanced(new) | Extend::Reached(new) => {
                let bridge = self.trees[a].states[new].clone();
                if let Extend::Reached(other) = self.connect(b, &bridge) {
                    self.join(new, other);
                }
            }
        }
        self.active = b;
    }

    fn best_cost(&self) -> f64 {
        self.cost
    }

    fn best_path(&self) -> Option<Vec<State>> {
        self.path.clone()
    }

    fn counters(&self) -> Counters {
        let c = self.oracle.counters();
        Counters {
            samples: (self.trees[0].len() + self.trees[1].len()) as u64,
            state_checks: c.state_checks,
            motion_checks: c.motion_checks,
            interpolated_states: c.interpolated_states,
            queue_pops: self.attempts,
            reverse_expansions: 0,
            iterations: self.iterations,
        }
    }

    fn is_finished(&self) -> bool {
        self.path.is_some()
    }
}
