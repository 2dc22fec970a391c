use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{biased_sample, new_oracle, steer, RrtConfig, RrtConfigError, Tree};
use crate::scenarios::ValidityOracle;
use crate::space::{distance, ProblemInstance, State};
use crate::trace::{AnytimePlanner, Counters};

/// Goal-biased RRT. Stops at the first sample that lands on a goal.
#[derive(Clone, Debug)]
pub struct Rrt {
    problem: ProblemInstance,
    config: RrtConfig,
    rng: ChaCha8Rng,
    oracle: ValidityOracle,
    tree: Tree,
    goal: Option<usize>,
    attempts: u64,
    iterations: u64,
}

impl Rrt {
    pub fn new(problem: &ProblemInstance, config: RrtConfig) -> Result<Self, RrtConfigError> {
        config.validate()?;
        Ok(Rrt {
            problem: problem.clone(),
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            oracle: new_oracle(problem, &config),
            tree: Tree::with_root(problem.dimension(), problem.start().clone()),
            goal: None,
            attempts: 0,
            iterations: 0,
            config,
        })
    }

    pub fn tree_size(&self) -> usize {
        self.tree.len()
    }
}

impl AnytimePlanner for Rrt {
    fn name(&self) -> &'static str {
        "rrt"
    }

    fn step(&mut self) {
        self.iterations += 1;
        if self.goal.is_some() {
            return;
        }
        let target = biased_sample(&mut self.rng, &self.problem, self.config.goal_bias);
        let near = self.tree.nearest(&target);
        let from = self.tree.states[near].clone();
        let new = steer(&from, &target, self.config.max_edge_length);
        if new == from {
            return;
        }
        self.attempts += 1;
        if !self.oracle.is_valid_state(&new) || !self.oracle.is_valid_motion(&from, &new) {
            return;
        }
        let cost = self.tree.cost[near] + distance(&from, &new);
        let reached = self.problem.goals().contains(&new);
        let id = self.tree.add(new, Some(near), cost);
        if reached {
            self.goal = Some(id);
        }
    }

    fn best_cost(&self) -> f64 {
        self.goal.map_or(f64::INFINITY, |g| self.tree.cost[g])
    }

    fn best_path(&self) -> Option<Vec<State>> {
        self.goal.map(|g| self.tree.path_to(g))
    }

    fn counters(&self) -> Counters {
        let c = self.oracle.counters();
        Counters {
            samples: self.tree.len() as u64,
            state_checks: c.state_checks,
            motion_checks: c.motion_checks,
            interpolated_states: c.interpolated_states,
            queue_pops: self.attempts,
            reverse_expansions: 0,
            iterations: self.iterations,
        }
    }

    fn is_finished(&self) -> bool {
        self.goal.is_some()
    }
}
