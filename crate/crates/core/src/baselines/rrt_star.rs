use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{biased_sample, new_oracle, steer, RrtConfig, RrtConfigError, Tree};
use crate::scenarios::ValidityOracle;
use crate::space::{distance, rgg_radius, ProblemInstance, State};
use crate::trace::{AnytimePlanner, Counters};

/// RRT* with goal bias and a shrinking rewire radius over the whole space.
///
/// The neighborhood radius is `min(r(q), max_edge_length)` with `q` the tree
/// size and the box volume as measure. Samples that land on a goal already
/// in the tree rewire that vertex instead of duplicating it.
#[derive(Clone, Debug)]
pub struct RrtStar {
    problem: ProblemInstance,
    config: RrtConfig,
    rng: ChaCha8Rng,
    oracle: ValidityOracle,
    tree: Tree,
    goal_nodes: Vec<usize>,
    cost: f64,
    best: Option<usize>,
    attempts: u64,
    iterations: u64,
}

impl RrtStar {
    pub fn new(problem: &ProblemInstance, config: RrtConfig) -> Result<Self, RrtConfigError> {
        config.validate()?;
        Ok(RrtStar {
            problem: problem.clone(),
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            oracle: new_oracle(problem, &config),
            tree: Tree::with_root(problem.dimension(), problem.start().clone()),
            goal_nodes: Vec::new(),
            cost: f64::INFINITY,
            best: None,
            attempts: 0,
            iterations: 0,
            config,
        })
    }

    pub fn tree_size(&self) -> usize {
        self.tree.len()
    }

    pub fn radius(&self) -> f64 {
        let n = self.problem.dimension();
        let r = rgg_radius(n, self.tree.len().max(2), self.problem.space().volume(), self.config.eta);
        r.min(self.config.max_edge_length)
    }

    fn near(&self, x: &[f64], r: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.tree.index.for_each_within(x, r * r, |id, _| out.push(id));
        out.sort_unstable();
        out
    }

    /// Cheapest valid parent among `candidates`, starting from `fallback`.
    fn choose_parent(&mut self, x: &State, candidates: &[usize], fallback: (usize, f64)) -> (usize, f64) {
        let mut ranked: Vec<(f64, usize)> = candidates
            .iter()
            .map(|&y| (self.tree.cost[y] + distance(&self.tree.states[y], x), y))
            .filter(|(c, _)| *c < fallback.1)
            .collect();
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (c, y) in ranked {
            let from = self.tree.states[y].clone();
            if self.oracle.is_valid_motion(&from, x) {
                return (y, c);
            }
        }
        fallback
    }

    fn is_ancestor(&self, a: usize, mut x: usize) -> bool {
        loop {
            if x == a {
                return true;
            }
            match self.tree.parent[x] {
                Some(p) => x = p,
                None => return false,
            }
        }
    }

    fn refresh_best(&mut self) {
        let best = self
            .goal_nodes
            .iter()
            .map(|g| (self.tree.cost[*g], *g))
            .min_by(|a, b| a.0.total_cmp(&b.0));
        if let Some((c, g)) = best {
            if c < self.cost {
                self.cost = c;
                self.best = Some(g);
            }
        }
    }
}

impl AnytimePlanner for RrtStar {
    fn name(&self) -> &'static str {
        "rrtstar"
    }

    fn step(&mut self) {
        self.iterations += 1;
        let target = biased_sample(&mut self.rng, &self.problem, self.config.goal_bias);
        let nearest = self.tree.nearest(&target);
        let from = self.tree.states[nearest].clone();
        let new = steer(&from, &target, self.config.max_edge_length);
        if new == from {
            if let Some(&g) = self.goal_nodes.iter().find(|g| self.tree.states[**g] == new) {
                // the goal itself was drawn again: try to lower its cost
                let r = self.radius();
                let candidates: Vec<usize> = self
                    .near(&new, r)
                    .into_iter()
                    .filter(|y| !self.is_ancestor(g, *y))
                    .collect();
                let current = (self.tree.parent[g].unwrap_or(g), self.tree.cost[g]);
                let (p, c) = self.choose_parent(&new, &candidates, current);
                if c < self.tree.cost[g] {
                    self.tree.reparent(g, p, c);
                    self.refresh_best();
                }
            }
            return;
        }
        self.attempts += 1;
        if !self.oracle.is_valid_state(&new) || !self.oracle.is_valid_motion(&from, &new) {
            return;
        }
        let r = self.radius();
        let near = self.near(&new, r);
        let direct = self.tree.cost[nearest] + distance(&from, &new);
        let others: Vec<usize> = near.iter().copied().filter(|y| *y != nearest).collect();
        let (parent, cost) = self.choose_parent(&new, &others, (nearest, direct));
        let is_goal = self.problem.goals().contains(&new);
        let id = self.tree.add(new.clone(), Some(parent), cost);
        if is_goal {
            self.goal_nodes.push(id);
        }
        for y in near {
            if y == parent {
                continue;
            }
            let via = cost + distance(&new, &self.tree.states[y]);
            if via < self.tree.cost[y] {
                let to = self.tree.states[y].clone();
                if self.oracle.is_valid_motion(&new, &to) {
                    self.tree.reparent(y, id, via);
                }
            }
        }
        self.refresh_best();
    }

    fn best_cost(&self) -> f64 {
        self.cost
    }

    fn best_path(&self) -> Option<Vec<State>> {
        self.best.map(|g| self.tree.path_to(g))
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
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::{make_free, make_wall_gap};
    use crate::trace::{solve, ClockMode, StopCondition};

    #[test]
    fn free_space_converges_to_straight_line() {
        let p = make_free(2).unwrap().to_problem().unwrap();
        let config = RrtConfig::for_problem(&p).with_seed(1).with_resolution(1e-3);
        let mut planner = RrtStar::new(&p, config).unwrap();
        let out = solve(&mut planner, StopCondition::iterations(20_000), ClockMode::Logical);
        let best = out.trace.final_cost;
        assert!(best <= 1.02 * p.min_cost(), "cost {best}");
        assert!(out.trace.events.windows(2).all(|w| w[1].cost < w[0].cost));
        assert!(out.solution.unwrap().validate(&p, 1e-3));
    }

    #[test]
    fn tree_edges_respect_steering_and_costs() {
        let p = make_wall_gap(4).unwrap().to_problem().unwrap();
        let config = RrtConfig::for_problem(&p).with_seed(3).with_resolution(1e-3);
        let mut planner = RrtStar::new(&p, config).unwrap();
        for _ in 0..3000 {
            planner.step();
        }
        let t = &planner.tree;
        for x in 1..t.len() {
            let p = t.parent[x].unwrap();
            let d = distance(&t.states[p], &t.states[x]);
            assert!(d <= 0.5 + 1e-12);
            assert!((t.cost[p] + d - t.cost[x]).abs() < 1e-9);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let p = make_wall_gap(2).unwrap().to_problem().unwrap();
        let run = || {
            let config = RrtConfig::for_problem(&p).with_seed(11).with_resolution(1e-3);
            solve(
                &mut RrtStar::new(&p, config).unwrap(),
                StopCondition::iterations(5000),
                ClockMode::Logical,
            )
            .trace
        };
        assert_eq!(run(), run());
    }
}
