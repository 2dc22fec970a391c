//! Anytime solve loop, stop conditions and the per-trial trace.

use std::time::Instant;

use crate::scenarios::ValidityOracle;
use crate::space::{distance, ProblemInstance, State};

/// Work counters reported by every planner.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    /// Samples currently stored (graph planners) or tree vertices (RRTs).
    pub samples: u64,
    pub state_checks: u64,
    pub motion_checks: u64,
    pub interpolated_states: u64,
    /// Forward edge-queue pops (graph planners) or extension attempts (RRTs).
    pub queue_pops: u64,
    pub reverse_expansions: u64,
    pub iterations: u64,
}

/// Logical ticks per logical second.
pub const LOGICAL_TICKS_PER_SECOND: f64 = 1e6;

impl Counters {
    /// Deterministic work measure: every collision query, queue operation
    /// and reverse expansion costs one tick.
    pub fn logical_ticks(&self) -> u64 {
        self.state_checks + self.interpolated_states + self.iterations + self.reverse_expansions
    }
}

/// A path from the start to a goal.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub path: Vec<State>,
    pub cost: f64,
    /// Seconds since the solve started (wall or logical).
    pub time_s: f64,
    pub counters: Counters,
}

impl Solution {
    pub fn path_length(&self) -> f64 {
        self.path.windows(2).map(|w| distance(&w[0], &w[1])).sum()
    }

    /// Re-checks every motion and the stored cost.
    pub fn validate(&self, problem: &ProblemInstance, resolution: f64) -> bool {
        let Some(first) = self.path.first() else {
            return false;
        };
        let last = self.path.last().expect("non-empty");
        if first != problem.start() || !problem.goals().contains(last) {
            return false;
        }
        let mut oracle = ValidityOracle::for_problem(problem, resolution);
        self.path.windows(2).all(|w| oracle.is_valid_motion(&w[0], &w[1]))
            && (self.path_length() - self.cost).abs() <= 1e-12 * self.cost.max(1.0)
    }
}

/// Common surface of the anytime planners.
pub trait AnytimePlanner {
    fn name(&self) -> &'static str;
    /// One unit of planner work.
    fn step(&mut self);
    fn best_cost(&self) -> f64;
    fn best_path(&self) -> Option<Vec<State>>;
    fn counters(&self) -> Counters;
    /// No further improvement is possible.
    fn is_finished(&self) -> bool {
        false
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ClockMode {
    #[default]
    Wall,
    /// Time is derived from [`Counters::logical_ticks`].
    Logical,
}

/// When to stop solving. Unset limits do not apply.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct StopCondition {
    pub time_budget_s: Option<f64>,
    pub max_iterations: Option<u64>,
    pub first_solution: bool,
}

impl StopCondition {
    pub fn time(seconds: f64) -> Self {
        StopCondition {
            time_budget_s: Some(seconds),
            ..Default::default()
        }
    }

    pub fn iterations(n: u64) -> Self {
        StopCondition {
            max_iterations: Some(n),
            ..Default::default()
        }
    }

    pub fn immediately() -> Self {
        Self::iterations(0)
    }

    pub fn or_first_solution(mut self) -> Self {
        self.first_solution = true;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceEvent {
    pub time_s: f64,
    pub cost: f64,
    pub counters: Counters,
}

/// Improvement events and final counters of one trial.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialTrace {
    pub trial: u32,
    pub seed: u64,
    pub events: Vec<TraceEvent>,
    pub final_cost: f64,
    pub success: bool,
    pub end_time_s: f64,
    pub counters: Counters,
}

impl TrialTrace {
    pub fn initial(&self) -> Option<&TraceEvent> {
        self.events.first()
    }

    /// Best cost reported at or before `t`.
    pub fn cost_at(&self, t: f64) -> f64 {
        self.events
            .iter()
            .take_while(|e| e.time_s <= t)
            .last()
            .map_or(f64::INFINITY, |e| e.cost)
    }
}

/// Reads wall or logical time.
#[derive(Clone, Copy, Debug)]
pub struct Clock {
    mode: ClockMode,
    started: Instant,
    base_ticks: u64,
}

impl Clock {
    pub fn start(mode: ClockMode, counters: &Counters) -> Self {
        Clock {
            mode,
            started: Instant::now(),
            base_ticks: counters.logical_ticks(),
        }
    }

    pub fn seconds(&self, counters: &Counters) -> f64 {
        match self.mode {
            ClockMode::Wall => self.started.elapsed().as_secs_f64(),
            ClockMode::Logical => {
                (counters.logical_ticks() - self.base_ticks) as f64 / LOGICAL_TICKS_PER_SECOND
            }
        }
    }
}

/// Result of [`solve`].
#[derive(Clone, Debug)]
pub struct Outcome {
    pub solution: Option<Solution>,
    pub trace: TrialTrace,
}

/// Steps `planner` until `stop` holds, recording every strict improvement
/// of the best cost. The stop condition is polled before every step.
pub fn solve<P: AnytimePlanner + ?Sized>(planner: &mut P, stop: StopCondition, mode: ClockMode) -> Outcome {
    let clock = Clock::start(mode, &planner.counters());
    let mut events = Vec::new();
    let mut best = planner.best_cost();
    let mut best_solution: Option<Solution> = None;
    let mut steps = 0u64;
    loop {
        let counters = planner.counters();
        let now = clock.seconds(&counters);
        if stop.time_budget_s.is_some_and(|b| now >= b)
            || stop.max_iterations.is_some_and(|m| steps >= m)
            || (stop.first_solution && best.is_finite())
            || planner.is_finished()
        {
            break;
        }
        planner.step();
        steps += 1;
        let cost = planner.best_cost();
        if cost < best {
            best = cost;
            let counters = planner.counters();
            let t = clock.seconds(&counters);
            events.push(TraceEvent {
                time_s: t,
                cost,
                counters,
            });
            best_solution = planner.best_path().map(|path| Solution {
                path,
                cost,
                time_s: t,
                counters,
            });
        }
    }
    let counters = planner.counters();
    let trace = TrialTrace {
        trial: 0,
        seed: 0,
        final_cost: best,
        success: best.is_finite(),
        end_time_s: clock.seconds(&counters),
        events,
        counters,
    };
    Outcome {
        solution: best_solution,
        trace,
    }
}
