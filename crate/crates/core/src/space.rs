//! Bounded Euclidean state space, admissible estimators, the informed set and
//! the connection radius of the random geometric graph.

use std::f64::consts::PI;
use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

/// Errors raised while building problems or sampling.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpaceError {
    #[error("state space must have at least one dimension")]
    ZeroDimension,
    #[error("bounds of dimension {0} are empty or inverted")]
    InvalidBounds(usize),
    #[error("state has dimension {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{0} state lies outside the state space bounds")]
    OutOfBounds(&'static str),
    #[error("{0} state is not valid")]
    InvalidState(&'static str),
    #[error("goal set is empty")]
    NoGoals,
    #[error("informed set has zero measure for cost {0}")]
    DegenerateInformedSet(f64),
}

/// A point in the state space.
#[derive(Clone, Debug, PartialEq)]
pub struct State(Vec<f64>);

impl State {
    pub fn new(coords: Vec<f64>) -> Self {
        State(coords)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for State {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for State {
    fn from(v: Vec<f64>) -> Self {
        State(v)
    }
}

impl From<&[f64]> for State {
    fn from(v: &[f64]) -> Self {
        State(v.to_vec())
    }
}

/// Squared Euclidean distance. Exactly symmetric in its arguments.
#[inline]
pub fn distance_squared(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    distance_squared(a, b).sqrt()
}

/// Axis-aligned bounded subset of Rⁿ.
#[derive(Clone, Debug, PartialEq)]
pub struct StateSpace {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl StateSpace {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, SpaceError> {
        if lower.is_empty() {
            return Err(SpaceError::ZeroDimension);
        }
        if lower.len() != upper.len() {
            return Err(SpaceError::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !(l < u) || !l.is_finite() || !u.is_finite() {
                return Err(SpaceError::InvalidBounds(i));
            }
        }
        Ok(StateSpace { lower, upper })
    }

    /// The unit hypercube `[0, 1]ⁿ`.
    pub fn unit_cube(n: usize) -> Result<Self, SpaceError> {
        StateSpace::new(vec![0.0; n], vec![1.0; n])
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Length of the bounding-box diagonal.
    pub fn max_extent(&self) -> f64 {
        distance(&self.lower, &self.upper)
    }

    /// Lebesgue measure of the box.
    pub fn volume(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| u - l)
            .product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dimension()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| *v >= *l && *v <= *u)
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> State {
        State(
            self.lower
                .iter()
                .zip(&self.upper)
                .map(|(l, u)| l + (u - l) * rng.random::<f64>())
                .collect(),
        )
    }
}

/// Answers whether a single state is free of obstacles.
pub trait Environment: Send + Sync + fmt::Debug {
    fn is_free(&self, x: &[f64]) -> bool;
}

/// An environment with no obstacles.
#[derive(Debug, Clone, Copy, Default)]
pub struct FreeSpace;

impl Environment for FreeSpace {
    fn is_free(&self, _x: &[f64]) -> bool {
        true
    }
}

/// A start state, a finite goal set and the world they live in.
///
/// The cost objective is path length, so every estimator below is a
/// Euclidean distance.
#[derive(Clone, Debug)]
pub struct ProblemInstance {
    space: StateSpace,
    start: State,
    goals: Vec<State>,
    env: Arc<dyn Environment>,
}

impl ProblemInstance {
    pub fn new(
        space: StateSpace,
        start: State,
        goals: Vec<State>,
        env: Arc<dyn Environment>,
    ) -> Result<Self, SpaceError> {
        if goals.is_empty() {
            return Err(SpaceError::NoGoals);
        }
        let n = space.dimension();
        for (what, s) in std::iter::once(("start", &start)).chain(goals.iter().map(|g| ("goal", g))) {
            if s.len() != n {
                return Err(SpaceError::DimensionMismatch {
                    expected: n,
                    found: s.len(),
                });
            }
            if !space.contains(s) {
                return Err(SpaceError::OutOfBounds(what));
            }
            if !env.is_free(s) {
                return Err(SpaceError::InvalidState(what));
            }
        }
        Ok(ProblemInstance {
            space,
            start,
            goals,
            env,
        })
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn dimension(&self) -> usize {
        self.space.dimension()
    }

    pub fn start(&self) -> &State {
        &self.start
    }

    pub fn goals(&self) -> &[State] {
        &self.goals
    }

    pub fn environment(&self) -> &Arc<dyn Environment> {
        &self.env
    }

    /// Admissible cost-to-come estimate.
    pub fn g_hat(&self, x: &[f64]) -> f64 {
        distance(&self.start, x)
    }

    /// Admissible a-priori cost-to-go estimate (nearest goal).
    pub fn h_hat_apriori(&self, x: &[f64]) -> f64 {
        self.goals
            .iter()
            .map(|g| distance(g, x))
            .fold(f64::INFINITY, f64::min)
    }

    /// Admissible edge cost estimate.
    pub fn c_hat(&self, a: &[f64], b: &[f64]) -> f64 {
        distance(a, b)
    }

    /// Admissible estimate of the best solution constrained through `x`.
    pub fn f_hat(&self, x: &[f64]) -> f64 {
        self.g_hat(x) + self.h_hat_apriori(x)
    }

    /// Smallest possible solution cost, the distance to the nearest goal.
    pub fn min_cost(&self) -> f64 {
        self.h_hat_apriori(&self.start)
    }

    pub fn informed_set(&self, cost: f64) -> InformedSet<'_> {
        InformedSet {
            problem: self,
            cost,
        }
    }

    /// Measure of the informed set for `cost`, clamped to the box measure.
    ///
    /// With several goals the per-goal spheroid measures are summed, which
    /// upper-bounds the measure of their union.
    pub fn informed_measure(&self, cost: f64) -> f64 {
        let box_measure = self.space.volume();
        if cost.is_infinite() {
            return box_measure;
        }
        let n = self.dimension();
        let total: f64 = self
            .goals
            .iter()
            .map(|g| prolate_hyperspheroid_measure(n, distance(&self.start, g), cost))
            .sum();
        total.min(box_measure)
    }
}

/// States whose admissible total-cost estimate does not exceed `cost`.
#[derive(Clone, Copy, Debug)]
pub struct InformedSet<'a> {
    problem: &'a ProblemInstance,
    cost: f64,
}

impl InformedSet<'_> {
    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.problem.f_hat(x) <= self.cost
    }
}

/// Measure of the n-dimensional unit ball, `π^(n/2) / Γ(n/2 + 1)`.
pub fn lebesgue_unit_ball(n: usize) -> f64 {
    // ζ_n = 2π/n · ζ_{n-2}
    let mut zeta = if n % 2 == 0 { 1.0 } else { 2.0 };
    let mut k = if n % 2 == 0 { 2 } else { 3 };
    while k <= n {
        zeta *= 2.0 * PI / k as f64;
        k += 2;
    }
    zeta
}

/// Measure of the prolate hyperspheroid with focal distance `c_min` and
/// transverse diameter `cost`. Zero when `cost <= c_min`.
pub fn prolate_hyperspheroid_measure(n: usize, c_min: f64, cost: f64) -> f64 {
    if cost <= c_min {
        return 0.0;
    }
    let conjugate = (cost * cost - c_min * c_min).sqrt() / 2.0;
    lebesgue_unit_ball(n) * (cost / 2.0) * conjugate.powi(n as i32 - 1)
}

/// Connection radius of the random geometric graph over `q` samples in a
/// set of measure `measure`, tuned by `eta > 1`. Natural logarithm.
pub fn rgg_radius(n: usize, q: usize, measure: f64, eta: f64) -> f64 {
    let q = q as f64;
    let nf = n as f64;
    let base = 2.0 * (1.0 + 1.0 / nf) * (measure / lebesgue_unit_ball(n)) * (q.ln() / q);
    eta * base.powf(1.0 / nf)
}

/// One prolate hyperspheroid with foci at the start and one goal.
#[derive(Clone, Debug)]
struct Spheroid {
    center: Vec<f64>,
    /// Unit vector from start to goal. `None` when the foci coincide.
    axis: Option<Vec<f64>>,
    c_min: f64,
}

impl Spheroid {
    fn new(start: &[f64], goal: &[f64]) -> Self {
        let c_min = distance(start, goal);
        let center = start.iter().zip(goal).map(|(a, b)| 0.5 * (a + b)).collect();
        let axis = (c_min > 0.0).then(|| {
            goal.iter()
                .zip(start)
                .map(|(g, s)| (g - s) / c_min)
                .collect()
        });
        Spheroid { center, axis, c_min }
    }

    /// Maps a point of the unit ball into the spheroid for `cost`.
    ///
    /// Scales the first axis by `cost/2` and the rest by the conjugate radius,
    /// then applies the Householder reflection that sends e₀ onto the focal
    /// axis. A reflection is enough since the spheroid is symmetric about
    /// that axis.
    fn map_from_ball(&self, ball: &[f64], cost: f64) -> Vec<f64> {
        let major = cost / 2.0;
        let minor = (cost * cost - self.c_min * self.c_min).sqrt() / 2.0;
        let mut y: Vec<f64> = ball
            .iter()
            .enumerate()
            .map(|(i, v)| if i == 0 { v * major } else { v * minor })
            .collect();
        if let Some(axis) = &self.axis {
            // v = e₀ - a; H = I - 2 v vᵀ / (vᵀ v)
            let mut v = axis.iter().map(|a| -a).collect::<Vec<_>>();
            v[0] += 1.0;
            let vv: f64 = v.iter().map(|x| x * x).sum();
            if vv > 1e-24 {
                let vy: f64 = v.iter().zip(&y).map(|(a, b)| a * b).sum();
                let s = 2.0 * vy / vv;
                for (yi, vi) in y.iter_mut().zip(&v) {
                    *yi -= s * vi;
                }
            }
        }
        for (yi, ci) in y.iter_mut().zip(&self.center) {
            *yi += ci;
        }
        y
    }
}

/// Uniform sampler of the informed set; owns its random stream.
#[derive(Clone, Debug)]
pub struct InformedSampler {
    rng: ChaCha8Rng,
    spheroids: Vec<Spheroid>,
}

/// Rejection attempts per requested sample before giving up.
const MAX_REJECTIONS: usize = 1_000_000;

impl InformedSampler {
    pub fn new(problem: &ProblemInstance, seed: u64) -> Self {
        let spheroids = problem
            .goals()
            .iter()
            .map(|g| Spheroid::new(problem.start(), g))
            .collect();
        InformedSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spheroids,
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    fn unit_ball_point(&mut self, n: usize) -> Vec<f64> {
        loop {
            let g: Vec<f64> = (0..n).map(|_| self.rng.sample(StandardNormal)).collect();
            let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                continue;
            }
            let radius = self.rng.random::<f64>().powf(1.0 / n as f64);
            return g.into_iter().map(|x| x * radius / norm).collect();
        }
    }

    /// Draws `count` states uniformly from the informed set for `cost`.
    ///
    /// Infinite cost samples the whole box. Otherwise one of the per-goal
    /// spheroids is chosen with probability proportional to its measure and
    /// sampled directly; samples out of bounds, outside the informed set, or
    /// covered by an earlier goal's spheroid are rejected.
    pub fn sample(
        &mut self,
        problem: &ProblemInstance,
        count: usize,
        cost: f64,
    ) -> Result<Vec<State>, SpaceError> {
        let space = problem.space();
        if cost.is_infinite() {
            return Ok((0..count).map(|_| space.sample_uniform(&mut self.rng)).collect());
        }
        let n = problem.dimension();
        let measures: Vec<f64> = self
            .spheroids
            .iter()
            .map(|s| prolate_hyperspheroid_measure(n, s.c_min, cost))
            .collect();
        let total: f64 = measures.iter().sum();
        if !(total > 0.0) {
            return Err(SpaceError::DegenerateInformedSet(cost));
        }
        let mut out = Vec::with_capacity(count);
        let mut attempts = 0usize;
        while out.len() < count {
            attempts += 1;
            if attempts > MAX_REJECTIONS.saturating_mul(count.max(1)) {
                return Err(SpaceError::DegenerateInformedSet(cost));
            }
            let mut pick = self.rng.random::<f64>() * total;
            let mut chosen = measures.len() - 1;
            for (i, m) in measures.iter().enumerate() {
                if pick < *m {
                    chosen = i;
                    break;
                }
                pick -= m;
            }
            if measures[chosen] == 0.0 {
                continue;
            }
            let ball = self.unit_ball_point(n);
            let x = self.spheroids[chosen].map_from_ball(&ball, cost);
            if !space.contains(&x) || problem.f_hat(&x) > cost {
                continue;
            }
            let to_start = distance(problem.start(), &x);
            let covered_earlier = problem.goals()[..chosen]
                .iter()
                .zip(&measures)
                .any(|(g, m)| *m > 0.0 && to_start + distance(g, &x) <= cost);
            if covered_earlier {
                continue;
            }
            out.push(State(x));
        }
        Ok(out)
    }
}
