//! Obstacle worlds and the resolution-parameterized validity oracle.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::space::{distance, Environment, ProblemInstance, SpaceError, State, StateSpace};

/// Default collision-checking resolution, as a fraction of the maximum extent.
pub const DEFAULT_RESOLUTION: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("unknown scenario `{0}`")]
    Unknown(String),
    #[error("scenario needs at least {min} dimensions, got {got}")]
    Dimension { min: usize, got: usize },
    #[error("malformed scenario: {0}")]
    Malformed(String),
    #[error(transparent)]
    Problem(#[from] SpaceError),
    #[error("failed to parse scenario: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("failed to serialize scenario: {0}")]
    Serialize(#[from] toml::ser::Error),
}

/// Closed axis-aligned box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisAlignedBox {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl AxisAlignedBox {
    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Self {
        debug_assert_eq!(min.len(), max.len());
        debug_assert!(min.iter().zip(&max).all(|(a, b)| a <= b));
        AxisAlignedBox { min, max }
    }

    /// Boundary points are inside.
    #[inline]
    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.min.iter().zip(&self.max))
            .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }
}

/// A named obstacle world over `[0, 1]ⁿ` with one start and one goal.
///
/// Obstacles mark invalid regions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub dimension: usize,
    pub start: Vec<f64>,
    pub goal: Vec<f64>,
    /// Infimum of the solution cost, when known in closed form.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_cost: Option<f64>,
    #[serde(default)]
    pub obstacles: Vec<AxisAlignedBox>,
}

impl Environment for Scenario {
    fn is_free(&self, x: &[f64]) -> bool {
        !self.obstacles.iter().any(|b| b.contains(x))
    }
}

/// Names accepted by [`Scenario::builtin`].
pub const BUILTIN_SCENARIOS: [&str; 3] = ["wall_gap", "goal_enclosure", "free"];

impl Scenario {
    pub fn builtin(name: &str, n: usize) -> Result<Scenario, ScenarioError> {
        match name {
            "wall_gap" => make_wall_gap(n),
            "goal_enclosure" => make_goal_enclosure(n),
            "free" => make_free(n),
            other => Err(ScenarioError::Unknown(other.to_string())),
        }
    }

    pub fn space(&self) -> StateSpace {
        StateSpace::unit_cube(self.dimension).expect("scenario dimension is positive")
    }

    /// Checks shapes and start/goal validity.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let n = self.dimension;
        if n == 0 {
            return Err(ScenarioError::Dimension { min: 1, got: 0 });
        }
        for b in &self.obstacles {
            if b.min.len() != n || b.max.len() != n {
                return Err(ScenarioError::Malformed("obstacle dimension mismatch".into()));
            }
            if b.min.iter().zip(&b.max).any(|(a, c)| !(a <= c)) {
                return Err(ScenarioError::Malformed("obstacle min exceeds max".into()));
            }
        }
        self.to_problem().map(|_| ())
    }

    pub fn to_problem(&self) -> Result<ProblemInstance, ScenarioError> {
        let env: Arc<dyn Environment> = Arc::new(self.clone());
        Ok(ProblemInstance::new(
            self.space(),
            State::new(self.start.clone()),
            vec![State::new(self.goal.clone())],
            env,
        )?)
    }

    pub fn to_toml(&self) -> Result<String, ScenarioError> {
        Ok(toml::to_string(self)?)
    }

    pub fn from_toml(text: &str) -> Result<Scenario, ScenarioError> {
        let s: Scenario = toml::from_str(text)?;
        s.validate()?;
        Ok(s)
    }
}

fn centered(n: usize, first: f64) -> Vec<f64> {
    let mut v = vec![0.5; n];
    v[0] = first;
    v
}

/// Obstacle-free unit cube; start and goal as in the wall-gap world.
pub fn make_free(n: usize) -> Result<Scenario, ScenarioError> {
    if n < 1 {
        return Err(ScenarioError::Dimension { min: 1, got: n });
    }
    Ok(Scenario {
        name: "free".into(),
        dimension: n,
        start: centered(n, 0.1),
        goal: centered(n, 0.9),
        reference_cost: Some(0.8),
        obstacles: Vec::new(),
    })
}

pub const WALL_GAP_WIDTH: f64 = 0.08;
pub const WALL_MIN: f64 = 0.45;
pub const WALL_MAX: f64 = 0.55;

/// A wall across `x₀ ∈ [0.45, 0.55]` covering `x₁ ≥ 0.08`; the only passage
/// is the gap `x₁ < 0.08`.
pub fn make_wall_gap(n: usize) -> Result<Scenario, ScenarioError> {
    if n < 2 {
        return Err(ScenarioError::Dimension { min: 2, got: n });
    }
    let mut min = vec![0.0; n];
    let mut max = vec![1.0; n];
    min[0] = WALL_MIN;
    max[0] = WALL_MAX;
    min[1] = WALL_GAP_WIDTH;
    let start = centered(n, 0.1);
    let goal = centered(n, 0.9);
    // taut string around the two gap corners
    let corner_in = {
        let mut c = start.clone();
        c[0] = WALL_MIN;
        c[1] = WALL_GAP_WIDTH;
        c
    };
    let corner_out = {
        let mut c = goal.clone();
        c[0] = WALL_MAX;
        c[1] = WALL_GAP_WIDTH;
        c
    };
    let reference = distance(&start, &corner_in) + (WALL_MAX - WALL_MIN) + distance(&corner_out, &goal);
    Ok(Scenario {
        name: "wall_gap".into(),
        dimension: n,
        start,
        goal,
        reference_cost: Some(reference),
        obstacles: vec![AxisAlignedBox::new(min, max)],
    })
}

pub const ENCLOSURE_X0: (f64, f64) = (0.6, 0.9);
pub const ENCLOSURE_OTHER: (f64, f64) = (0.35, 0.65);
pub const ENCLOSURE_THICKNESS: f64 = 0.02;

/// A hollow box around the goal, open on its face farthest from the start.
///
/// The shell is the near face `x₀ ∈ [0.6, 0.62]` plus two side slabs per
/// remaining dimension, each spanning the full outer extent in `x₀`, so the
/// far face keeps only its rim.
pub fn make_goal_enclosure(n: usize) -> Result<Scenario, ScenarioError> {
    if n < 2 {
        return Err(ScenarioError::Dimension { min: 2, got: n });
    }
    let t = ENCLOSURE_THICKNESS;
    let (x_lo, x_hi) = ENCLOSURE_X0;
    let (o_lo, o_hi) = ENCLOSURE_OTHER;
    let mut outer_min = vec![o_lo; n];
    let mut outer_max = vec![o_hi; n];
    outer_min[0] = x_lo;
    outer_max[0] = x_hi;

    let mut obstacles = Vec::with_capacity(2 * n - 1);
    let mut near_face_max = outer_max.clone();
    near_face_max[0] = x_lo + t;
    obstacles.push(AxisAlignedBox::new(outer_min.clone(), near_face_max));
    for d in 1..n {
        let mut lo_max = outer_max.clone();
        lo_max[d] = o_lo + t;
        obstacles.push(AxisAlignedBox::new(outer_min.clone(), lo_max));
        let mut hi_min = outer_min.clone();
        hi_min[d] = o_hi - t;
        obstacles.push(AxisAlignedBox::new(hi_min, outer_max.clone()));
    }

    let start = centered(n, 0.1);
    let goal = centered(n, 0.75);
    // around the near outer corner, along the side, around the far rim
    let mut a = start.clone();
    a[0] = x_lo;
    a[1] = o_lo;
    let mut b = a.clone();
    b[0] = x_hi;
    let mut c = b.clone();
    c[1] = o_lo + t;
    let reference = distance(&start, &a) + distance(&a, &b) + distance(&b, &c) + distance(&c, &goal);
    Ok(Scenario {
        name: "goal_enclosure".into(),
        dimension: n,
        start,
        goal,
        reference_cost: Some(reference),
        obstacles,
    })
}

/// Collision-checking counters, monotonically non-decreasing.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CheckCounters {
    pub state_checks: u64,
    pub motion_checks: u64,
    pub interpolated_states: u64,
}

/// State and motion validity at a fixed interpolation resolution.
///
/// Motions are checked on a grid of `2^k` equal segments with spacing at
/// most `resolution · max_extent`, visiting points coarse-to-fine (midpoint
/// first) and the endpoints last. The segment is always interpolated from
/// its lexicographically smaller endpoint, so the tested points do not
/// depend on the argument order, and grids for finer resolutions contain
/// the coarser ones.
#[derive(Clone, Debug)]
pub struct ValidityOracle {
    env: Arc<dyn Environment>,
    resolution: f64,
    step: f64,
    counters: CheckCounters,
    scratch: Vec<f64>,
}

impl ValidityOracle {
    pub fn new(env: Arc<dyn Environment>, space: &StateSpace, resolution: f64) -> Self {
        assert!(resolution > 0.0, "collision resolution must be positive");
        ValidityOracle {
            env,
            resolution,
            step: resolution * space.max_extent(),
            counters: CheckCounters::default(),
            scratch: vec![0.0; space.dimension()],
        }
    }

    pub fn for_problem(problem: &ProblemInstance, resolution: f64) -> Self {
        ValidityOracle::new(problem.environment().clone(), problem.space(), resolution)
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn counters(&self) -> CheckCounters {
        self.counters
    }

    pub fn is_valid_state(&mut self, x: &[f64]) -> bool {
        self.counters.state_checks += 1;
        self.env.is_free(x)
    }

    /// Number of grid segments used for a motion of length `length`.
    pub fn segments_for(&self, length: f64) -> u64 {
        let mut segments = 1u64;
        while length / segments as f64 > self.step && segments < (1 << 62) {
            segments <<= 1;
        }
        segments
    }

    pub fn is_valid_motion(&mut self, a: &[f64], b: &[f64]) -> bool {
        self.counters.motion_checks += 1;
        let (p, q) = if a.iter().partial_cmp(b.iter()) == Some(std::cmp::Ordering::Greater) {
            (b, a)
        } else {
            (a, b)
        };
        let segments = self.segments_for(distance(p, q));
        let mut stride = segments;
        while stride > 1 {
            let half = stride / 2;
            let mut i = half;
            while i < segments {
                let t = i as f64 / segments as f64;
                for ((s, pi), qi) in self.scratch.iter_mut().zip(p).zip(q) {
                    *s = pi + (qi - pi) * t;
                }
                self.counters.interpolated_states += 1;
                if !self.env.is_free(&self.scratch) {
                    return false;
                }
                i += stride;
            }
            stride = half;
        }
        self.counters.interpolated_states += 1;
        if !self.env.is_free(p) {
            return false;
        }
        if p != q {
            self.counters.interpolated_states += 1;
            if !self.env.is_free(q) {
                return false;
            }
        }
        true
    }
}
