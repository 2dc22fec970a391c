//! Sampling-based optimal motion planning in Euclidean configuration spaces.
//!
//! The main planner is [`Planner`], an asymmetric bidirectional search: a
//! lazy forward tree search checks edges for collisions, and a reverse
//! search without collision checks supplies its heuristic. The reverse
//! search is repaired incrementally when an edge turns out to be invalid.
//! The same engine runs in BIT* mode with an a-priori heuristic.
//!
//! ```
//! use aitstar::{make_wall_gap, solve, ClockMode, Planner, PlannerConfig, StopCondition};
//!
//! let problem = make_wall_gap(2).unwrap().to_problem().unwrap();
//! let mut planner = Planner::ait_star(&problem, PlannerConfig::default()).unwrap();
//! let outcome = solve(&mut planner, StopCondition::iterations(5_000), ClockMode::Logical);
//! assert!(outcome.solution.is_some());
//! ```

pub mod baselines;
pub mod bench;
pub mod graph;
mod heap;
pub mod kdtree;
pub mod planner;
pub mod reverse_search;
pub mod scenarios;
pub mod space;
pub mod trace;

pub use graph::{Graph, StateId};
pub use planner::{Event, HeuristicMode, Planner, PlannerConfig};
pub use reverse_search::{ReverseSearch, Termination};
pub use scenarios::{make_free, make_goal_enclosure, make_wall_gap, Scenario, ValidityOracle};
pub use space::{InformedSampler, ProblemInstance, State, StateSpace};
pub use trace::{solve, AnytimePlanner, ClockMode, Outcome, Solution, StopCondition};
