//! Seeded benchmark experiments: configuration, trial execution, CSV traces
//! and summary statistics.
//!
//! An experiment file is flat TOML:
//!
//! ```toml
//! name = "wall_gap_r4"          # optional, defaults to "<scenario>_r<dimension>"
//! scenario = "wall_gap"         # wall_gap | goal_enclosure | free
//! dimension = 4
//! planners = ["aitstar", "bitstar", "rrtstar", "rrtconnect"]
//! trials = 100                  # default 100
//! budget_s = 1.0                # default 1 / 10 / 100 s for n ≤ 4 / ≤ 8 / larger
//! seed = 0                      # trial i uses seed + i
//! resolution = 1e-4             # collision-checking resolution, default 1e-6
//! logical_time = false          # measure time in logical ticks
//! first_solution = false        # stop each trial at its first solution
//! out_dir = "results"
//! time_grid = [0.1, 0.5, 1.0]   # optional, defaults to a 1-2-5 grid up to the budget
//!
//! [overrides.aitstar]           # optional per-planner settings
//! batch_size = 100
//! eta = 1.001
//! pruning = true
//!
//! [overrides.rrtstar]
//! goal_bias = 0.05
//! max_edge_length = 0.5
//! ```

mod csv;
mod stats;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use self::csv::{read_csv, write_csv, CsvError, ParsedCsv, TrialRecord, CSV_HEADER};
pub use self::stats::{binomial_half_coverage, ci_ranks, median_ci, MedianCi, StatsError};

use crate::baselines::{Rrt, RrtConfig, RrtConfigError, RrtConnect, RrtStar};
use crate::planner::{ConfigError, Planner, PlannerConfig};
use crate::scenarios::{Scenario, ScenarioError, DEFAULT_RESOLUTION};
use crate::space::ProblemInstance;
use crate::trace::{solve, AnytimePlanner, ClockMode, StopCondition, TrialTrace};

/// Confidence level of every reported interval.
pub const CI_LEVEL: f64 = 0.99;

/// Planner names accepted in experiment files.
pub const PLANNERS: [&str; 5] = ["aitstar", "bitstar", "rrtstar", "rrtconnect", "rrt"];

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("failed to parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("failed to write summary: {0}")]
    Serialize(#[from] toml::ser::Error),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("unknown planner `{0}`")]
    UnknownPlanner(String),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("planner config: {0}")]
    Planner(#[from] ConfigError),
    #[error("baseline config: {0}")]
    Baseline(#[from] RrtConfigError),
    #[error(transparent)]
    Csv(#[from] CsvError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> BenchError + '_ {
    move |source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Optional per-planner settings; unset fields keep the planner defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannerOverrides {
    pub batch_size: Option<usize>,
    pub eta: Option<f64>,
    pub pruning: Option<bool>,
    pub goal_bias: Option<f64>,
    pub max_edge_length: Option<f64>,
}

/// One experiment: a scenario, a set of planners and the trial protocol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub scenario: String,
    pub dimension: usize,
    pub planners: Vec<String>,
    #[serde(default = "default_trials")]
    pub trials: u32,
    #[serde(default)]
    pub budget_s: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_resolution")]
    pub resolution: f64,
    #[serde(default)]
    pub logical_time: bool,
    #[serde(default)]
    pub first_solution: bool,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub time_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub overrides: BTreeMap<String, PlannerOverrides>,
}

fn default_trials() -> u32 {
    100
}

fn default_resolution() -> f64 {
    DEFAULT_RESOLUTION
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("results")
}

/// Default time budget for an `n`-dimensional experiment.
pub fn default_budget(n: usize) -> f64 {
    match n {
        0..=4 => 1.0,
        5..=8 => 10.0,
        _ => 100.0,
    }
}

/// `budget × {1, 2, 5} × 10^k` for `k` from -3 up to the budget.
pub fn default_time_grid(budget: f64) -> Vec<f64> {
    let mut grid: Vec<f64> = (-3..=0)
        .flat_map(|k: i32| [1.0, 2.0, 5.0].map(|m| budget * m / 10f64.powi(-k)))
        .filter(|t| *t <= budget)
        .collect();
    if grid.last() != Some(&budget) {
        grid.push(budget);
    }
    grid
}

impl ExperimentConfig {
    pub fn new(scenario: &str, dimension: usize, planners: &[&str]) -> Self {
        ExperimentConfig {
            name: None,
            scenario: scenario.to_string(),
            dimension,
            planners: planners.iter().map(|p| p.to_string()).collect(),
            trials: default_trials(),
            budget_s: None,
            seed: 0,
            resolution: default_resolution(),
            logical_time: false,
            first_solution: false,
            out_dir: default_out_dir(),
            time_grid: None,
            overrides: BTreeMap::new(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, BenchError> {
        let config: ExperimentConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_toml(&text)
    }

    pub fn experiment_name(&self) -> String {
        self.name
            .clone()
            .unwrap_or_else(|| format!("{}_r{}", self.scenario, self.dimension))
    }

    pub fn budget(&self) -> f64 {
        self.budget_s.unwrap_or_else(|| default_budget(self.dimension))
    }

    pub fn grid(&self) -> Vec<f64> {
        self.time_grid
            .clone()
            .unwrap_or_else(|| default_time_grid(self.budget()))
    }

    pub fn clock(&self) -> ClockMode {
        if self.logical_time {
            ClockMode::Logical
        } else {
            ClockMode::Wall
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.trials < 1 {
            return Err(BenchError::Invalid("trials must be at least 1".into()));
        }
        let budget = self.budget();
        if !(budget > 0.0 && budget.is_finite()) {
            return Err(BenchError::Invalid(format!("budget must be positive, got {budget}")));
        }
        if self.planners.is_empty() {
            return Err(BenchError::Invalid("no planners listed".into()));
        }
        if let Some(p) = self
            .planners
            .iter()
            .chain(self.overrides.keys())
            .find(|p| !PLANNERS.contains(&p.as_str()))
        {
            return Err(BenchError::UnknownPlanner(p.clone()));
        }
        if let Some(grid) = &self.time_grid {
            if grid.is_empty() || grid.iter().any(|t| !(*t >= 0.0)) || !grid.is_sorted() {
                return Err(BenchError::Invalid("time_grid must be non-empty, non-negative and sorted".into()));
            }
        }
        if !(self.resolution > 0.0) {
            return Err(BenchError::Invalid(format!("resolution must be positive, got {}", self.resolution)));
        }
        Scenario::builtin(&self.scenario, self.dimension)?;
        Ok(())
    }

    fn stop(&self) -> StopCondition {
        let stop = StopCondition::time(self.budget());
        if self.first_solution {
            stop.or_first_solution()
        } else {
            stop
        }
    }
}

/// Builds the named planner for one trial.
pub fn build_planner(
    name: &str,
    problem: &ProblemInstance,
    config: &ExperimentConfig,
    seed: u64,
) -> Result<Box<dyn AnytimePlanner>, BenchError> {
    let o = config.overrides.get(name).cloned().unwrap_or_default();
    let graph_config = || {
        let d = PlannerConfig::default();
        PlannerConfig {
            batch_size: o.batch_size.unwrap_or(d.batch_size),
            eta: o.eta.unwrap_or(d.eta),
            pruning: o.pruning.unwrap_or(d.pruning),
            resolution: config.resolution,
            seed,
            ..d
        }
    };
    let rrt_config = || {
        let d = RrtConfig::for_problem(problem);
        RrtConfig {
            goal_bias: o.goal_bias.unwrap_or(d.goal_bias),
            max_edge_length: o.max_edge_length.unwrap_or(d.max_edge_length),
            eta: o.eta.unwrap_or(d.eta),
            seed,
            resolution: config.resolution,
        }
    };
    Ok(match name {
        "aitstar" => Box::new(Planner::ait_star(problem, graph_config())?),
        "bitstar" => Box::new(Planner::bit_star(problem, graph_config())?),
        "rrtstar" => Box::new(RrtStar::new(problem, rrt_config())?),
        "rrtconnect" => Box::new(RrtConnect::new(problem, rrt_config())?),
        "rrt" => Box::new(Rrt::new(problem, rrt_config())?),
        other => return Err(BenchError::UnknownPlanner(other.to_string())),
    })
}

/// Runs a single seeded trial.
pub fn run_trial(
    planner: &str,
    problem: &ProblemInstance,
    config: &ExperimentConfig,
    trial: u32,
) -> Result<TrialTrace, BenchError> {
    let seed = config.seed.wrapping_add(trial as u64);
    let mut p = build_planner(planner, problem, config, seed)?;
    let mut trace = solve(p.as_mut(), config.stop(), config.clock()).trace;
    trace.trial = trial;
    trace.seed = seed;
    Ok(trace)
}

/// Worker count: `BENCH_THREADS` if set, else the available parallelism.
pub fn worker_count() -> usize {
    std::env::var("BENCH_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|n| *n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Runs every (planner, trial) pair on up to `workers` threads. Records are
/// sorted by (planner, trial).
pub fn run_trials(config: &ExperimentConfig, workers: usize) -> Result<Vec<TrialRecord>, BenchError> {
    config.validate()?;
    let problem = Scenario::builtin(&config.scenario, config.dimension)?.to_problem()?;
    let jobs: Vec<(&str, u32)> = config
        .planners
        .iter()
        .flat_map(|p| (0..config.trials).map(move |t| (p.as_str(), t)))
        .collect();
    let next = AtomicUsize::new(0);
    let results = Mutex::new(Vec::with_capacity(jobs.len()));
    std::thread::scope(|s| {
        for _ in 0..workers.clamp(1, jobs.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(planner, trial)) = jobs.get(i) else {
                    break;
                };
                let r = run_trial(planner, &problem, config, trial).map(|trace| TrialRecord {
                    planner: planner.to_string(),
                    trace,
                });
                results.lock().expect("no worker panicked").push(r);
            });
        }
    });
    let mut records = results
        .into_inner()
        .expect("no worker panicked")
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    records.sort_by(|a, b| (&a.planner, a.trace.trial).cmp(&(&b.planner, b.trace.trial)));
    Ok(records)
}

/// Per-planner statistics. Unsuccessful trials count as infinite time and cost.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlannerSummary {
    pub planner: String,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub initial_time: MedianCi,
    pub initial_cost: MedianCi,
    pub final_cost: MedianCi,
    /// Cost at each point of the time grid.
    pub cost_at: Vec<MedianCi>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub experiment: String,
    pub scenario: String,
    pub dimension: usize,
    pub level: f64,
    pub time_grid: Vec<f64>,
    pub planners: Vec<PlannerSummary>,
}

impl SummaryStats {
    pub fn planner(&self, name: &str) -> Option<&PlannerSummary> {
        self.planners.iter().find(|p| p.planner == name)
    }

    pub fn to_toml(&self) -> Result<String, BenchError> {
        Ok(toml::to_string(self)?)
    }

    pub fn from_toml(text: &str) -> Result<Self, BenchError> {
        Ok(toml::from_str(text)?)
    }

    /// Largest absolute difference between matching finite statistics, or
    /// `None` if the two summaries differ in shape or in which entries are
    /// infinite.
    pub fn max_difference(&self, other: &SummaryStats) -> Option<f64> {
        if self.planners.len() != other.planners.len() || self.time_grid != other.time_grid {
            return None;
        }
        let mut worst = 0.0f64;
        let mut diff = |a: f64, b: f64| {
            if a == b {
                true
            } else if a.is_finite() && b.is_finite() {
                worst = worst.max((a - b).abs());
                true
            } else {
                false
            }
        };
        for (a, b) in self.planners.iter().zip(&other.planners) {
            if a.planner != b.planner || a.trials != b.trials || a.cost_at.len() != b.cost_at.len() {
                return None;
            }
            let ok = diff(a.success_rate, b.success_rate)
                && [(a.initial_time, b.initial_time), (a.initial_cost, b.initial_cost), (a.final_cost, b.final_cost)]
                    .into_iter()
                    .chain(a.cost_at.iter().copied().zip(b.cost_at.iter().copied()))
                    .all(|(x, y)| diff(x.lower, y.lower) && diff(x.median, y.median) && diff(x.upper, y.upper));
            if !ok {
                return None;
            }
        }
        Some(worst)
    }
}

/// Summarizes records grouped by planner, in order of first appearance.
pub fn summarize(
    experiment: &str,
    scenario: &str,
    dimension: usize,
    records: &[TrialRecord],
    time_grid: &[f64],
) -> Result<SummaryStats, BenchError> {
    let mut names: Vec<&str> = Vec::new();
    for r in records {
        if !names.contains(&r.planner.as_str()) {
            names.push(&r.planner);
        }
    }
    let mut planners = Vec::new();
    for name in names {
        let traces: Vec<&TrialTrace> = records.iter().filter(|r| r.planner == name).map(|r| &r.trace).collect();
        let column = |f: &dyn Fn(&TrialTrace) -> f64| -> Result<MedianCi, StatsError> {
            median_ci(&traces.iter().map(|t| f(t)).collect::<Vec<_>>(), CI_LEVEL)
        };
        let successes = traces.iter().filter(|t| t.final_cost.is_finite()).count();
        planners.push(PlannerSummary {
            planner: name.to_string(),
            trials: traces.len(),
            successes,
            success_rate: successes as f64 / traces.len() as f64,
            initial_time: column(&|t| t.initial().map_or(f64::INFINITY, |e| e.time_s))?,
            initial_cost: column(&|t| t.initial().map_or(f64::INFINITY, |e| e.cost))?,
            final_cost: column(&|t| t.final_cost)?,
            cost_at: time_grid
                .iter()
                .map(|&g| column(&|t| t.cost_at(g)))
                .collect::<Result<_, _>>()?,
        });
    }
    Ok(SummaryStats {
        experiment: experiment.to_string(),
        scenario: scenario.to_string(),
        dimension,
        level: CI_LEVEL,
        time_grid: time_grid.to_vec(),
        planners,
    })
}

/// Files written by [`run_experiment`].
#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub csv_path: PathBuf,
    pub summary_path: PathBuf,
    pub records: Vec<TrialRecord>,
    pub summary: SummaryStats,
}

/// Runs all trials and writes `<out_dir>/<name>.csv` and
/// `<out_dir>/<name>.summary.toml`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput, BenchError> {
    let records = run_trials(config, worker_count())?;
    let name = config.experiment_name();
    let summary = summarize(&name, &config.scenario, config.dimension, &records, &config.grid())?;
    fs::create_dir_all(&config.out_dir).map_err(io_err(&config.out_dir))?;
    let csv_path = config.out_dir.join(format!("{name}.csv"));
    let summary_path = config.out_dir.join(format!("{name}.summary.toml"));
    let file = fs::File::create(&csv_path).map_err(io_err(&csv_path))?;
    write_csv(file, &name, &config.scenario, config.dimension, &records)?;
    fs::write(&summary_path, summary.to_toml()?).map_err(io_err(&summary_path))?;
    Ok(ExperimentOutput {
        csv_path,
        summary_path,
        records,
        summary,
    })
}

/// Recomputes the summary of a CSV written by [`run_experiment`]. Without an
/// explicit grid, the grid of the neighboring summary file is reused, or a
/// default grid up to the longest trial.
pub fn summarize_csv(path: &Path, time_grid: Option<Vec<f64>>) -> Result<SummaryStats, BenchError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let parsed = read_csv(file)?;
    let grid = match time_grid {
        Some(g) => g,
        None => {
            let sibling = path.with_extension("summary.toml");
            match fs::read_to_string(&sibling) {
                Ok(text) => SummaryStats::from_toml(&text)?.time_grid,
                Err(_) => {
                    let longest = parsed
                        .records
                        .iter()
                        .map(|r| r.trace.end_time_s)
                        .fold(0.0, f64::max);
                    default_time_grid(if longest > 0.0 { longest } else { 1.0 })
                }
            }
        }
    };
    summarize(&parsed.experiment, &parsed.scenario, parsed.dimension, &parsed.records, &grid)
}
