//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! `ACCEPTANCE_ONLY=4,7` runs a subset.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use aitstar::bench::{median_ci, run_trial, run_trials, ExperimentConfig, CI_LEVEL};
use aitstar::planner::{Event, Planner, PlannerConfig};
use aitstar::scenarios::{make_goal_enclosure, Scenario};
use aitstar::space::rgg_radius;
use aitstar::trace::TrialTrace;
use common::*;

/// Offline dense-graph reference for wall-gap R⁴ at resolution 1e-4: median
/// over five seeds of lazy A* on 10⁵ uniform samples.
const WALL_GAP_R4_DENSE_REFERENCE: f64 = 1.383799385038;
/// Taut-string cost through the wall-gap opening, a lower bound for any
/// solution.
const WALL_GAP_R4_INFIMUM: f64 = 1.193434954627;

const TRIALS: u32 = 100;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn reverse_search_oracle_criterion() -> Verdict {
    let t = Instant::now();
    let r = reverse_search_oracle(100, 10, 10_000);
    let elapsed = t.elapsed();
    verdict(
        r.graphs == 100 && r.passes(1e-9) && elapsed <= Duration::from_secs(60),
        format!(
            "{} graphs, {} repairs, max |h - dijkstra| {:.1e}, max |repair - restart| {:.1e}, {:.1} s",
            r.graphs,
            r.invalidations,
            r.dijkstra_error,
            r.restart_error,
            elapsed.as_secs_f64()
        ),
    )
}

fn batch_optimality_criterion() -> Verdict {
    let t = Instant::now();
    let (checks, worst) = batch_optimality(25, 20_000, true);
    let elapsed = t.elapsed();
    verdict(
        worst <= 1e-9 && elapsed <= Duration::from_secs(120),
        format!("{checks} batch ends on 25 instances, max |cost - A*| {worst:.1e}, {:.1} s", elapsed.as_secs_f64()),
    )
}

fn invariants_criterion() -> Verdict {
    let r = fuzz_invariants(100, 500, 100, 30_000);
    verdict(
        r.runs == 100 && r.passes(1e-9),
        format!(
            "{} runs x 500 iterations, {} checkpoints, {} invalidations checked, queue mismatches {}, \
             inconsistency {:.1e}, inadmissibility {:.1e}, restart gap {:.1e}, degradation {:.1e}",
            r.runs,
            r.checkpoints,
            r.invalidations_checked,
            r.queue_mismatches,
            r.inconsistency,
            r.inadmissibility,
            r.restart_error,
            r.degradation
        ),
    )
}

fn radius_criterion() -> Verdict {
    let r = rgg_radius(2, 100, 1.0, 1.001);
    // the unit disc has measure π, so r = η·sqrt(3·ln q / (π q))
    let independent = 1.001 * (3.0 * 100f64.ln() / (std::f64::consts::PI * 100.0)).sqrt();
    let monotone = (3..100_000).all(|q| rgg_radius(2, q + 1, 1.0, 1.001) < rgg_radius(2, q, 1.0, 1.001));
    verdict(
        (r - 0.20992).abs() <= 1e-4 && (r - independent).abs() <= 1e-12 && monotone,
        format!("r(100) = {r:.6}, independent {independent:.6}, decreasing on [3, 1e5]: {monotone}"),
    )
}

fn strictly_improving(t: &TrialTrace) -> bool {
    t.events.windows(2).all(|w| w[1].cost < w[0].cost && w[1].time_s >= w[0].time_s)
        && t.final_cost == t.events.last().map_or(f64::INFINITY, |e| e.cost)
}

fn anytime_criterion() -> Verdict {
    let mut config = ExperimentConfig::new("wall_gap", 4, &["aitstar"]);
    config.trials = TRIALS;
    config.budget_s = Some(5.0);
    config.resolution = 1e-4;
    let records = run_trials(&config, aitstar::bench::worker_count()).expect("valid experiment");
    let traces: Vec<&TrialTrace> = records.iter().map(|r| &r.trace).collect();
    let success = traces.iter().filter(|t| t.success).count() as f64 / traces.len() as f64;
    let monotone = traces.iter().all(|t| strictly_improving(t));
    let finals: Vec<f64> = traces.iter().map(|t| t.final_cost).collect();
    let m = median_ci(&finals, CI_LEVEL).expect("non-empty");
    let ratio = m.median / WALL_GAP_R4_DENSE_REFERENCE;
    verdict(
        success >= 0.99 && monotone && ratio <= 1.02 && m.median >= WALL_GAP_R4_INFIMUM,
        format!(
            "success {:.0}%, strictly improving traces: {monotone}, median final cost {:.4} \
             (99% CI [{:.4}, {:.4}]) = {:.3} x dense reference {WALL_GAP_R4_DENSE_REFERENCE}, infimum {WALL_GAP_R4_INFIMUM}",
            100.0 * success,
            m.median,
            m.lower,
            m.upper,
            ratio
        ),
    )
}

const ORDERING_PLANNERS: [&str; 4] = ["aitstar", "bitstar", "rrtstar", "rrtconnect"];

/// Median initial-solution time and success rate per planner. Wall times
/// take the fastest of `repeats` runs of each seeded trial.
fn initial_times(config: &ExperimentConfig, repeats: usize) -> Vec<(f64, f64)> {
    let problem = Scenario::builtin(&config.scenario, config.dimension)
        .and_then(|s| s.to_problem())
        .expect("built-in scenario");
    let mut times = vec![Vec::new(); ORDERING_PLANNERS.len()];
    for trial in 0..config.trials {
        for (i, planner) in ORDERING_PLANNERS.iter().enumerate() {
            let runs: Vec<TrialTrace> = (0..repeats)
                .map(|_| run_trial(planner, &problem, config, trial).expect("valid planner"))
                .collect();
            let first = |t: &TrialTrace| t.initial().map_or(f64::INFINITY, |e| e.time_s);
            times[i].push(runs.iter().map(first).fold(f64::INFINITY, f64::min));
        }
    }
    times
        .iter()
        .map(|t| {
            let success = t.iter().filter(|x| x.is_finite()).count() as f64 / t.len() as f64;
            (median_ci(t, CI_LEVEL).expect("non-empty").median, success)
        })
        .collect()
}

fn ordering_criterion() -> Verdict {
    let mut config = ExperimentConfig::new("wall_gap", 4, &ORDERING_PLANNERS);
    config.trials = TRIALS;
    config.budget_s = Some(5.0);
    config.resolution = 1e-4;
    config.first_solution = true;
    let wall = initial_times(&config, 3);
    config.logical_time = true;
    let logical = initial_times(&config, 1);
    let ordered = |m: &[(f64, f64)]| m[0].0 <= m[1].0 && m[1].0 <= m[2].0 && m[0].1 >= m[3].1;
    let show = |m: &[(f64, f64)], unit: f64| {
        ORDERING_PLANNERS
            .iter()
            .zip(m)
            .map(|(p, (t, s))| format!("{p} {:.3} ms/{:.0}%", t * unit, 100.0 * s))
            .collect::<Vec<_>>()
            .join(", ")
    };
    verdict(
        ordered(&wall),
        format!(
            "wall median initial time: {}; logical (1e6 ticks/s, informational, ordered: {}): {}",
            show(&wall, 1e3),
            ordered(&logical),
            show(&logical, 1e3)
        ),
    )
}

fn determinism_criterion() -> Verdict {
    let dir = tempfile::tempdir().expect("temp dir");
    let config_path = dir.path().join("experiment.toml");
    std::fs::write(
        &config_path,
        "scenario = \"wall_gap\"\ndimension = 4\n\
         planners = [\"aitstar\", \"bitstar\", \"rrtstar\", \"rrtconnect\", \"rrt\"]\n\
         trials = 10\nbudget_s = 0.05\nresolution = 1e-4\n",
    )
    .expect("write config");
    let run = |out: &str| {
        let out = dir.path().join(out);
        let status = Command::new(env!("CARGO_BIN_EXE_bench"))
            .args(["run", "--config"])
            .arg(&config_path)
            .arg("--logical-time")
            .arg("--out")
            .arg(&out)
            .output()
            .expect("bench runs");
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        std::fs::read(out.join("wall_gap_r4.csv")).expect("csv written")
    };
    let (a, b) = (run("a"), run("b"));
    let rows = a.iter().filter(|c| **c == b'\n').count();
    verdict(a == b && rows > 50, format!("{} bytes, {rows} lines, identical: {}", a.len(), a == b))
}

fn goal_enclosure_criterion() -> Verdict {
    let problem = make_goal_enclosure(4).unwrap().to_problem().unwrap();
    let config = PlannerConfig {
        resolution: 1e-4,
        ..Default::default()
    };
    let mut planner = Planner::ait_star(&problem, config).unwrap();
    let mut repairs = 0;
    let mut first_repair = None;
    let mut repair_expansions = 0;
    let mut restart_gap = 0.0f64;
    for _ in 0..20_000 {
        let before = planner.reverse_search().expansions();
        let event = planner.iterate();
        if event == (Event::EdgeEvaluated { valid: false }) {
            let spent = planner.reverse_search().expansions() - before;
            first_repair.get_or_insert(spent);
            repair_expansions += spent;
            repairs += 1;
            if repairs <= 50 {
                let (g, rs) = settled(&planner);
                restart_gap = restart_gap.max(label_difference(&labels(&rs, &g), &restart_labels(&g)));
            }
        }
        if repairs >= 50 && planner.cost().is_finite() {
            break;
        }
    }
    let first = first_repair.unwrap_or(0);
    verdict(
        first > 0 && restart_gap <= 1e-9,
        format!(
            "first repair expanded {first} states, {repair_expansions} over {repairs} repairs, \
             max |repair - restart| {restart_gap:.1e}, solution cost {:.4}",
            planner.cost()
        ),
    )
}

fn main() -> ExitCode {
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect());
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("reverse-search oracle", reverse_search_oracle_criterion),
        ("batch-quiescence optimality", batch_optimality_criterion),
        ("label invariants under fuzzing", invariants_criterion),
        ("connection radius", radius_criterion),
        ("anytime behavior on wall-gap R4", anytime_criterion),
        ("initial-solution ordering on wall-gap R4", ordering_criterion),
        ("deterministic CSV under logical time", determinism_criterion),
        ("goal-enclosure repairs", goal_enclosure_criterion),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let id = i + 1;
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let t = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        if !v.pass {
            failed += 1;
        }
        println!(
            "{} criterion {id} {name} ({:.1} s): {}",
            if v.pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            v.detail
        );
    }
    if failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
