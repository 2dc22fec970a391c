//! Trace CSV writer and parser.

use std::io::{Read, Write};

use thiserror::Error;

use crate::trace::{Counters, TraceEvent, TrialTrace};

pub const CSV_HEADER: [&str; 14] = [
    "experiment",
    "scenario",
    "dimension",
    "planner",
    "trial",
    "seed",
    "event_index",
    "event_time_s",
    "cost",
    "num_samples",
    "num_motion_checks",
    "num_interpolated_states",
    "num_queue_pops",
    "num_reverse_expansions",
];

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("csv: {0}")]
    Csv(#[from] ::csv::Error),
    #[error("csv line {line}: {message}")]
    Malformed { line: u64, message: String },
}

/// One trial of one planner.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub planner: String,
    pub trace: TrialTrace,
}

impl TrialRecord {
    /// The record with every counter absent from the CSV cleared.
    pub fn projected(&self) -> TrialRecord {
        let keep = |c: &Counters| Counters {
            samples: c.samples,
            motion_checks: c.motion_checks,
            interpolated_states: c.interpolated_states,
            queue_pops: c.queue_pops,
            reverse_expansions: c.reverse_expansions,
            ..Counters::default()
        };
        let mut r = self.clone();
        r.trace.counters = keep(&r.trace.counters);
        for e in &mut r.trace.events {
            e.counters = keep(&e.counters);
        }
        r
    }
}

/// Contents of a trace CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct ParsedCsv {
    pub experiment: String,
    pub scenario: String,
    pub dimension: usize,
    pub records: Vec<TrialRecord>,
}

fn real(v: f64) -> String {
    // Display prints `inf` and the shortest round-tripping decimal
    format!("{v}")
}

/// Writes one row per improvement event followed by a terminal row per
/// trial holding the end time, final cost and final counters.
pub fn write_csv<W: Write>(
    out: W,
    experiment: &str,
    scenario: &str,
    dimension: usize,
    records: &[TrialRecord],
) -> Result<(), CsvError> {
    let mut w = ::csv::WriterBuilder::new()
        .terminator(::csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    let dimension = dimension.to_string();
    for r in records {
        let t = &r.trace;
        let terminal = TraceEvent {
            time_s: t.end_time_s,
            cost: t.final_cost,
            counters: t.counters,
        };
        for (i, e) in t.events.iter().chain(std::iter::once(&terminal)).enumerate() {
            let c = &e.counters;
            w.write_record([
                experiment,
                scenario,
                &dimension,
                &r.planner,
                &t.trial.to_string(),
                &t.seed.to_string(),
                &i.to_string(),
                &real(e.time_s),
                &real(e.cost),
                &c.samples.to_string(),
                &c.motion_checks.to_string(),
                &c.interpolated_states.to_string(),
                &c.queue_pops.to_string(),
                &c.reverse_expansions.to_string(),
            ])?;
        }
    }
    w.flush().map_err(::csv::Error::from)?;
    Ok(())
}

#[derive(serde::Deserialize)]
struct Row {
    experiment: String,
    scenario: String,
    dimension: usize,
    planner: String,
    trial: u32,
    seed: u64,
    event_index: usize,
    event_time_s: f64,
    cost: f64,
    num_samples: u64,
    num_motion_checks: u64,
    num_interpolated_states: u64,
    num_queue_pops: u64,
    num_reverse_expansions: u64,
}

/// Parses a CSV written by [`write_csv`]. Counters not stored in the CSV are
/// zero, so the result equals [`TrialRecord::projected`] of what was written.
pub fn read_csv<R: Read>(input: R) -> Result<ParsedCsv, CsvError> {
    let mut reader = ::csv::Reader::from_reader(input);
    let header = reader.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(CsvError::Malformed {
            line: 1,
            message: format!("unexpected header `{}`", header.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut parsed: Option<ParsedCsv> = None;
    let mut current: Option<(TrialRecord, TraceEvent)> = None;
    let finish = |parsed: &mut ParsedCsv, (mut record, last): (TrialRecord, TraceEvent)| {
        record.trace.events.pop();
        record.trace.end_time_s = last.time_s;
        record.trace.final_cost = last.cost;
        record.trace.success = last.cost.is_finite();
        record.trace.counters = last.counters;
        parsed.records.push(record);
    };
    for (i, row) in reader.deserialize::<Row>().enumerate() {
        let line = i as u64 + 2;
        let bad = |message: &str| CsvError::Malformed {
            line,
            message: message.to_string(),
        };
        let row = row?;
        let p = parsed.get_or_insert_with(|| ParsedCsv {
            experiment: row.experiment.clone(),
            scenario: row.scenario.clone(),
            dimension: row.dimension,
            records: Vec::new(),
        });
        if (p.experiment.as_str(), p.scenario.as_str(), p.dimension) != (&row.experiment, &row.scenario, row.dimension) {
            return Err(bad("rows from more than one experiment"));
        }
        let event = TraceEvent {
            time_s: row.event_time_s,
            cost: row.cost,
            counters: Counters {
                samples: row.num_samples,
                motion_checks: row.num_motion_checks,
                interpolated_states: row.num_interpolated_states,
                queue_pops: row.num_queue_pops,
                reverse_expansions: row.num_reverse_expansions,
                ..Counters::default()
            },
        };
        if row.event_index == 0 {
            if let Some(done) = current.take() {
                finish(p, done);
            }
            let trace = TrialTrace {
                trial: row.trial,
                seed: row.seed,
                events: Vec::new(),
                final_cost: f64::INFINITY,
                success: false,
                end_time_s: 0.0,
                counters: Counters::default(),
            };
            current = Some((
                TrialRecord {
                    planner: row.planner.clone(),
                    trace,
                },
                event,
            ));
        }
        let Some((record, last)) = current.as_mut() else {
            return Err(bad("trial does not start at event_index 0"));
        };
        if record.planner != row.planner || record.trace.trial != row.trial || record.trace.seed != row.seed {
            return Err(bad("trial changes without restarting event_index"));
        }
        if row.event_index != record.trace.events.len() {
            return Err(bad("event_index out of sequence"));
        }
        record.trace.events.push(event);
        *last = event;
    }
    let mut parsed = parsed.ok_or(CsvError::Malformed {
        line: 1,
        message: "no rows".into(),
    })?;
    if let Some(done) = current.take() {
        finish(&mut parsed, done);
    }
    Ok(parsed)
}
