//! Train-count sweeps: run the generated scenario family over a list of
//! counts and modes, in parallel when asked, with deterministic output
//! ordering regardless of scheduling.

use std::fmt;
use std::sync::Mutex;

use railguard_core::sim::{run_scenario, Mode, Scenario, SimReport};

use crate::generate::{seed_trains, GenError};
use crate::report::{csv_row, simulated_ms, CSV_HEADER};

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub counts: Vec<usize>,
    pub modes: Vec<Mode>,
    pub seed: u64,
    pub jobs: usize,
}

#[derive(Debug)]
pub enum SweepError {
    Gen(GenError),
    BadSpec(String),
}

impl fmt::Display for SweepError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepError::Gen(e) => write!(f, "{e}"),
            SweepError::BadSpec(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for SweepError {}

impl From<GenError> for SweepError {
    fn from(e: GenError) -> Self {
        SweepError::Gen(e)
    }
}

#[derive(Debug)]
pub struct SweepRow {
    pub trains: usize,
    pub mode: Mode,
    pub report: SimReport,
    pub runtime_ms: u64,
}

impl SweepRow {
    pub fn csv(&self) -> String {
        csv_row(&self.report, self.mode, self.runtime_ms)
    }
}

/// Builds the scenario for one sweep point. The same (base, count, seed)
/// always yields the same trains; only the mode differs between the two
/// rows of a point.
pub fn sweep_scenario(
    base: &Scenario,
    count: usize,
    seed: u64,
    mode: Mode,
) -> Result<Scenario, GenError> {
    let mut sc = seed_trains(base, count, seed)?;
    sc.config.mode = mode;
    Ok(sc)
}

/// Runs every (count, mode) point. Points execute in parallel across
/// `jobs` workers; each point is an isolated deterministic run, and rows
/// come back sorted by (count, mode), so output is schedule-independent.
pub fn run_sweep(base: &Scenario, spec: &SweepSpec) -> Result<Vec<SweepRow>, SweepError> {
    if spec.counts.is_empty() {
        return Err(SweepError::BadSpec("the sweep needs at least one train count".into()));
    }
    if spec.modes.is_empty() {
        return Err(SweepError::BadSpec("the sweep needs at least one mode".into()));
    }
    let mut points: Vec<(usize, Mode)> = Vec::new();
    for &count in &spec.counts {
        if count < 1 {
            return Err(SweepError::BadSpec("train counts must be at least 1".into()));
        }
        for &mode in &spec.modes {
            points.push((count, mode));
        }
    }

    // validate capacity up front so workers cannot fail
    let max_count = *spec.counts.iter().max().expect("non-empty");
    sweep_scenario(base, max_count, spec.seed, Mode::Distributed)?;

    let jobs = spec.jobs.max(1).min(points.len().max(1));
    let queue = Mutex::new(points.into_iter());
    let results: Mutex<Vec<SweepRow>> = Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let point = { queue.lock().expect("queue lock").next() };
                let Some((count, mode)) = point else { break };
                let sc = sweep_scenario(base, count, spec.seed, mode)
                    .expect("capacity validated before dispatch");
                let report = run_scenario(&sc);
                let runtime_ms = simulated_ms(&sc.config);
                results
                    .lock()
                    .expect("results lock")
                    .push(SweepRow { trains: count, mode, report, runtime_ms });
            });
        }
    });

    let mut rows = results.into_inner().expect("workers done");
    rows.sort_by_key(|r| (r.trains, r.mode.label()));
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.csv());
        out.push('\n');
    }
    out
}

/// Parses `a..b[:step]` into an inclusive count list.
pub fn parse_counts(spec: &str) -> Result<Vec<usize>, String> {
    let (range, step) = match spec.split_once(':') {
        Some((r, s)) => {
            let step: usize =
                s.parse().map_err(|_| format!("bad step `{s}` in `{spec}`"))?;
            if step == 0 {
                return Err("step must be positive".into());
            }
            (r, step)
        }
        None => (spec, 1),
    };
    let counts = if let Some((a, b)) = range.split_once("..") {
        let a: usize = a.parse().map_err(|_| format!("bad start `{a}` in `{spec}`"))?;
        let b: usize = b.parse().map_err(|_| format!("bad end `{b}` in `{spec}`"))?;
        if a > b {
            return Err(format!("empty range `{spec}`"));
        }
        (a..=b).step_by(step).collect()
    } else {
        let single: usize =
            range.parse().map_err(|_| format!("bad train count `{range}`"))?;
        vec![single]
    };
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn count_ranges_parse() {
        assert_eq!(parse_counts("2..30:2").unwrap(), (2..=30).step_by(2).collect::<Vec<_>>());
        assert_eq!(parse_counts("4..6").unwrap(), vec![4, 5, 6]);
        assert_eq!(parse_counts("8").unwrap(), vec![8]);
        assert!(parse_counts("8..2").is_err());
        assert!(parse_counts("2..8:0").is_err());
        assert!(parse_counts("x").is_err());
    }

    #[test]
    fn empty_specs_are_rejected() {
        let base = crate::scenario::parse_scenario(
            include_str!("../../../scenarios/sweep_base.scn"),
            "sweep_base",
        )
        .unwrap();
        let no_counts =
            SweepSpec { counts: vec![], modes: vec![Mode::Distributed], seed: 0, jobs: 1 };
        assert!(matches!(run_sweep(&base, &no_counts), Err(SweepError::BadSpec(_))));
        let no_modes = SweepSpec { counts: vec![2], modes: vec![], seed: 0, jobs: 1 };
        assert!(matches!(run_sweep(&base, &no_modes), Err(SweepError::BadSpec(_))));
    }
}
