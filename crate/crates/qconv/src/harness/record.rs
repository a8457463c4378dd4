use std::fmt::Write as _;

use serde::Serialize;

use super::config::ExperimentKind;
use super::invariants::CheckReport;
use crate::decider::mean_std;
use crate::error::{Error, Result};

pub const CSV_VERSION: &str = "v1";

pub const TRIAL_COLUMNS: [&str; 8] = ["trial", "seed", "input", "answer", "correct", "queries", "rounds", "wall_ms"];
pub const SEPARATION_COLUMNS: [&str; 3] = ["n", "classical_queries", "quantum_bound"];

/// Extra per-trial columns of the separation experiment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeparationColumns {
    pub n: usize,
    pub classical_queries: usize,
    /// `√(G |path(x)| log₂ n)` for the sampled input.
    pub quantum_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    /// Master seed; the trial index selects the stream.
    pub seed: u64,
    pub input: String,
    pub answer: String,
    pub correct: bool,
    pub queries: u64,
    pub rounds: usize,
    pub wall_ms: f64,
    pub separation: Option<SeparationColumns>,
}

/// Per-`n` aggregates of the separation experiment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupSummary {
    pub n: usize,
    pub trials: usize,
    /// Exact average of the in-order classical cost.
    pub classical_average: f64,
    pub classical_mean: f64,
    pub quantum_mean: f64,
    pub quantum_sd: f64,
    /// Exact average of the reference bound.
    pub quantum_bound: f64,
    pub error_rate: f64,
    pub space_dim: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub trials: usize,
    pub mean: f64,
    pub stddev: f64,
    pub error_rate: f64,
    pub total_queries: u128,
}

impl Summary {
    pub fn of(records: &[TrialRecord]) -> Self {
        let (mean, stddev) = mean_std(records.iter().map(|r| r.queries as f64));
        let errors = records.iter().filter(|r| !r.correct).count();
        Summary {
            trials: records.len(),
            mean,
            stddev,
            error_rate: errors as f64 / records.len().max(1) as f64,
            total_queries: records.iter().map(|r| r.queries as u128).sum(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialTable {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub records: Vec<TrialRecord>,
    pub groups: Vec<GroupSummary>,
    /// `key=value` facts about the problem, written in the header.
    pub meta: Vec<(String, String)>,
}

#[derive(Clone, Debug)]
pub enum ExperimentOutput {
    Trials(TrialTable),
    Checks(Vec<CheckReport>),
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.6}")
}

impl ExperimentOutput {
    pub fn kind(&self) -> ExperimentKind {
        match self {
            ExperimentOutput::Trials(t) => t.kind,
            ExperimentOutput::Checks(_) => ExperimentKind::Invariants,
        }
    }

    /// Versioned CSV: a `#` header line followed by the table.
    pub fn to_csv(&self) -> Result<String> {
        let mut head = format!("# qconv-csv {CSV_VERSION} kind={}", self.kind().name());
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Parse(e.to_string());
        match self {
            ExperimentOutput::Trials(t) => {
                write!(head, " seed={}", t.seed).expect("string write");
                for (k, v) in &t.meta {
                    write!(head, " {k}={v}").expect("string write");
                }
                let sep = t.records.iter().any(|r| r.separation.is_some());
                let mut cols: Vec<&str> = TRIAL_COLUMNS.to_vec();
                if sep {
                    cols.extend(SEPARATION_COLUMNS);
                }
                w.write_record(&cols).map_err(csv_err)?;
                for r in &t.records {
                    let mut row = vec![
                        r.trial.to_string(),
                        r.seed.to_string(),
                        r.input.clone(),
                        r.answer.clone(),
                        (r.correct as u8).to_string(),
                        r.queries.to_string(),
                        r.rounds.to_string(),
                        format!("{:.3}", r.wall_ms),
                    ];
                    if let Some(s) = r.separation {
                        row.extend([s.n.to_string(), s.classical_queries.to_string(), fmt_f64(s.quantum_bound)]);
                    } else if sep {
                        row.extend([String::new(), String::new(), String::new()]);
                    }
                    w.write_record(&row).map_err(csv_err)?;
                }
            }
            ExperimentOutput::Checks(checks) => {
                w.write_record(["check", "cases", "worst", "tolerance", "passed", "note"]).map_err(csv_err)?;
                for c in checks {
                    w.write_record([
                        c.name.clone(),
                        c.cases.to_string(),
                        format!("{:.6e}", c.worst),
                        format!("{:.1e}", c.tolerance),
                        (c.passed as u8).to_string(),
                        c.note.clone(),
                    ])
                    .map_err(csv_err)?;
                }
            }
        }
        let body = String::from_utf8(w.into_inner().map_err(|e| Error::Parse(e.to_string()))?)
            .map_err(|e| Error::Parse(e.to_string()))?;
        Ok(format!("{head}\n{body}"))
    }

    /// Aggregate lines, each prefixed with `#`.
    pub fn summary_block(&self) -> String {
        let mut out = String::new();
        match self {
            ExperimentOutput::Trials(t) => {
                let s = Summary::of(&t.records);
                writeln!(
                    out,
                    "# summary trials={} mean={} stddev={} error_rate={} total_queries={}",
                    s.trials,
                    fmt_f64(s.mean),
                    fmt_f64(s.stddev),
                    fmt_f64(s.error_rate),
                    s.total_queries
                )
                .expect("string write");
                for g in &t.groups {
                    writeln!(
                        out,
                        "# n={} trials={} classical_average={} classical_mean={} quantum_mean={} quantum_sd={} \
                         quantum_bound={} error_rate={} space_dim={}",
                        g.n,
                        g.trials,
                        fmt_f64(g.classical_average),
                        fmt_f64(g.classical_mean),
                        fmt_f64(g.quantum_mean),
                        fmt_f64(g.quantum_sd),
                        fmt_f64(g.quantum_bound),
                        fmt_f64(g.error_rate),
                        g.space_dim
                    )
                    .expect("string write");
                }
            }
            ExperimentOutput::Checks(checks) => {
                let passed = checks.iter().filter(|c| c.passed).count();
                writeln!(out, "# summary checks={} passed={} failed={}", checks.len(), passed, checks.len() - passed)
                    .expect("string write");
            }
        }
        out
    }

    /// All checks passed, or every trial answered correctly.
    pub fn all_passed(&self) -> bool {
        match self {
            ExperimentOutput::Trials(t) => t.records.iter().all(|r| r.correct),
            ExperimentOutput::Checks(c) => c.iter().all(|c| c.passed),
        }
    }
}
