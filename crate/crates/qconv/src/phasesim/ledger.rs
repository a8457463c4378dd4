use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

/// What a block of oracle queries was spent on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Stage {
    /// Phase checks testing `f(x) = 1` (Algorithm 1).
    OneTest,
    /// Phase checks on the complement testing `f(x) = 0` (Algorithm 1).
    ZeroTest,
    /// Amplitude estimation while probing for `α`.
    Probe,
    /// Phase reflection producing the converted state.
    Reflect,
    /// Classical verification of a measured guess.
    Verify,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::OneTest => "one-test",
            Stage::ZeroTest => "zero-test",
            Stage::Probe => "probe",
            Stage::Reflect => "reflect",
            Stage::Verify => "verify",
        };
        f.write_str(s)
    }
}

/// Exact oracle-query counter with a per-round, per-stage breakdown.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct QueryLedger {
    total: u64,
    breakdown: BTreeMap<(usize, Stage), u64>,
}

impl QueryLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn charge(&mut self, round: usize, stage: Stage, queries: u64) {
        self.total = self.total.checked_add(queries).expect("query count overflow");
        *self.breakdown.entry((round, stage)).or_insert(0) += queries;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn breakdown(&self) -> &BTreeMap<(usize, Stage), u64> {
        &self.breakdown
    }

    pub fn stage_total(&self, stage: Stage) -> u64 {
        self.breakdown.iter().filter(|((_, s), _)| *s == stage).map(|(_, q)| q).sum()
    }

    pub fn merge(&mut self, other: &QueryLedger) {
        for (&(round, stage), &q) in &other.breakdown {
            self.charge(round, stage, q);
        }
    }
}
