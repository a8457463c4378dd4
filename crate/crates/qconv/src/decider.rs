//! Promise-free decision with interleaved one-sided tests.

use std::sync::OnceLock;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{Binomial, DiscreteCDF};

use crate::error::{Error, Result};
use crate::numerics::{basis_vector, unitary_eigensystem};
use crate::phasesim::{sample_with_probability, PhaseCheckSpec, QueryLedger, SpectralState, Stage};
use crate::random::trial_rng;
use crate::spanprog::{algorithm_unitary, format_input, witness, ExtendedProgram, SpanProgram, WitnessKind};

/// Phase checking error used by both tests.
pub const DECISION_EPS: f64 = 2.0 / 9.0;

const DUALITY_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecisionConfig {
    pub delta: f64,
    /// Replaces `T` when set.
    pub max_round_override: Option<usize>,
}

impl DecisionConfig {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Validation(format!("delta must lie in (0, 1), got {delta}")));
        }
        Ok(DecisionConfig { delta, max_round_override: None })
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct RoundRecord {
    pub round: usize,
    pub stage: Stage,
    pub alpha: f64,
    pub samples: usize,
    pub zeros: usize,
    pub p_zero: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecisionResult {
    pub answer: bool,
    pub round_stopped: usize,
    /// The loop ran out and the answer is the default 1.
    pub exhausted: bool,
    pub ledger: QueryLedger,
    pub transcript: Vec<RoundRecord>,
}

/// Exact acceptance probability of one test on `|0̂>`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TestProbability {
    pub round: usize,
    pub stage: Stage,
    pub alpha: f64,
    pub p_zero: f64,
}

/// Stopping law computed from exact per-round acceptance probabilities.
#[derive(Clone, Debug, Serialize)]
pub struct ExactDecision {
    pub prob_one: f64,
    pub prob_zero: f64,
    pub expected_queries: f64,
    /// Probability of returning at each `(round, stage)`, in loop order.
    pub stops: Vec<(usize, Stage, f64)>,
}

#[derive(Clone, Copy, Debug)]
struct Test {
    round: usize,
    stage: Stage,
    alpha: f64,
    samples: usize,
    spec: PhaseCheckSpec,
}

/// A span program, its complement and the loop schedule.
#[derive(Debug)]
pub struct Decider<'a> {
    p: &'a SpanProgram,
    pdag: &'a SpanProgram,
    w_plus: f64,
    w_minus: f64,
    tests: Vec<Test>,
}

/// `T = ⌈log₂ √(3 W₊ W₋)⌉`.
pub fn decision_rounds(w_plus: f64, w_minus: f64) -> usize {
    (0.5 * (3.0 * w_plus * w_minus).log2()).ceil().max(0.0) as usize
}

/// `N_i = 18(⌈T + log₂(3/δ)⌉ - i + 1)`.
pub fn repetitions(t: usize, i: usize, delta: f64) -> usize {
    let top = (t as f64 + (3.0 / delta).log2()).ceil() as usize;
    18 * (top + 1).saturating_sub(i)
}

impl<'a> Decider<'a> {
    pub fn new(p: &'a SpanProgram, pdag: &'a SpanProgram, w_plus: f64, w_minus: f64, cfg: &DecisionConfig) -> Result<Self> {
        if !(w_plus > 0.0 && w_minus > 0.0 && w_plus.is_finite() && w_minus.is_finite()) {
            return Err(Error::Validation(format!("need positive finite W+, W-, got {w_plus}, {w_minus}")));
        }
        if p.n() != pdag.n() || p.q() != pdag.q() {
            return Err(Error::Validation("program and complement have different input shapes".into()));
        }
        let t = decision_rounds(w_plus, w_minus);
        let last = cfg.max_round_override.unwrap_or(t);
        let mut tests = Vec::with_capacity(2 * (last + 1));
        for i in 0..=last {
            let samples = repetitions(t, i, cfg.delta);
            for (stage, w_other) in [(Stage::OneTest, w_minus), (Stage::ZeroTest, w_plus)] {
                let alpha = 2f64.powi(i as i32) / w_other.sqrt();
                let theta = (DECISION_EPS / (alpha * alpha * w_other)).sqrt();
                let spec = PhaseCheckSpec::new(theta, DECISION_EPS)?;
                tests.push(Test { round: i, stage, alpha, samples, spec });
            }
        }
        Ok(Decider { p, pdag, w_plus, w_minus, tests })
    }

    pub fn max_witnesses(&self) -> (f64, f64) {
        (self.w_plus, self.w_minus)
    }

    /// Checks the pair on `x` and sets up lazy per-round probabilities.
    pub fn prepare(&self, x: &[u8]) -> Result<DecisionInstance<'_, 'a>> {
        let a = witness(self.p, x)?;
        let b = witness(self.pdag, x)?;
        let consistent = match (a.kind, b.kind) {
            (WitnessKind::Positive, WitnessKind::Negative) | (WitnessKind::Negative, WitnessKind::Positive) => {
                (a.size - b.size).abs() <= DUALITY_TOL * a.size.max(1.0)
            }
            _ => false,
        };
        if !consistent {
            return Err(Error::Validation(format!(
                "program and complement disagree on {} ({:?} {:.6} vs {:?} {:.6})",
                format_input(x),
                a.kind,
                a.size,
                b.kind,
                b.size
            )));
        }
        Ok(DecisionInstance {
            decider: self,
            x: x.to_vec(),
            probs: (0..self.tests.len()).map(|_| OnceLock::new()).collect(),
        })
    }
}

/// Algorithm 1 bound to one input, with per-test acceptance probabilities
/// computed on first use.
pub struct DecisionInstance<'d, 'a> {
    decider: &'d Decider<'a>,
    x: Vec<u8>,
    probs: Vec<OnceLock<f64>>,
}

impl DecisionInstance<'_, '_> {
    /// Exact acceptance probability of test `k` on `|0̂>`.
    fn p_zero(&self, k: usize) -> Result<f64> {
        if let Some(p) = self.probs[k].get() {
            return Ok(*p);
        }
        let test = &self.decider.tests[k];
        let program = match test.stage {
            Stage::OneTest => self.decider.p,
            _ => self.decider.pdag,
        };
        let ext = ExtendedProgram::new(program, test.alpha)?;
        let u = algorithm_unitary(&ext, &self.x)?;
        let eig = unitary_eigensystem(&u)?;
        let start = basis_vector(ext.dim(), ext.hat_index());
        let p = SpectralState::new(&eig, &start)?.check_probability(&test.spec);
        Ok(*self.probs[k].get_or_init(|| p))
    }

    /// Acceptance probability of every test in loop order.
    pub fn acceptance_probabilities(&self) -> Result<Vec<TestProbability>> {
        (0..self.decider.tests.len())
            .map(|k| {
                let t = &self.decider.tests[k];
                Ok(TestProbability { round: t.round, stage: t.stage, alpha: t.alpha, p_zero: self.p_zero(k)? })
            })
            .collect()
    }

    pub fn run<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<DecisionResult> {
        let mut ledger = QueryLedger::new();
        let mut transcript = Vec::new();
        for (k, test) in self.decider.tests.iter().enumerate() {
            let p = self.p_zero(k)?;
            let mut zeros = 0;
            for _ in 0..test.samples {
                zeros += sample_with_probability(p, &test.spec, rng, &mut ledger, test.round, test.stage).sampled as usize;
            }
            transcript.push(RoundRecord {
                round: test.round,
                stage: test.stage,
                alpha: test.alpha,
                samples: test.samples,
                zeros,
                p_zero: p,
            });
            if zeros >= test.samples.div_ceil(2) {
                let answer = test.stage == Stage::OneTest;
                return Ok(DecisionResult { answer, round_stopped: test.round, exhausted: false, ledger, transcript });
            }
        }
        let last = self.decider.tests.last().map_or(0, |t| t.round);
        Ok(DecisionResult { answer: true, round_stopped: last, exhausted: true, ledger, transcript })
    }

    /// Answer probabilities and expected cost without sampling.
    pub fn exact(&self) -> Result<ExactDecision> {
        let mut reach = 1.0;
        let (mut one, mut zero, mut expected) = (0.0, 0.0, 0.0);
        let mut stops = Vec::with_capacity(self.decider.tests.len());
        for (k, test) in self.decider.tests.iter().enumerate() {
            let p = self.p_zero(k)?.clamp(0.0, 1.0);
            let need = test.samples.div_ceil(2) as u64;
            let pass = if need == 0 {
                1.0
            } else {
                let bin = Binomial::new(p, test.samples as u64).map_err(|e| Error::Validation(e.to_string()))?;
                bin.sf(need - 1)
            };
            expected += reach * (test.samples as u64 * test.spec.cost()) as f64;
            let stop = reach * pass;
            match test.stage {
                Stage::OneTest => one += stop,
                _ => zero += stop,
            }
            stops.push((test.round, test.stage, stop));
            reach *= 1.0 - pass;
        }
        one += reach;
        Ok(ExactDecision { prob_one: one, prob_zero: zero, expected_queries: expected, stops })
    }
}

/// One run of Algorithm 1 on `x`.
pub fn run_decision<R: Rng + ?Sized>(
    p: &SpanProgram,
    pdag: &SpanProgram,
    w_plus: f64,
    w_minus: f64,
    x: &[u8],
    cfg: &DecisionConfig,
    rng: &mut R,
) -> Result<DecisionResult> {
    Decider::new(p, pdag, w_plus, w_minus, cfg)?.prepare(x)?.run(rng)
}

/// Mean and sample standard deviation of the query count over `trials`
/// seeded runs, with every trial's result.
#[allow(clippy::too_many_arguments)]
pub fn average_queries(
    p: &SpanProgram,
    pdag: &SpanProgram,
    w_plus: f64,
    w_minus: f64,
    x: &[u8],
    cfg: &DecisionConfig,
    trials: usize,
    seed: u64,
) -> Result<(f64, f64, Vec<DecisionResult>)> {
    if trials == 0 {
        return Err(Error::Validation("trials must be at least 1".into()));
    }
    let decider = Decider::new(p, pdag, w_plus, w_minus, cfg)?;
    let inst = decider.prepare(x)?;
    let results = (0..trials)
        .into_par_iter()
        .map(|t| inst.run(&mut trial_rng(seed, t as u64)))
        .collect::<Result<Vec<_>>>()?;
    let (mean, sd) = mean_std(results.iter().map(|r| r.ledger.total() as f64));
    Ok((mean, sd, results))
}

/// Mean and sample standard deviation (zero for a single value).
pub fn mean_std(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = values.collect();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
