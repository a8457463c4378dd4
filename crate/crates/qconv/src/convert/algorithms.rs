use std::sync::OnceLock;

use rand::Rng;
use serde::Serialize;

use super::amplitude::{estimate_amplitude, AmplitudeEstimateModel, DEFAULT_COST_CONSTANT};
use super::cvs::ConvertingVectorSet;
use super::space::ConversionSpace;
use crate::error::{Error, Result};
use crate::numerics::unitary_eigensystem;
use crate::phasesim::{PhaseCheckSpec, QueryLedger, SpectralState, Stage};

/// Which member of the pair `{P, P†}` a step runs on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Side {
    Primal,
    Dual,
}

/// `1` in place of a zero maximum, so schedules stay finite.
pub fn effective_max(w: f64) -> f64 {
    if w > 0.0 {
        w
    } else {
        1.0
    }
}

/// Phase checking parameters for `U(P', x, α, ε̂)`: precision
/// `ε̂^{3/2}/√(α W₋(P'))` and accuracy `ε̂²`.
pub fn conversion_spec(eps_hat: f64, alpha: f64, w_minus: f64) -> Result<PhaseCheckSpec> {
    let theta = eps_hat.powf(1.5) / (alpha * effective_max(w_minus)).sqrt();
    PhaseCheckSpec::new(theta, eps_hat * eps_hat)
}

/// A converting vector set together with its complement, compressed.
#[derive(Debug)]
pub struct ConversionPair {
    primal: ConversionSpace,
    dual: ConversionSpace,
    w_plus: f64,
    w_minus: f64,
}

impl ConversionPair {
    pub fn new(c: &ConvertingVectorSet, cdag: &ConvertingVectorSet) -> Result<Self> {
        if c.domain() != cdag.domain() || c.n() != cdag.n() || c.q() != cdag.q() {
            return Err(Error::Validation("set and complement have different domains".into()));
        }
        for x in 0..c.len() {
            if (c.rho(x) - cdag.rho(x)).norm() > 1e-9 || (c.sigma(x) - cdag.sigma(x)).norm() > 1e-9 {
                return Err(Error::Validation("set and complement convert different states".into()));
            }
        }
        let (w_plus, w_minus) = c.max_witnesses();
        Ok(ConversionPair { primal: ConversionSpace::new(c)?, dual: ConversionSpace::new(cdag)?, w_plus, w_minus })
    }

    /// Pairs `c` with `complement_cvs(c)`.
    pub fn from_set(c: &ConvertingVectorSet) -> Result<Self> {
        Self::new(c, &c.complement_cvs()?)
    }

    pub fn space(&self, side: Side) -> &ConversionSpace {
        match side {
            Side::Primal => &self.primal,
            Side::Dual => &self.dual,
        }
    }

    /// `(W₊, W₋)` of the primal set.
    pub fn max_witnesses(&self) -> (f64, f64) {
        (self.w_plus, self.w_minus)
    }

    /// `W₋` of the given side; the dual's equals the primal `W₊`.
    pub fn w_minus(&self, side: Side) -> f64 {
        match side {
            Side::Primal => self.w_minus,
            Side::Dual => self.w_plus,
        }
    }

    /// `T = ⌈log₂(W₊ W₋)⌉`, at least 0.
    pub fn rounds(&self) -> usize {
        let t = (effective_max(self.w_plus) * effective_max(self.w_minus)).log2().ceil();
        t.max(0.0) as usize
    }

    pub fn len(&self) -> usize {
        self.primal.cvs().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn position(&self, x: &[u8]) -> Result<usize> {
        self.primal.position(x)
    }
}

/// One `(i, P')` iteration of the loop.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Step {
    pub round: usize,
    pub side: Side,
    pub alpha: f64,
    #[serde(skip)]
    pub spec: PhaseCheckSpec,
}

fn schedule(pair: &ConversionPair, eps_hat: f64) -> Result<Vec<Step>> {
    let mut steps = Vec::new();
    for round in 0..=pair.rounds() {
        for side in [Side::Primal, Side::Dual] {
            let w = effective_max(pair.w_minus(side));
            let alpha = 2f64.powi(round as i32) / w;
            steps.push(Step { round, side, alpha, spec: conversion_spec(eps_hat, alpha, w)? });
        }
    }
    Ok(steps)
}

/// Exact quantities for one input at one step of the probing loop.
#[derive(Clone, Copy, Debug)]
pub struct ProbeData {
    /// Acceptance probability of phase checking on `|0>|ρ_x>`.
    pub p_zero: f64,
    /// `‖R(U)(|0>|ρ_x>|0>) - |1>|σ_x>|0>‖`.
    pub error: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ProbeRecord {
    pub round: usize,
    pub side: Side,
    pub alpha: f64,
    pub exact: f64,
    pub estimate: f64,
    pub queries: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConversionOutcome {
    pub error: f64,
    /// The probing loop ran out without meeting the break condition.
    pub exhausted: bool,
    pub round: usize,
    pub side: Side,
    pub alpha: f64,
    pub ledger: QueryLedger,
    pub transcript: Vec<ProbeRecord>,
}

/// Probe-then-convert state conversion with per-input caches.
#[derive(Debug)]
pub struct StateConversion {
    pair: ConversionPair,
    epsilon: f64,
    delta: f64,
    eps_hat: f64,
    cost_constant: f64,
    steps: Vec<Step>,
    cache: Vec<Vec<OnceLock<ProbeData>>>,
}

impl StateConversion {
    pub fn new(pair: ConversionPair, epsilon: f64, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta <= 1.0 / 3.0) {
            return Err(Error::Validation(format!("delta must lie in (0, 1/3], got {delta}")));
        }
        if !(epsilon > 0.0 && epsilon < 6.0) {
            return Err(Error::Validation(format!("epsilon must lie in (0, 6), got {epsilon}")));
        }
        let eps_hat = epsilon * epsilon / 36.0;
        let steps = schedule(&pair, eps_hat)?;
        let cache = (0..pair.len()).map(|_| (0..steps.len()).map(|_| OnceLock::new()).collect()).collect();
        Ok(StateConversion { pair, epsilon, delta, eps_hat, cost_constant: DEFAULT_COST_CONSTANT, steps, cache })
    }

    pub fn with_cost_constant(mut self, c: f64) -> Self {
        self.cost_constant = c;
        self
    }

    pub fn pair(&self) -> &ConversionPair {
        &self.pair
    }
    pub fn eps_hat(&self) -> f64 {
        self.eps_hat
    }
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    /// Exact acceptance probability and conversion error at step `k`.
    pub fn probe_data(&self, x: usize, k: usize) -> Result<ProbeData> {
        if let Some(d) = self.cache[x][k].get() {
            return Ok(*d);
        }
        let step = self.steps[k];
        let space = self.pair.space(step.side);
        let u = space.unitary(x, step.alpha, self.eps_hat)?;
        let eig = unitary_eigensystem(&u)?;
        let state = SpectralState::new(&eig, &space.initial_state(x))?;
        let p_zero = state.check_probability(&step.spec);
        let overlap = state.reflection_overlaps(&[space.target_state(x)], &step.spec)?.overlaps[0];
        let error = (2.0 - 2.0 * overlap.re).max(0.0).sqrt();
        let data = ProbeData { p_zero, error };
        Ok(*self.cache[x][k].get_or_init(|| data))
    }

    /// `â - 1/2 > -(11/4) ε̂`.
    pub fn breaks(&self, estimate: f64) -> bool {
        estimate - 0.5 > -2.75 * self.eps_hat
    }

    pub fn run<R: Rng + ?Sized>(&self, x: &[u8], rng: &mut R) -> Result<ConversionOutcome> {
        let xi = self.pair.position(x)?;
        let t = self.pair.rounds() as i32;
        let mut ledger = QueryLedger::new();
        let mut transcript = Vec::new();
        let mut chosen = None;
        'probe: for (k, step) in self.steps.iter().enumerate() {
            let delta_i = self.delta * 2f64.powi(step.round as i32 - t - 1);
            let model = AmplitudeEstimateModel::with_constant(self.eps_hat / 4.0, delta_i, self.cost_constant)?;
            let data = self.probe_data(xi, k)?;
            let before = ledger.total();
            let estimate = estimate_amplitude(data.p_zero, &model, step.spec.cost(), rng, &mut ledger, step.round);
            transcript.push(ProbeRecord {
                round: step.round,
                side: step.side,
                alpha: step.alpha,
                exact: data.p_zero,
                estimate,
                queries: ledger.total() - before,
            });
            if self.breaks(estimate) {
                chosen = Some(k);
                break 'probe;
            }
        }
        let exhausted = chosen.is_none();
        let k = chosen.unwrap_or(self.steps.len() - 1);
        let step = self.steps[k];
        ledger.charge(step.round, Stage::Reflect, step.spec.reflection_cost());
        let data = self.probe_data(xi, k)?;
        Ok(ConversionOutcome {
            error: data.error,
            exhausted,
            round: step.round,
            side: step.side,
            alpha: step.alpha,
            ledger,
            transcript,
        })
    }
}

/// One-shot Algorithm 2 run; builds all caches for a single call.
pub fn run_state_conversion<R: Rng + ?Sized>(
    c: &ConvertingVectorSet,
    cdag: &ConvertingVectorSet,
    x: &[u8],
    epsilon: f64,
    delta: f64,
    rng: &mut R,
) -> Result<ConversionOutcome> {
    StateConversion::new(ConversionPair::new(c, cdag)?, epsilon, delta)?.run(x, rng)
}

/// Classical check of a candidate output.
pub trait Verifier: Sync {
    /// Oracle queries spent per check.
    fn query_charge(&self) -> u64 {
        2
    }
    fn check(&self, x: &[u8], guess: usize) -> bool;
}

/// Maps state-register basis indices to output labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Readout {
    labels: Vec<Option<usize>>,
}

impl Readout {
    pub fn new(labels: Vec<Option<usize>>) -> Self {
        Readout { labels }
    }

    /// State `|s>` reads as label `s`.
    pub fn identity(dim: usize) -> Self {
        Readout { labels: (0..dim).map(Some).collect() }
    }

    pub fn label(&self, state: usize) -> Option<usize> {
        self.labels.get(state).copied().flatten()
    }

    pub fn num_labels(&self) -> usize {
        self.labels.iter().flatten().map(|l| l + 1).max().unwrap_or(0)
    }
}

/// Per-step exact guess distribution for one input.
#[derive(Clone, Debug, Serialize)]
pub struct StepProfile {
    pub round: usize,
    pub side: Side,
    pub alpha: f64,
    /// Probability that the measurement yields any label.
    pub p_guess: f64,
    /// Probability that the measured label passes verification.
    pub p_pass: f64,
    pub reflect_cost: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifiedOutcome {
    /// `None` when every step failed verification.
    pub answer: Option<usize>,
    pub round: usize,
    pub steps: usize,
    pub guesses: usize,
    pub ledger: QueryLedger,
}

/// Reflect, measure, verify: evaluation without probing.
#[derive(Debug)]
pub struct VerifiedEvaluation {
    pair: ConversionPair,
    readout: Readout,
    delta: f64,
    eps_hat: f64,
    steps: Vec<Step>,
    true_labels: Vec<usize>,
    cache: Vec<Vec<OnceLock<Vec<f64>>>>,
}

impl VerifiedEvaluation {
    pub fn new(pair: ConversionPair, readout: Readout, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < std::f64::consts::FRAC_1_SQRT_2) {
            return Err(Error::Validation(format!("delta must lie in (0, 2^-1/2), got {delta}")));
        }
        let cvs = pair.space(Side::Primal).cvs();
        let states = cvs
            .basis_labels()
            .ok_or_else(|| Error::Validation("target states must be standard basis vectors".into()))?;
        let true_labels = states
            .iter()
            .map(|&s| readout.label(s).ok_or_else(|| Error::Validation(format!("target state {s} has no label"))))
            .collect::<Result<Vec<_>>>()?;
        let eps_hat = delta / 36.0;
        let steps = schedule(&pair, eps_hat)?;
        let cache = (0..pair.len()).map(|_| (0..steps.len()).map(|_| OnceLock::new()).collect()).collect();
        Ok(VerifiedEvaluation { pair, readout, delta, eps_hat, steps, true_labels, cache })
    }

    pub fn pair(&self) -> &ConversionPair {
        &self.pair
    }
    pub fn eps_hat(&self) -> f64 {
        self.eps_hat
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn steps(&self) -> &[Step] {
        &self.steps
    }
    pub fn true_label(&self, x: &[u8]) -> Result<usize> {
        Ok(self.true_labels[self.pair.position(x)?])
    }

    /// Probability of each label after the reflection at step `k`.
    pub fn label_distribution(&self, x: usize, k: usize) -> Result<Vec<f64>> {
        if let Some(d) = self.cache[x][k].get() {
            return Ok(d.clone());
        }
        let step = self.steps[k];
        let space = self.pair.space(step.side);
        let u = space.unitary(x, step.alpha, self.eps_hat)?;
        let eig = unitary_eigensystem(&u)?;
        let state = SpectralState::new(&eig, &space.initial_state(x))?;
        let basis = state.basis_distribution(&step.spec);
        let mut labels = vec![0.0; self.readout.num_labels()];
        for (i, p) in basis.iter().enumerate() {
            if let Some(l) = space.state_index(i).and_then(|s| self.readout.label(s)) {
                labels[l] += p;
            }
        }
        Ok(self.cache[x][k].get_or_init(|| labels).clone())
    }

    fn check_consistent(&self, x: &[u8], verifier: &dyn Verifier) -> Result<usize> {
        let xi = self.pair.position(x)?;
        if !verifier.check(x, self.true_labels[xi]) {
            return Err(Error::Validation(format!(
                "verifier rejects the true output {} on {}",
                self.true_labels[xi],
                crate::spanprog::format_input(x)
            )));
        }
        Ok(xi)
    }

    pub fn run<R: Rng + ?Sized>(&self, x: &[u8], verifier: &dyn Verifier, rng: &mut R) -> Result<VerifiedOutcome> {
        let xi = self.check_consistent(x, verifier)?;
        let mut ledger = QueryLedger::new();
        let mut guesses = 0;
        for (k, step) in self.steps.iter().enumerate() {
            ledger.charge(step.round, Stage::Reflect, step.spec.reflection_cost());
            let dist = self.label_distribution(xi, k)?;
            let mut r: f64 = rng.gen();
            let mut guess = None;
            for (l, p) in dist.iter().enumerate() {
                if r < *p {
                    guess = Some(l);
                    break;
                }
                r -= p;
            }
            if let Some(g) = guess {
                guesses += 1;
                ledger.charge(step.round, Stage::Verify, verifier.query_charge());
                if verifier.check(x, g) {
                    return Ok(VerifiedOutcome { answer: Some(g), round: step.round, steps: k + 1, guesses, ledger });
                }
            }
        }
        let last = self.steps.last().map_or(0, |s| s.round);
        Ok(VerifiedOutcome { answer: None, round: last, steps: self.steps.len(), guesses, ledger })
    }

    /// Exact per-step guess and pass probabilities.
    pub fn profile(&self, x: &[u8], verifier: &dyn Verifier) -> Result<Vec<StepProfile>> {
        let xi = self.check_consistent(x, verifier)?;
        (0..self.steps.len())
            .map(|k| {
                let step = self.steps[k];
                let dist = self.label_distribution(xi, k)?;
                let p_pass = dist.iter().enumerate().filter(|(l, _)| verifier.check(x, *l)).map(|(_, p)| p).sum();
                Ok(StepProfile {
                    round: step.round,
                    side: step.side,
                    alpha: step.alpha,
                    p_guess: dist.iter().sum(),
                    p_pass,
                    reflect_cost: step.spec.reflection_cost(),
                })
            })
            .collect()
    }
}

/// Expected query count and success probability implied by a profile.
pub fn profile_expectation(profile: &[StepProfile], verify_charge: u64) -> (f64, f64) {
    let mut reach = 1.0;
    let mut expected = 0.0;
    let mut success = 0.0;
    for s in profile {
        expected += reach * (s.reflect_cost as f64 + s.p_guess * verify_charge as f64);
        success += reach * s.p_pass;
        reach *= 1.0 - s.p_pass;
    }
    (expected, success)
}

/// One-shot Algorithm 3 run with labels equal to state indices.
pub fn run_verified_evaluation<R: Rng + ?Sized>(
    c: &ConvertingVectorSet,
    cdag: &ConvertingVectorSet,
    x: &[u8],
    verifier: &dyn Verifier,
    delta: f64,
    rng: &mut R,
) -> Result<VerifiedOutcome> {
    let readout = Readout::identity(c.state_dim());
    VerifiedEvaluation::new(ConversionPair::new(c, cdag)?, readout, delta)?.run(x, verifier, rng)
}
