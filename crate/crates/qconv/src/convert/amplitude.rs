use rand::Rng;

use crate::error::{Error, Result};
use crate::phasesim::{QueryLedger, Stage};

pub const DEFAULT_COST_CONSTANT: f64 = 50.0;

/// Outcome model for amplitude estimation: within `delta_est` of the truth
/// with probability `1 - failure`, uniform on `[0, 1]` otherwise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmplitudeEstimateModel {
    pub delta_est: f64,
    pub failure: f64,
    pub cost_constant: f64,
}

impl AmplitudeEstimateModel {
    pub fn new(delta_est: f64, failure: f64) -> Result<Self> {
        Self::with_constant(delta_est, failure, DEFAULT_COST_CONSTANT)
    }

    pub fn with_constant(delta_est: f64, failure: f64, cost_constant: f64) -> Result<Self> {
        if !(delta_est > 0.0 && delta_est < 1.0) {
            return Err(Error::Validation(format!("delta_est must lie in (0, 1), got {delta_est}")));
        }
        if !(0.0..1.0).contains(&failure) {
            return Err(Error::Validation(format!("failure probability must lie in [0, 1), got {failure}")));
        }
        if cost_constant.is_nan() || cost_constant <= 0.0 {
            return Err(Error::Validation(format!("cost constant must be positive, got {cost_constant}")));
        }
        Ok(AmplitudeEstimateModel { delta_est, failure, cost_constant })
    }

    /// `⌈(C/δ)·ln((1/p)·log₂(1/δ))⌉`, at least one call. Saturates when
    /// `p = 0`.
    pub fn calls(&self) -> u64 {
        if self.failure == 0.0 {
            return u64::MAX;
        }
        let inner = (1.0 / self.failure) * (1.0 / self.delta_est).log2();
        let calls = (self.cost_constant / self.delta_est * inner.ln()).ceil();
        calls.max(1.0) as u64
    }
}

/// Samples an estimate of `true_p` and charges `calls × circuit_cost`.
pub fn estimate_amplitude<R: Rng + ?Sized>(
    true_p: f64,
    model: &AmplitudeEstimateModel,
    circuit_cost: u64,
    rng: &mut R,
    ledger: &mut QueryLedger,
    round: usize,
) -> f64 {
    ledger.charge(round, Stage::Probe, model.calls().saturating_mul(circuit_cost));
    let p = true_p.clamp(0.0, 1.0);
    if rng.gen::<f64>() < model.failure {
        return rng.gen::<f64>();
    }
    let lo = (p - model.delta_est).max(0.0);
    let hi = (p + model.delta_est).min(1.0);
    if hi > lo {
        rng.gen_range(lo..=hi)
    } else {
        p
    }
}
