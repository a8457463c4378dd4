//! Converting vector sets and the state conversion algorithms built on them.

mod algorithms;
mod amplitude;
mod cvs;
mod gadget;
mod space;

pub use algorithms::{
    conversion_spec, effective_max, profile_expectation, run_state_conversion, run_verified_evaluation,
    ConversionOutcome, ConversionPair, ProbeData, ProbeRecord, Readout, Side, StateConversion, Step,
    StepProfile, VerifiedEvaluation, VerifiedOutcome, Verifier,
};
pub use amplitude::{estimate_amplitude, AmplitudeEstimateModel, DEFAULT_COST_CONSTANT};
pub use cvs::{ConvertingVectorSet, CvsParts, SparseVector, GRAM_TOL};
pub use gadget::{build_gadget, GadgetVectors};
pub use space::ConversionSpace;

use crate::error::Result;
use crate::numerics::CMatrix;

/// `U(C, x, α, ε̂)` for the input at domain position `x`.
pub fn conversion_unitary(c: &ConvertingVectorSet, x: usize, alpha: f64, eps_hat: f64) -> Result<CMatrix> {
    ConversionSpace::new(c)?.unitary(x, alpha, eps_hat)
}
