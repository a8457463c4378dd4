//! Parallel phase estimation simulated in the eigenbasis of `U`.
//!
//! Phase Checking runs `m` independent `t`-bit phase estimations and accepts
//! on the all-zero ancilla outcome. On an eigenvector with phase `θ` one copy
//! returns zero with amplitude `a(θ) = 2^{-t} Σ_j e^{ijθ}`, so every quantity
//! needed here has a closed form in the eigen-coordinates of the input state
//! and the ancilla register is never materialized.

pub mod circuit;
mod ledger;

pub use ledger::{QueryLedger, Stage};

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::{c64, max_abs, unitary_eigensystem, CMatrix, CVector, EigenSystem, C64};

/// Largest supported number of phase bits.
pub const MAX_PHASE_BITS: u32 = 60;

/// Tolerance on `‖ψ‖ = 1`.
pub const NORM_TOL: f64 = 1e-8;

/// Precision `theta` and accuracy `eps` of a Phase Checking circuit, with
/// the derived number of phase bits `t` and parallel copies `m`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseCheckSpec {
    theta: f64,
    eps: f64,
    t: u32,
    m: u32,
}

impl PhaseCheckSpec {
    /// `t = ceil(log2(2π/θ))`, `m = ceil(log2(1/ε)) + 1`.
    pub fn new(theta: f64, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::Validation(format!("accuracy must lie in (0,1), got {eps}")));
        }
        let m = (1.0 / eps).log2().ceil().max(0.0) as u32 + 1;
        Self::with_copies(theta, eps, m)
    }

    /// As [`PhaseCheckSpec::new`] with an explicit copy count.
    pub fn with_copies(theta: f64, eps: f64, m: u32) -> Result<Self> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::Validation(format!("precision must be positive, got {theta}")));
        }
        if m == 0 {
            return Err(Error::Validation("at least one copy is required".into()));
        }
        let raw = (2.0 * PI / theta).log2().ceil();
        let mut t = if raw < 1.0 { 1 } else { raw as u32 };
        // Guard against log2 rounding leaving 2π/2^t just above θ.
        while 2.0 * PI / (2f64).powi(t as i32) > theta {
            t += 1;
        }
        if t > MAX_PHASE_BITS {
            return Err(Error::Budget(format!("precision {theta:.3e} needs {t} phase bits")));
        }
        Ok(PhaseCheckSpec { theta, eps, t, m })
    }

    /// Spec with explicit bit and copy counts; `theta = 2π/2^t`.
    pub fn from_bits(t: u32, m: u32) -> Result<Self> {
        if t == 0 || m == 0 || t > MAX_PHASE_BITS {
            return Err(Error::Validation(format!("invalid bit counts t={t}, m={m}")));
        }
        let theta = 2.0 * PI / (2f64).powi(t as i32);
        Ok(PhaseCheckSpec { theta, eps: (0.5f64).powi(m as i32 - 1).min(0.5), t, m })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
    pub fn eps(&self) -> f64 {
        self.eps
    }
    pub fn t(&self) -> u32 {
        self.t
    }
    pub fn m(&self) -> u32 {
        self.m
    }

    /// Oracle queries of one Phase Checking circuit.
    pub fn cost(&self) -> u64 {
        phase_check_cost(self)
    }

    /// Oracle queries of one Phase Reflection (`D` followed by `D†`).
    pub fn reflection_cost(&self) -> u64 {
        2 * phase_check_cost(self)
    }
}

/// `2 m (2^t - 1)`: each copy applies `U^{2^l}` for `l < t`, and each
/// application of `U` makes two oracle calls.
pub fn phase_check_cost(spec: &PhaseCheckSpec) -> u64 {
    2 * spec.m as u64 * ((1u64 << spec.t) - 1)
}

/// Single-copy amplitude of the zero outcome, `2^{-t} Σ_{j<2^t} e^{ijθ}`.
pub fn kernel_amplitude(theta: f64, t: u32) -> C64 {
    let big = (2f64).powi(t as i32);
    let half = 0.5 * theta;
    let s = half.sin();
    let phase = C64::from_polar(1.0, (big - 1.0) * half);
    if s.abs() < 1e-300 {
        // θ is a multiple of 2π.
        return phase;
    }
    let mag = (big * half).sin() / (big * s);
    phase * mag
}

/// `ψ` expressed in the eigenbasis of `U`.
#[derive(Clone, Debug)]
pub struct SpectralState<'a> {
    eig: &'a EigenSystem,
    psi: CVector,
    coeffs: CVector,
}

impl<'a> SpectralState<'a> {
    pub fn new(eig: &'a EigenSystem, psi: &CVector) -> Result<Self> {
        if psi.len() != eig.dim() {
            return Err(Error::Dimension { expected: eig.dim(), found: psi.len() });
        }
        let norm = psi.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Unnormalized(norm));
        }
        Ok(SpectralState { eig, psi: psi.clone(), coeffs: eig.coefficients(psi) })
    }

    pub fn eigensystem(&self) -> &EigenSystem {
        self.eig
    }

    pub fn coefficients(&self) -> &CVector {
        &self.coeffs
    }

    /// `a(θ_k)^m` for every eigenvector.
    fn zero_amplitudes(&self, spec: &PhaseCheckSpec) -> Vec<C64> {
        self.eig.phases().iter().map(|&th| kernel_amplitude(th, spec.t).powu(spec.m)).collect()
    }

    /// Probability of the all-zero ancilla outcome: `Σ_k |c_k|² |a(θ_k)|^{2m}`.
    pub fn check_probability(&self, spec: &PhaseCheckSpec) -> f64 {
        let amps = self.zero_amplitudes(spec);
        self.coeffs.iter().zip(&amps).map(|(c, b)| c.norm_sqr() * b.norm_sqr()).sum()
    }

    /// Overlaps `<target, 0_B | R(U)(ψ ⊗ 0_B)>` and the per-eigenvector
    /// coefficients `c_k (2|a_k|^{2m} - 1)` of the zero ancilla block.
    pub fn reflection_overlaps(&self, targets: &[CVector], spec: &PhaseCheckSpec) -> Result<ReflectionOverlaps> {
        let amps = self.zero_amplitudes(spec);
        let zero_block: Vec<C64> = self
            .coeffs
            .iter()
            .zip(&amps)
            .map(|(c, b)| c * (2.0 * b.norm_sqr() - 1.0))
            .collect();
        let mut overlaps = Vec::with_capacity(targets.len());
        for target in targets {
            if target.len() != self.eig.dim() {
                return Err(Error::Dimension { expected: self.eig.dim(), found: target.len() });
            }
            let proj = self.eig.coefficients(target);
            overlaps.push(proj.iter().zip(&zero_block).map(|(p, z)| p.conj() * z).sum());
        }
        Ok(ReflectionOverlaps { overlaps, zero_block })
    }

    /// `⟨χ_k|χ_j⟩` for the ancilla states `χ_k = 2 a_k^m d_k - |0>` left
    /// next to eigenvector `k` by the reflection.
    fn ancilla_gram(&self, spec: &PhaseCheckSpec, keep: &[usize], amps: &[C64]) -> CMatrix {
        let phases = self.eig.phases();
        let k = keep.len();
        CMatrix::from_fn(k, k, |r, s| {
            let (a, b) = (keep[r], keep[s]);
            let g = kernel_amplitude(phases[a] - phases[b], spec.t).powu(spec.m);
            amps[a].conj() * amps[b] * g * 4.0 - c64(2.0 * amps[a].norm_sqr() + 2.0 * amps[b].norm_sqr() - 1.0, 0.0)
        })
    }

    fn support(&self) -> Vec<usize> {
        (0..self.eig.dim()).filter(|&k| self.coeffs[k].norm_sqr() > 1e-30).collect()
    }

    /// Outcome probabilities of measuring the system register with the given
    /// projectors after the reflection.
    pub fn measurement_distribution(&self, projectors: &[CMatrix], spec: &PhaseCheckSpec) -> Result<Vec<f64>> {
        let dim = self.eig.dim();
        let mut total = CMatrix::zeros(dim, dim);
        for p in projectors {
            if p.shape() != (dim, dim) {
                return Err(Error::Dimension { expected: dim, found: p.nrows() });
            }
            total += p;
        }
        if max_abs(&(total - CMatrix::identity(dim, dim))) > 1e-8 {
            return Err(Error::Validation("projectors do not resolve the identity".into()));
        }
        let keep = self.support();
        let amps = self.zero_amplitudes(spec);
        let gram = self.ancilla_gram(spec, &keep, &amps);
        let mut cv = CMatrix::zeros(dim, keep.len());
        for (j, &k) in keep.iter().enumerate() {
            cv.set_column(j, &(self.eig.vectors().column(k) * self.coeffs[k]));
        }
        Ok(projectors
            .iter()
            .map(|p| {
                let y = cv.adjoint() * p * &cv;
                y.iter().zip(gram.iter()).map(|(a, b)| a * b).sum::<C64>().re
            })
            .collect())
    }

    /// Probability of each standard basis state of the system register
    /// after the reflection.
    pub fn basis_distribution(&self, spec: &PhaseCheckSpec) -> Vec<f64> {
        let dim = self.eig.dim();
        let keep = self.support();
        let amps = self.zero_amplitudes(spec);
        let phases = self.eig.phases();
        let k = keep.len();
        let gram = CMatrix::from_fn(k, k, |r, s| kernel_amplitude(phases[keep[r]] - phases[keep[s]], spec.t).powu(spec.m));
        let vecs = self.eig.vectors();
        let mut y = CMatrix::zeros(dim, k);
        let mut s1 = CVector::zeros(dim);
        for (j, &idx) in keep.iter().enumerate() {
            let z = self.coeffs[idx];
            let b = amps[idx];
            for e in 0..dim {
                let ze = vecs[(e, idx)] * z;
                y[(e, j)] = ze * b;
                s1[e] += ze * b.norm_sqr();
            }
        }
        let yg = &y * gram.transpose();
        (0..dim)
            .map(|e| {
                let quad: C64 = (0..k).map(|j| y[(e, j)].conj() * yg[(e, j)]).sum();
                let s0 = self.psi[e];
                (4.0 * quad.re - 4.0 * (s1[e].conj() * s0).re + s0.norm_sqr()).max(0.0)
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct ReflectionOverlaps {
    pub overlaps: Vec<C64>,
    pub zero_block: Vec<C64>,
}

/// Result of one sampled Phase Checking run.
#[derive(Clone, Copy, Debug)]
pub struct CheckOutcome {
    pub p_zero: f64,
    pub sampled: bool,
    pub queries_charged: u64,
}

pub fn check_probability(u: &CMatrix, psi: &CVector, spec: &PhaseCheckSpec) -> Result<f64> {
    let eig = unitary_eigensystem(u)?;
    Ok(SpectralState::new(&eig, psi)?.check_probability(spec))
}

/// Samples the Phase Checking outcome and charges its cost to `ledger`.
pub fn sample_phase_check<R: Rng + ?Sized>(
    state: &SpectralState,
    spec: &PhaseCheckSpec,
    rng: &mut R,
    ledger: &mut QueryLedger,
    round: usize,
    stage: Stage,
) -> CheckOutcome {
    let p_zero = state.check_probability(spec);
    sample_with_probability(p_zero, spec, rng, ledger, round, stage)
}

/// Samples a Phase Checking outcome whose acceptance probability is known.
pub fn sample_with_probability<R: Rng + ?Sized>(
    p_zero: f64,
    spec: &PhaseCheckSpec,
    rng: &mut R,
    ledger: &mut QueryLedger,
    round: usize,
    stage: Stage,
) -> CheckOutcome {
    let queries = spec.cost();
    ledger.charge(round, stage, queries);
    let sampled = rng.gen::<f64>() < p_zero;
    CheckOutcome { p_zero, sampled, queries_charged: queries }
}

pub fn reflection_overlaps(
    u: &CMatrix,
    psi: &CVector,
    targets: &[CVector],
    spec: &PhaseCheckSpec,
) -> Result<ReflectionOverlaps> {
    let eig = unitary_eigensystem(u)?;
    SpectralState::new(&eig, psi)?.reflection_overlaps(targets, spec)
}

pub fn measurement_distribution(
    u: &CMatrix,
    psi: &CVector,
    spec: &PhaseCheckSpec,
    projectors: &[CMatrix],
) -> Result<Vec<f64>> {
    let eig = unitary_eigensystem(u)?;
    SpectralState::new(&eig, psi)?.measurement_distribution(projectors, spec)
}
