//! Dense reference simulation of the Phase Checking circuit on the full
//! system-plus-ancilla space. Only usable for tiny instances; the spectral
//! formulas in the parent module are tested against it.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::{c64, CMatrix, CVector, C64};

/// Largest total dimension the reference circuit will build.
pub const MAX_REFERENCE_DIM: usize = 512;

pub struct ReferenceCircuit {
    dim_a: usize,
    anc: usize,
    circuit: CMatrix,
}

impl ReferenceCircuit {
    /// Builds `D(U) = (I ⊗ QFT†^{⊗m}) · ΣU^{Σ b_c} ⊗ |b><b| · (I ⊗ H^{⊗tm})`.
    pub fn new(u: &CMatrix, t: u32, m: u32) -> Result<Self> {
        let dim_a = u.nrows();
        let bits = (t * m) as usize;
        if bits >= 20 || dim_a << bits > MAX_REFERENCE_DIM {
            return Err(Error::Budget(format!("reference circuit of dimension {dim_a}·2^{bits}")));
        }
        let anc = 1usize << bits;
        let reg = 1usize << t;
        let total = dim_a * anc;

        // Controlled powers: block diagonal over ancilla basis states.
        let mut powers = vec![CMatrix::identity(dim_a, dim_a)];
        for k in 1..=(m as usize) * (reg - 1) {
            powers.push(u * &powers[k - 1]);
        }
        let digit = |b: usize, c: usize| (b >> (t as usize * c)) & (reg - 1);
        let mut cu = CMatrix::zeros(total, total);
        for b in 0..anc {
            let power: usize = (0..m as usize).map(|c| digit(b, c)).sum();
            let p = &powers[power];
            for r in 0..dim_a {
                for s in 0..dim_a {
                    cu[(r * anc + b, s * anc + b)] = p[(r, s)];
                }
            }
        }

        let h_scale = 1.0 / (anc as f64).sqrt();
        let mut had = CMatrix::zeros(total, total);
        let mut qft = CMatrix::zeros(total, total);
        for a in 0..dim_a {
            for i in 0..anc {
                for j in 0..anc {
                    let sign = if (i & j).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                    had[(a * anc + i, a * anc + j)] = c64(sign * h_scale, 0.0);
                    let mut amp = c64(1.0, 0.0);
                    for c in 0..m as usize {
                        let (y, x) = (digit(i, c), digit(j, c));
                        let ang = -2.0 * PI * (x * y) as f64 / reg as f64;
                        amp *= C64::from_polar(1.0 / (reg as f64).sqrt(), ang);
                    }
                    qft[(a * anc + i, a * anc + j)] = amp;
                }
            }
        }
        Ok(ReferenceCircuit { dim_a, anc, circuit: qft * cu * had })
    }

    fn embed(&self, psi: &CVector) -> CVector {
        let mut full = CVector::zeros(self.dim_a * self.anc);
        for a in 0..self.dim_a {
            full[a * self.anc] = psi[a];
        }
        full
    }

    /// Probability that every ancilla register reads zero.
    pub fn check_probability(&self, psi: &CVector) -> f64 {
        let out = &self.circuit * self.embed(psi);
        (0..self.dim_a).map(|a| out[a * self.anc].norm_sqr()).sum()
    }

    /// `D† (I ⊗ (2|0><0| - I)) D (ψ ⊗ 0)` on the full space.
    pub fn reflect(&self, psi: &CVector) -> CVector {
        let mut mid = &self.circuit * self.embed(psi);
        for (i, z) in mid.iter_mut().enumerate() {
            if i % self.anc != 0 {
                *z = -*z;
            }
        }
        self.circuit.adjoint() * mid
    }

    pub fn reflection_overlap(&self, psi: &CVector, target: &CVector) -> C64 {
        self.embed(target).dotc(&self.reflect(psi))
    }

    /// Probability of each system basis state after the reflection.
    pub fn basis_distribution(&self, psi: &CVector) -> Vec<f64> {
        let out = self.reflect(psi);
        (0..self.dim_a)
            .map(|a| (0..self.anc).map(|b| out[a * self.anc + b].norm_sqr()).sum())
            .collect()
    }

    /// Outcome probabilities for system-register projectors after the reflection.
    pub fn measurement_distribution(&self, psi: &CVector, projectors: &[CMatrix]) -> Vec<f64> {
        let out = self.reflect(psi);
        projectors
            .iter()
            .map(|p| {
                let mut acc = 0.0;
                for b in 0..self.anc {
                    let slice = CVector::from_fn(self.dim_a, |a, _| out[a * self.anc + b]);
                    acc += slice.dotc(&(p * &slice)).re;
                }
                acc
            })
            .collect()
    }
}
