use crate::error::{Error, Result};
use crate::numerics::{c64, CVector};

/// Unit vectors `μ_a`, `ν_a` in `C^q` with `<μ_a|ν_b> = q/(2(q-1))` for
/// `a ≠ b` and `<μ_a|ν_a> = 0`.
#[derive(Clone, Debug)]
pub struct GadgetVectors {
    q: usize,
    mu: Vec<CVector>,
    nu: Vec<CVector>,
}

impl GadgetVectors {
    pub fn q(&self) -> usize {
        self.q
    }
    pub fn mu(&self, a: usize) -> &CVector {
        &self.mu[a]
    }
    pub fn nu(&self, a: usize) -> &CVector {
        &self.nu[a]
    }
    /// The off-diagonal overlap `q/(2(q-1))`.
    pub fn overlap(&self) -> f64 {
        self.q as f64 / (2.0 * (self.q as f64 - 1.0))
    }
}

/// Simplex construction: `f_a` are the centred standard basis vectors
/// written in a Helmert basis of the coordinates `1..q`, rescaled to unit
/// length, so `<f_a|f_b> = -1/(q-1)`.
pub fn build_gadget(q: usize) -> Result<GadgetVectors> {
    if q < 2 {
        return Err(Error::Validation(format!("gadget needs q >= 2, got {q}")));
    }
    let scale = (q as f64 / (q as f64 - 1.0)).sqrt();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut mu = Vec::with_capacity(q);
    let mut nu = Vec::with_capacity(q);
    for a in 0..q {
        let mut f = CVector::zeros(q);
        for k in 1..q {
            // Helmert row k: k ones followed by -k, normalized.
            let norm = ((k * (k + 1)) as f64).sqrt();
            let h = match a.cmp(&k) {
                std::cmp::Ordering::Less => 1.0,
                std::cmp::Ordering::Equal => -(k as f64),
                std::cmp::Ordering::Greater => 0.0,
            };
            f[k] = c64(scale * h / norm, 0.0);
        }
        let mut m = f.clone();
        m[0] = c64(1.0, 0.0);
        let mut n = -f;
        n[0] = c64(1.0, 0.0);
        mu.push(m * c64(r, 0.0));
        nu.push(n * c64(r, 0.0));
    }
    Ok(GadgetVectors { q, mu, nu })
}
