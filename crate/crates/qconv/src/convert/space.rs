use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use super::cvs::{ConvertingVectorSet, SparseVector};
use super::gadget::{build_gadget, GadgetVectors};
use crate::error::{Error, Result};
use crate::numerics::{c64, column_space, CMatrix, CVector, SubspaceBasis};

/// The algorithm space `(C² ⊗ H_state) ⊕ (C^n ⊗ C^q ⊗ C^d)` with each
/// `C^d` factor compressed to the span of the vectors that actually occur
/// at that index.
///
/// Coordinates `b·h + s` hold `|b>|s>` of the first summand. Index `j`
/// owns `q·r_j` coordinates starting at `offset_j`, laid out as
/// `offset_j + a·r_j + k` for gadget coordinate `a` and basis vector `k`.
#[derive(Debug)]
pub struct ConversionSpace {
    cvs: ConvertingVectorSet,
    gadget: GadgetVectors,
    h: usize,
    offsets: Vec<usize>,
    ranks: Vec<usize>,
    dim: usize,
    u: Vec<Vec<CVector>>,
    v: Option<Vec<Vec<CVector>>>,
    psi_spans: Mutex<HashMap<(u64, u64), Arc<SubspaceBasis>>>,
}

impl ConversionSpace {
    /// Space spanned by the `u` vectors, which is all the algorithm needs.
    pub fn new(cvs: &ConvertingVectorSet) -> Result<Self> {
        Self::build(cvs, false)
    }

    /// Space that also contains every `v` vector, for certificate checks.
    pub fn with_certificates(cvs: &ConvertingVectorSet) -> Result<Self> {
        Self::build(cvs, true)
    }

    fn build(cvs: &ConvertingVectorSet, include_v: bool) -> Result<Self> {
        let gadget = build_gadget(cvs.q())?;
        let (n, q, h, size) = (cvs.n(), cvs.q(), cvs.state_dim(), cvs.len());
        let mut offsets = Vec::with_capacity(n);
        let mut ranks = Vec::with_capacity(n);
        let mut u = vec![Vec::with_capacity(n); size];
        let mut v = vec![Vec::with_capacity(n); size];
        let mut next = 2 * h;
        for j in 0..n {
            let mut family: Vec<&SparseVector> = (0..size).map(|x| cvs.u(x, j)).collect();
            if include_v {
                family.extend((0..size).map(|x| cvs.v(x, j)));
            }
            let coords = compress(&family);
            let rank = coords.first().map_or(0, CVector::len);
            for x in 0..size {
                u[x].push(coords[x].clone());
                if include_v {
                    v[x].push(coords[size + x].clone());
                }
            }
            offsets.push(next);
            ranks.push(rank);
            next += q * rank;
        }
        Ok(ConversionSpace {
            cvs: cvs.clone(),
            gadget,
            h,
            offsets,
            ranks,
            dim: next,
            u,
            v: include_v.then_some(v),
            psi_spans: Mutex::new(HashMap::new()),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn cvs(&self) -> &ConvertingVectorSet {
        &self.cvs
    }
    pub fn gadget(&self) -> &GadgetVectors {
        &self.gadget
    }
    /// Dimension of the state register.
    pub fn state_dim(&self) -> usize {
        self.h
    }
    /// Compressed dimension of index `j`.
    pub fn block_rank(&self, j: usize) -> usize {
        self.ranks[j]
    }

    /// State-register index of coordinate `i`, or `None` outside the
    /// `C² ⊗ H_state` summand.
    pub fn state_index(&self, i: usize) -> Option<usize> {
        (i < 2 * self.h).then(|| i % self.h)
    }

    pub fn position(&self, x: &[u8]) -> Result<usize> {
        self.cvs
            .index_of(x)
            .ok_or_else(|| Error::Validation(format!("input {} is outside the domain", crate::spanprog::format_input(x))))
    }

    fn embed_pair(&self, top: &CVector, bottom: &CVector, s_top: f64, s_bottom: f64) -> CVector {
        let mut out = CVector::zeros(self.dim);
        for s in 0..self.h {
            out[s] = top[s] * s_top;
            out[self.h + s] = bottom[s] * s_bottom;
        }
        out
    }

    /// `|0>|ρ_x>`.
    pub fn initial_state(&self, x: usize) -> CVector {
        let zero = CVector::zeros(self.h);
        self.embed_pair(self.cvs.rho(x), &zero, 1.0, 0.0)
    }

    /// `|1>|σ_x>`.
    pub fn target_state(&self, x: usize) -> CVector {
        let zero = CVector::zeros(self.h);
        self.embed_pair(&zero, self.cvs.sigma(x), 0.0, 1.0)
    }

    /// `(|0>|ρ_x> ± |1>|σ_x>)/√2`.
    pub fn t_state(&self, x: usize, plus: bool) -> CVector {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        self.embed_pair(self.cvs.rho(x), self.cvs.sigma(x), r, if plus { r } else { -r })
    }

    fn add_gadget_term(&self, out: &mut CVector, j: usize, gadget: &CVector, coords: &CVector, scale: f64) {
        let (off, r) = (self.offsets[j], self.ranks[j]);
        for a in 0..self.gadget.q() {
            for k in 0..r {
                out[off + a * r + k] += gadget[a] * coords[k] * scale;
            }
        }
    }

    /// `√(ε̂/α)|t_{y-}> - Σ_j |j>|μ_{y_j}>|u_yj>`.
    pub fn psi(&self, y: usize, alpha: f64, eps_hat: f64) -> CVector {
        let mut out = self.t_state(y, false) * c64((eps_hat / alpha).sqrt(), 0.0);
        let input = &self.cvs.domain()[y];
        for (j, &bit) in input.iter().enumerate() {
            self.add_gadget_term(&mut out, j, self.gadget.mu(bit as usize), &self.u[y][j], -1.0);
        }
        out
    }

    /// `t_{x+} + (√ε̂/(2√α))·(2(q-1)/q)·Σ_j |j>|ν_{x_j}>|v_xj>`, orthogonal to
    /// every `ψ_y`. Needs a space built with [`Self::with_certificates`].
    pub fn certificate(&self, x: usize, alpha: f64, eps_hat: f64) -> Result<CVector> {
        let v = self
            .v
            .as_ref()
            .ok_or_else(|| Error::Validation("space was built without the v family".into()))?;
        let mut out = self.t_state(x, true);
        let q = self.gadget.q() as f64;
        let scale = eps_hat.sqrt() / (2.0 * alpha.sqrt()) * (2.0 * (q - 1.0) / q);
        let input = &self.cvs.domain()[x];
        for j in 0..self.cvs.n() {
            self.add_gadget_term(&mut out, j, self.gadget.nu(input[j] as usize), &v[x][j], scale);
        }
        Ok(out)
    }

    /// Orthonormal basis of `span{ψ_y}`; `Λ` is the projector onto its
    /// complement. Cached per `(α, ε̂)`.
    pub fn psi_span(&self, alpha: f64, eps_hat: f64) -> Result<Arc<SubspaceBasis>> {
        if !(alpha > 0.0 && alpha.is_finite() && eps_hat > 0.0) {
            return Err(Error::Validation(format!("need alpha > 0 and eps_hat > 0, got {alpha}, {eps_hat}")));
        }
        let key = (alpha.to_bits(), eps_hat.to_bits());
        if let Some(b) = self.psi_spans.lock().expect("cache lock").get(&key) {
            return Ok(b.clone());
        }
        let size = self.cvs.len();
        let mut m = CMatrix::zeros(self.dim, size);
        for y in 0..size {
            m.set_column(y, &self.psi(y, alpha, eps_hat));
        }
        let basis = Arc::new(column_space(&m, 0.0));
        self.psi_spans.lock().expect("cache lock").insert(key, basis.clone());
        Ok(basis)
    }

    /// `Λ^{α,ε̂}` as a dense matrix.
    pub fn lambda(&self, alpha: f64, eps_hat: f64) -> Result<CMatrix> {
        let span = self.psi_span(alpha, eps_hat)?;
        Ok(CMatrix::identity(self.dim, self.dim) - span.projector())
    }

    /// `Π_x`: identity on the state summand and `I - |μ_{x_j}><μ_{x_j}| ⊗ I`
    /// on index `j`.
    pub fn input_projector(&self, x: usize) -> CMatrix {
        let mut p = CMatrix::identity(self.dim, self.dim);
        let input = &self.cvs.domain()[x];
        for (j, &bit) in input.iter().enumerate() {
            let mu = self.gadget.mu(bit as usize);
            let (off, r) = (self.offsets[j], self.ranks[j]);
            for a in 0..self.gadget.q() {
                for b in 0..self.gadget.q() {
                    let z = mu[a] * mu[b].conj();
                    for k in 0..r {
                        p[(off + a * r + k, off + b * r + k)] -= z;
                    }
                }
            }
        }
        p
    }

    /// `U = (2Π_x - I)(2Λ - I)`.
    pub fn unitary(&self, x: usize, alpha: f64, eps_hat: f64) -> Result<CMatrix> {
        let span = self.psi_span(alpha, eps_hat)?;
        let cols = span.columns();
        // 2Λ - I = I - 2QQ†.
        let mut u = CMatrix::identity(self.dim, self.dim) - (cols * cols.adjoint()) * c64(2.0, 0.0);
        let input = &self.cvs.domain()[x];
        let q = self.gadget.q();
        let mut buf = vec![c64(0.0, 0.0); self.dim];
        for (j, &bit) in input.iter().enumerate() {
            let mu = self.gadget.mu(bit as usize);
            let (off, r) = (self.offsets[j], self.ranks[j]);
            for k in 0..r {
                // Rows off + a·r + k are replaced by (I - 2μμ†) acting on them.
                buf.iter_mut().for_each(|z| *z = c64(0.0, 0.0));
                for b in 0..q {
                    let w = mu[b].conj();
                    let row = off + b * r + k;
                    for c in 0..self.dim {
                        buf[c] += w * u[(row, c)];
                    }
                }
                for a in 0..q {
                    let w = mu[a] * 2.0;
                    let row = off + a * r + k;
                    for c in 0..self.dim {
                        u[(row, c)] -= w * buf[c];
                    }
                }
            }
        }
        Ok(u)
    }
}

/// Coordinates of each vector in an orthonormal basis of the family's span.
fn compress(family: &[&SparseVector]) -> Vec<CVector> {
    let support: BTreeSet<usize> = family.iter().flat_map(|v| v.entries().iter().map(|e| e.0)).collect();
    let support: Vec<usize> = support.into_iter().collect();
    let local: HashMap<usize, usize> = support.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let mut m = CMatrix::zeros(support.len(), family.len());
    for (c, v) in family.iter().enumerate() {
        for &(i, z) in v.entries() {
            m[(local[&i], c)] = z;
        }
    }
    let basis = column_space(&m, 0.0);
    let coords = basis.columns().adjoint() * &m;
    (0..family.len()).map(|c| coords.column(c).into_owned()).collect()
}
