//! Span programs: storage, witness solvers, the complement construction and
//! the algorithm unitary `(2Π_x - I)(2Λ - I)`.

mod io;

pub use io::{SpanProgramFile, SubspaceSpec};

use crate::error::{Error, Result};
use crate::numerics::{
    basis_vector, c64, column_space, kernel_basis_scaled, kernel_projector, max_abs,
    min_norm_solution, operator_scale, pseudo_inverse_scaled, CMatrix, CVector, SubspaceBasis,
};

/// Residual above which a witness solve is declared infeasible.
pub const FEASIBILITY_TOL: f64 = 1e-8;

const STRUCTURE_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct SpanProgram {
    n: usize,
    q: usize,
    dim_h: usize,
    dim_v: usize,
    index_blocks: Vec<SubspaceBasis>,
    letters: Vec<Vec<SubspaceBasis>>,
    h_true: SubspaceBasis,
    h_false: SubspaceBasis,
    a: CMatrix,
    tau: CVector,
}

/// Constructor arguments; validated by [`SpanProgram::new`].
#[derive(Clone, Debug)]
pub struct SpanProgramParts {
    pub n: usize,
    pub q: usize,
    /// `H_j` for each index.
    pub index_blocks: Vec<SubspaceBasis>,
    /// `H_{j,a}` for each index and letter.
    pub letters: Vec<Vec<SubspaceBasis>>,
    pub h_true: SubspaceBasis,
    pub h_false: SubspaceBasis,
    pub a: CMatrix,
    pub tau: CVector,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WitnessKind {
    Positive,
    Negative,
    None,
}

#[derive(Clone, Debug)]
pub struct WitnessReport {
    pub kind: WitnessKind,
    /// Squared norm of the optimal witness (0 when `kind` is `None`).
    pub size: f64,
    /// `|w>` in `H` for positive witnesses, the row `ω` over `V` for negative.
    pub witness: CVector,
    pub residual: f64,
}

impl SpanProgram {
    pub fn new(parts: SpanProgramParts) -> Result<Self> {
        let SpanProgramParts { n, q, index_blocks, letters, h_true, h_false, a, tau } = parts;
        let dim_h = a.ncols();
        let dim_v = a.nrows();
        if q < 2 {
            return Err(Error::Validation(format!("alphabet size {q} < 2")));
        }
        if tau.len() != dim_v {
            return Err(Error::Dimension { expected: dim_v, found: tau.len() });
        }
        if index_blocks.len() != n || letters.len() != n {
            return Err(Error::Validation(format!(
                "expected {n} index blocks, found {} blocks and {} letter lists",
                index_blocks.len(),
                letters.len()
            )));
        }
        let mut all = Vec::with_capacity(n + 2);
        all.extend(index_blocks.iter());
        all.push(&h_true);
        all.push(&h_false);
        for b in &all {
            if b.ambient_dim() != dim_h {
                return Err(Error::Dimension { expected: dim_h, found: b.ambient_dim() });
            }
        }
        let total: usize = all.iter().map(|b| b.rank()).sum();
        if total != dim_h {
            return Err(Error::Validation(format!(
                "blocks have total dimension {total}, but H has dimension {dim_h}"
            )));
        }
        for i in 0..all.len() {
            for k in i + 1..all.len() {
                if all[i].rank() > 0 && all[k].rank() > 0 {
                    let cross = all[i].columns().adjoint() * all[k].columns();
                    if max_abs(&cross) > STRUCTURE_TOL {
                        return Err(Error::Validation(format!("blocks {i} and {k} are not orthogonal")));
                    }
                }
            }
        }
        for (j, per_letter) in letters.iter().enumerate() {
            if per_letter.len() != q {
                return Err(Error::Validation(format!(
                    "index {j} has {} letter subspaces, expected {q}",
                    per_letter.len()
                )));
            }
            let owner = &index_blocks[j];
            let mut union = SubspaceBasis::empty(dim_h);
            for (letter, sub) in per_letter.iter().enumerate() {
                if sub.ambient_dim() != dim_h {
                    return Err(Error::Dimension { expected: dim_h, found: sub.ambient_dim() });
                }
                for v in sub.vectors() {
                    if owner.distance(&v) > STRUCTURE_TOL {
                        return Err(Error::Validation(format!(
                            "H_({j},{letter}) is not contained in H_{j}"
                        )));
                    }
                }
                union = union.sum(sub)?;
            }
            if union.rank() != owner.rank() {
                return Err(Error::Validation(format!(
                    "letter subspaces of index {j} span dimension {} but H_{j} has dimension {}",
                    union.rank(),
                    owner.rank()
                )));
            }
        }
        Ok(SpanProgram { n, q, dim_h, dim_v, index_blocks, letters, h_true, h_false, a, tau })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn q(&self) -> usize {
        self.q
    }
    pub fn dim_h(&self) -> usize {
        self.dim_h
    }
    pub fn dim_v(&self) -> usize {
        self.dim_v
    }
    pub fn a(&self) -> &CMatrix {
        &self.a
    }
    pub fn tau(&self) -> &CVector {
        &self.tau
    }
    pub fn index_block(&self, j: usize) -> &SubspaceBasis {
        &self.index_blocks[j]
    }
    pub fn letter_subspace(&self, j: usize, letter: usize) -> &SubspaceBasis {
        &self.letters[j][letter]
    }
    pub fn h_true(&self) -> &SubspaceBasis {
        &self.h_true
    }
    pub fn h_false(&self) -> &SubspaceBasis {
        &self.h_false
    }

    pub fn check_input(&self, x: &[u8]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::Validation(format!("input has length {}, expected {}", x.len(), self.n)));
        }
        if let Some(&bad) = x.iter().find(|&&c| c as usize >= self.q) {
            return Err(Error::Validation(format!("letter {bad} outside alphabet of size {}", self.q)));
        }
        Ok(())
    }

    /// Orthonormal basis of `H(x) = ⊕_j H_{j,x_j} ⊕ H_true`.
    pub fn input_subspace(&self, x: &[u8]) -> Result<SubspaceBasis> {
        self.check_input(x)?;
        let rank: usize =
            x.iter().enumerate().map(|(j, &c)| self.letters[j][c as usize].rank()).sum::<usize>()
                + self.h_true.rank();
        let mut cols = CMatrix::zeros(self.dim_h, rank);
        let mut k = 0;
        let parts = x
            .iter()
            .enumerate()
            .map(|(j, &c)| &self.letters[j][c as usize])
            .chain(std::iter::once(&self.h_true));
        for b in parts {
            cols.columns_mut(k, b.rank()).copy_from(b.columns());
            k += b.rank();
        }
        // Blocks are mutually orthogonal and each is orthonormal.
        Ok(SubspaceBasis::from_orthonormal(cols))
    }
}

/// `min ‖w‖²` over `w ∈ H(x)` with `Aw = τ`.
pub fn positive_witness(p: &SpanProgram, x: &[u8]) -> Result<WitnessReport> {
    let hx = p.input_subspace(x)?;
    let (w, residual) = min_norm_solution(&p.a, &p.tau, &hx)?;
    if residual > FEASIBILITY_TOL {
        return Ok(WitnessReport { kind: WitnessKind::None, size: 0.0, witness: w, residual });
    }
    Ok(WitnessReport { kind: WitnessKind::Positive, size: w.norm_squared(), witness: w, residual })
}

/// `min ‖ωA‖²` over rows `ω` with `ωAΠ_{H(x)} = 0` and `ωτ = 1`.
pub fn negative_witness(p: &SpanProgram, x: &[u8]) -> Result<WitnessReport> {
    let hx = p.input_subspace(x)?;
    let scale = operator_scale(&p.a);
    let b = &p.a * hx.columns();
    // Left null space of A Π_{H(x)}: columns n with n† B = 0.
    let left_null = kernel_basis_scaled(&b.adjoint(), scale);
    let none = |residual: f64| WitnessReport {
        kind: WitnessKind::None,
        size: 0.0,
        witness: CVector::zeros(p.dim_v),
        residual,
    };
    if left_null.rank() == 0 {
        return Ok(none(f64::INFINITY));
    }
    let nmat = left_null.columns();
    let g = nmat.adjoint() * &p.tau;
    if g.norm() <= FEASIBILITY_TOL {
        return Ok(none(g.norm()));
    }
    let na = nmat.adjoint() * &p.a;
    let m = &na * na.adjoint();
    let mplus = pseudo_inverse_scaled(&m, scale * scale);
    let in_kernel = &g - &m * (&mplus * &g);
    let coeff = if in_kernel.norm() > FEASIBILITY_TOL * g.norm() {
        // A direction annihilating A but not τ: the witness has size zero.
        let denom = in_kernel.dotc(&g);
        &in_kernel / denom.conj()
    } else {
        let mg = &mplus * &g;
        let denom = g.dotc(&mg);
        &mg / denom.conj()
    };
    let omega_col = nmat * coeff;
    let omega: CVector = omega_col.map(|z| z.conj());
    let omega_row = omega_col.adjoint();
    let wa = &omega_row * &p.a;
    let size = wa.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let constraint = (&wa * hx.columns()).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let normalization = ((&omega_row * &p.tau)[(0, 0)] - c64(1.0, 0.0)).norm();
    Ok(WitnessReport {
        kind: WitnessKind::Negative,
        size,
        witness: omega,
        residual: constraint.max(normalization),
    })
}

/// Runs both solvers; exactly one must be feasible.
pub fn witness(p: &SpanProgram, x: &[u8]) -> Result<WitnessReport> {
    let pos = positive_witness(p, x)?;
    let neg = negative_witness(p, x)?;
    match (pos.kind, neg.kind) {
        (WitnessKind::Positive, WitnessKind::None) => Ok(pos),
        (WitnessKind::None, WitnessKind::Negative) => Ok(neg),
        (a, b) => Err(Error::Validation(format!(
            "input {} has positive solve {a:?} and negative solve {b:?}",
            format_input(x)
        ))),
    }
}

/// Function value decided by `p` at `x`.
pub fn evaluate(p: &SpanProgram, x: &[u8]) -> Result<bool> {
    Ok(witness(p, x)?.kind == WitnessKind::Positive)
}

pub fn format_input(x: &[u8]) -> String {
    x.iter().map(|&c| char::from_digit(c as u32, 36).unwrap_or('?')).collect()
}

/// Parses a string of base-36 digits into letters.
pub fn parse_input(s: &str) -> Result<Vec<u8>> {
    s.chars()
        .map(|ch| {
            ch.to_digit(36)
                .map(|d| d as u8)
                .ok_or_else(|| Error::Parse(format!("invalid letter {ch:?} in input {s:?}")))
        })
        .collect()
}

/// All strings in `[q]^n` in lexicographic order.
pub fn all_inputs(n: usize, q: usize) -> Vec<Vec<u8>> {
    let total = q.pow(n as u32);
    (0..total)
        .map(|mut idx| {
            let mut x = vec![0u8; n];
            for j in (0..n).rev() {
                x[j] = (idx % q) as u8;
                idx /= q;
            }
            x
        })
        .collect()
}

/// Complement program deciding the negated function with exchanged
/// positive and negative witness sizes.
pub fn complement(p: &SpanProgram) -> Result<SpanProgram> {
    let (w0, residual) = min_norm_solution(&p.a, &p.tau, &SubspaceBasis::full(p.dim_h))?;
    if residual > FEASIBILITY_TOL {
        return Err(Error::Infeasible(format!(
            "target is not in the range of A (residual {residual:.3e})"
        )));
    }
    let dim_h = p.dim_h;
    let mut letters = Vec::with_capacity(p.n);
    let mut index_blocks = Vec::with_capacity(p.n);
    let mut h_false = p.h_true.clone();
    for j in 0..p.n {
        let owner = &p.index_blocks[j];
        let per_letter: Vec<SubspaceBasis> =
            p.letters[j].iter().map(|sub| sub.complement_within(owner)).collect();
        let mut union = SubspaceBasis::empty(dim_h);
        for sub in &per_letter {
            union = union.sum(sub)?;
        }
        // Directions available under every letter can never be selected in
        // the complement; they are parked in H_false.
        let leftover = union.complement_within(owner);
        h_false = h_false.sum(&leftover)?;
        index_blocks.push(union);
        letters.push(per_letter);
    }
    let lambda = kernel_projector(&p.a);
    let mut a = CMatrix::zeros(dim_h + 1, dim_h);
    a.rows_mut(0, dim_h).copy_from(&lambda);
    a.row_mut(dim_h).copy_from(&w0.adjoint());
    let tau = basis_vector(dim_h + 1, dim_h);
    SpanProgram::new(SpanProgramParts {
        n: p.n,
        q: p.q,
        index_blocks,
        letters,
        h_true: p.h_false.clone(),
        h_false,
        a,
        tau,
    })
}

/// Maximum positive and negative witness sizes over a labelled domain.
pub fn max_witnesses(p: &SpanProgram, domain: &[Vec<u8>], labels: &[bool]) -> Result<(f64, f64)> {
    if domain.len() != labels.len() {
        return Err(Error::Dimension { expected: domain.len(), found: labels.len() });
    }
    let mut w_plus: f64 = 0.0;
    let mut w_minus: f64 = 0.0;
    for (x, &label) in domain.iter().zip(labels) {
        let rep = witness(p, x)?;
        match (rep.kind, label) {
            (WitnessKind::Positive, true) => w_plus = w_plus.max(rep.size),
            (WitnessKind::Negative, false) => w_minus = w_minus.max(rep.size),
            _ => {
                return Err(Error::Validation(format!(
                    "program does not decide the labels at input {}",
                    format_input(x)
                )))
            }
        }
    }
    Ok((w_plus, w_minus))
}

/// A span program extended by `|0̂>` with scale `α`.
#[derive(Clone, Debug)]
pub struct ExtendedProgram<'a> {
    base: &'a SpanProgram,
    alpha: f64,
    a_alpha: CMatrix,
    lambda_alpha: CMatrix,
}

impl<'a> ExtendedProgram<'a> {
    pub fn new(base: &'a SpanProgram, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Validation(format!("alpha must be positive, got {alpha}")));
        }
        let dim_h = base.dim_h;
        let mut a_alpha = CMatrix::zeros(base.dim_v, dim_h + 1);
        a_alpha.columns_mut(0, dim_h).copy_from(&base.a);
        a_alpha.set_column(dim_h, &(&base.tau / c64(alpha, 0.0)));
        let lambda_alpha = kernel_projector(&a_alpha);
        Ok(ExtendedProgram { base, alpha, a_alpha, lambda_alpha })
    }

    pub fn base(&self) -> &SpanProgram {
        self.base
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn a_alpha(&self) -> &CMatrix {
        &self.a_alpha
    }
    pub fn lambda_alpha(&self) -> &CMatrix {
        &self.lambda_alpha
    }
    /// Dimension of `H ⊕ span{|0̂>}`.
    pub fn dim(&self) -> usize {
        self.base.dim_h + 1
    }
    /// Index of `|0̂>`.
    pub fn hat_index(&self) -> usize {
        self.base.dim_h
    }

    /// Projector onto `H(x) ⊕ span{|0̂>}`.
    pub fn input_projector(&self, x: &[u8]) -> Result<CMatrix> {
        let hx = self.base.input_subspace(x)?;
        let dim = self.dim();
        let mut cols = CMatrix::zeros(dim, hx.rank() + 1);
        cols.view_mut((0, 0), (dim - 1, hx.rank())).copy_from(hx.columns());
        cols[(dim - 1, hx.rank())] = c64(1.0, 0.0);
        Ok(&cols * cols.adjoint())
    }
}

/// `U(P, x, α) = (2Π_x - I)(2Λ^α - I)`.
pub fn algorithm_unitary(e: &ExtendedProgram, x: &[u8]) -> Result<CMatrix> {
    let dim = e.dim();
    let id = CMatrix::identity(dim, dim);
    let two = c64(2.0, 0.0);
    let pi = e.input_projector(x)?;
    Ok((&pi * two - &id) * (&e.lambda_alpha * two - &id))
}

/// Column space helper exposed for builders that assemble blocks.
pub fn span_of_columns(m: &CMatrix) -> SubspaceBasis {
    column_space(m, 0.0)
}
