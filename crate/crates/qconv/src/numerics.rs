//! Dense complex linear algebra: subspaces, projectors, restricted
//! least-norm solves and eigendecomposition of unitaries.

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CVector = DVector<C64>;
pub type CMatrix = DMatrix<C64>;

/// Relative singular-value cutoff used for every rank decision.
pub const RANK_TOL: f64 = 1e-10;

/// Eigenvalue gap below which eigenvectors of the cosine part are merged
/// and re-split using the full unitary.
const CLUSTER_TOL: f64 = 1e-7;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub fn basis_vector(dim: usize, i: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[i] = c64(1.0, 0.0);
    v
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `max |U†U - I|`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let mut g = u.adjoint() * u;
    for i in 0..g.nrows() {
        g[(i, i)] -= c64(1.0, 0.0);
    }
    max_abs(&g)
}

/// Phase of `z` in `(-pi, pi]`.
pub fn principal_phase(z: C64) -> f64 {
    let a = z.arg();
    if a <= -PI {
        a + 2.0 * PI
    } else {
        a
    }
}

fn to_faer(m: &CMatrix) -> faer::Mat<C64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, C64>) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = h.nrows();
    if n == 0 {
        return (vec![], CMatrix::zeros(0, 0));
    }
    let eig = to_faer(h).self_adjoint_eigen(faer::Side::Lower).expect("eigensolver converged");
    let values = (0..n).map(|i| eig.S()[i].re).collect();
    (values, from_faer(eig.U()))
}

/// Orthonormal basis of a subspace of `C^ambient_dim`, stored as columns.
#[derive(Clone, Debug)]
pub struct SubspaceBasis {
    columns: CMatrix,
}

impl SubspaceBasis {
    /// Wraps columns that the caller guarantees to be orthonormal.
    pub fn from_orthonormal(columns: CMatrix) -> Self {
        SubspaceBasis { columns }
    }

    pub fn empty(dim: usize) -> Self {
        SubspaceBasis { columns: CMatrix::zeros(dim, 0) }
    }

    pub fn full(dim: usize) -> Self {
        SubspaceBasis { columns: CMatrix::identity(dim, dim) }
    }

    /// Span of the listed standard basis vectors.
    pub fn coordinates(dim: usize, indices: &[usize]) -> Result<Self> {
        let mut cols = CMatrix::zeros(dim, indices.len());
        for (k, &i) in indices.iter().enumerate() {
            if i >= dim {
                return Err(Error::Dimension { expected: dim, found: i + 1 });
            }
            cols[(i, k)] = c64(1.0, 0.0);
        }
        Ok(orthonormalize_columns(&cols))
    }

    pub fn ambient_dim(&self) -> usize {
        self.columns.nrows()
    }

    pub fn rank(&self) -> usize {
        self.columns.ncols()
    }

    pub fn columns(&self) -> &CMatrix {
        &self.columns
    }

    pub fn vectors(&self) -> Vec<CVector> {
        (0..self.rank()).map(|k| self.columns.column(k).into_owned()).collect()
    }

    pub fn projector(&self) -> CMatrix {
        projector_onto(self)
    }

    /// Orthogonal projection of `v` onto the subspace.
    pub fn project(&self, v: &CVector) -> CVector {
        &self.columns * (self.columns.adjoint() * v)
    }

    /// Distance of `v` from the subspace.
    pub fn distance(&self, v: &CVector) -> f64 {
        (v - self.project(v)).norm()
    }

    /// Basis of the sum of two subspaces.
    pub fn sum(&self, other: &SubspaceBasis) -> Result<SubspaceBasis> {
        if other.ambient_dim() != self.ambient_dim() {
            return Err(Error::Dimension { expected: self.ambient_dim(), found: other.ambient_dim() });
        }
        let mut cols = CMatrix::zeros(self.ambient_dim(), self.rank() + other.rank());
        cols.columns_mut(0, self.rank()).copy_from(&self.columns);
        cols.columns_mut(self.rank(), other.rank()).copy_from(&other.columns);
        Ok(orthonormalize_columns(&cols))
    }

    /// Orthogonal complement in the ambient space.
    pub fn complement(&self) -> SubspaceBasis {
        self.complement_within(&SubspaceBasis::full(self.ambient_dim()))
    }

    /// `outer ∩ self^⊥`.
    pub fn complement_within(&self, outer: &SubspaceBasis) -> SubspaceBasis {
        if outer.rank() == 0 {
            return SubspaceBasis::empty(self.ambient_dim());
        }
        if self.rank() == 0 {
            return outer.clone();
        }
        let overlap = self.columns.adjoint() * &outer.columns;
        let ker = kernel_basis_scaled(&overlap, 1.0);
        SubspaceBasis { columns: &outer.columns * ker.columns() }
    }

    /// Largest entry of `Q†Q - I`.
    pub fn orthonormality_defect(&self) -> f64 {
        unitarity_defect(&self.columns)
    }
}

/// Orthonormal basis of the span of `vectors`, dropping directions whose
/// singular value is below `RANK_TOL` times the largest.
pub fn orthonormalize(ambient_dim: usize, vectors: &[CVector]) -> Result<SubspaceBasis> {
    let mut cols = CMatrix::zeros(ambient_dim, vectors.len());
    for (k, v) in vectors.iter().enumerate() {
        if v.len() != ambient_dim {
            return Err(Error::Dimension { expected: ambient_dim, found: v.len() });
        }
        cols.set_column(k, v);
    }
    Ok(orthonormalize_columns(&cols))
}

/// Column-space basis of `m`.
pub fn orthonormalize_columns(m: &CMatrix) -> SubspaceBasis {
    column_space(m, 0.0)
}

/// Column-space basis of `m`, treating singular values below
/// `RANK_TOL * max(sigma_max, scale)` as zero. `scale` supplies the natural
/// magnitude when `m` is a product that may be numerically zero.
pub fn column_space(m: &CMatrix, scale: f64) -> SubspaceBasis {
    let rows = m.nrows();
    let svd = SingularTriples::new(m);
    let keep = svd.significant(scale);
    let mut q = CMatrix::zeros(rows, keep.len());
    for (k, &i) in keep.iter().enumerate() {
        q.set_column(k, &svd.u.column(i));
    }
    SubspaceBasis { columns: q }
}

/// Thin SVD of `m`.
struct SingularTriples {
    values: Vec<f64>,
    u: CMatrix,
    v: CMatrix,
}

impl SingularTriples {
    fn new(m: &CMatrix) -> Self {
        let (rows, cols) = m.shape();
        if rows == 0 || cols == 0 {
            return SingularTriples { values: vec![], u: CMatrix::zeros(rows, 0), v: CMatrix::zeros(cols, 0) };
        }
        let svd = to_faer(m).thin_svd().expect("SVD converged");
        let values = (0..rows.min(cols)).map(|i| svd.S()[i].re).collect();
        SingularTriples { values, u: from_faer(svd.U()), v: from_faer(svd.V()) }
    }

    /// Indices of singular values above `RANK_TOL * max(sigma_max, scale)`.
    fn significant(&self, scale: f64) -> Vec<usize> {
        let smax = self.values.iter().cloned().fold(scale, f64::max);
        if smax == 0.0 {
            return vec![];
        }
        (0..self.values.len()).filter(|&i| self.values[i] > RANK_TOL * smax).collect()
    }
}

pub fn projector_onto(basis: &SubspaceBasis) -> CMatrix {
    &basis.columns * basis.columns.adjoint()
}

/// Orthonormal basis of the null space of `a`.
pub fn kernel_basis(a: &CMatrix) -> SubspaceBasis {
    kernel_basis_scaled(a, 0.0)
}

/// Null space with the rank cutoff of [`column_space`].
pub fn kernel_basis_scaled(a: &CMatrix, scale: f64) -> SubspaceBasis {
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 {
        return SubspaceBasis::full(cols);
    }
    let row_space = column_space(&a.adjoint(), scale);
    if row_space.rank() == 0 {
        return SubspaceBasis::full(cols);
    }
    let complement = CMatrix::identity(cols, cols) - row_space.projector();
    let (values, vectors) = hermitian_eigen(&complement);
    let keep: Vec<usize> = (0..cols).filter(|&i| values[i] > 0.5).collect();
    let mut q = CMatrix::zeros(cols, keep.len());
    for (k, &i) in keep.iter().enumerate() {
        q.set_column(k, &vectors.column(i));
    }
    SubspaceBasis { columns: q }
}

pub fn kernel_projector(a: &CMatrix) -> CMatrix {
    let cols = a.ncols();
    let row_space = orthonormalize_columns(&a.adjoint());
    CMatrix::identity(cols, cols) - row_space.projector()
}

/// Moore-Penrose pseudo-inverse with the relative cutoff `RANK_TOL`.
pub fn pseudo_inverse(a: &CMatrix) -> CMatrix {
    pseudo_inverse_scaled(a, 0.0)
}

/// Pseudo-inverse with the rank cutoff of [`column_space`].
pub fn pseudo_inverse_scaled(a: &CMatrix, scale: f64) -> CMatrix {
    let svd = SingularTriples::new(a);
    let mut out = CMatrix::zeros(a.ncols(), a.nrows());
    for i in svd.significant(scale) {
        out += svd.v.column(i) * svd.u.column(i).adjoint() * c64(1.0 / svd.values[i], 0.0);
    }
    out
}

/// Least-norm `w` in `span(restriction)` minimizing `‖A w - target‖`.
/// Returns `(w, ‖A w - target‖)`.
pub fn min_norm_solution(
    a: &CMatrix,
    target: &CVector,
    restriction: &SubspaceBasis,
) -> Result<(CVector, f64)> {
    if a.nrows() != target.len() {
        return Err(Error::Dimension { expected: a.nrows(), found: target.len() });
    }
    if a.ncols() != restriction.ambient_dim() {
        return Err(Error::Dimension { expected: a.ncols(), found: restriction.ambient_dim() });
    }
    if restriction.rank() == 0 {
        return Ok((CVector::zeros(a.ncols()), target.norm()));
    }
    let b = a * restriction.columns();
    let coeffs = pseudo_inverse_scaled(&b, operator_scale(a)) * target;
    let w = restriction.columns() * coeffs;
    let residual = (a * &w - target).norm();
    Ok((w, residual))
}

/// Frobenius norm, used as the magnitude reference for rank cutoffs of
/// products involving `a`.
pub fn operator_scale(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Spectral data of a unitary matrix.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    phases: Vec<f64>,
    vectors: CMatrix,
}

impl EigenSystem {
    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// Eigenvectors as columns, in the order of `phases`.
    pub fn vectors(&self) -> &CMatrix {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.phases.len()
    }

    /// Expansion coefficients `c_k = <u_k|psi>`.
    pub fn coefficients(&self, psi: &CVector) -> CVector {
        self.vectors.adjoint() * psi
    }

    /// Projector onto eigenvectors with `|theta| <= theta_max`.
    pub fn spectral_projector(&self, theta_max: f64) -> CMatrix {
        let keep: Vec<usize> = (0..self.dim()).filter(|&k| self.phases[k].abs() <= theta_max).collect();
        let mut q = CMatrix::zeros(self.dim(), keep.len());
        for (j, &k) in keep.iter().enumerate() {
            q.set_column(j, &self.vectors.column(k));
        }
        &q * q.adjoint()
    }

    /// `V diag(e^{i theta}) V†`.
    pub fn reconstruct(&self) -> CMatrix {
        let mut scaled = self.vectors.clone();
        for (k, &th) in self.phases.iter().enumerate() {
            let z = C64::from_polar(1.0, th);
            for r in 0..scaled.nrows() {
                scaled[(r, k)] *= z;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

/// Full eigendecomposition of a unitary matrix.
///
/// Diagonalizes the Hermitian part `(U + U†)/2`; eigenvectors whose cosine
/// values nearly coincide (always the case for conjugate phase pairs) are
/// re-diagonalized inside the cluster.
pub fn unitary_eigensystem(u: &CMatrix) -> Result<EigenSystem> {
    let n = u.nrows();
    if u.ncols() != n {
        return Err(Error::Dimension { expected: n, found: u.ncols() });
    }
    let defect = unitarity_defect(u);
    if defect > 1e-8 {
        return Err(Error::NonUnitary(defect));
    }
    if n == 0 {
        return Ok(EigenSystem { phases: vec![], vectors: CMatrix::zeros(0, 0) });
    }
    let herm = (u + u.adjoint()) * c64(0.5, 0.0);
    let (values, basis) = hermitian_eigen(&herm);

    let mut vectors = CMatrix::zeros(n, n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[end] - values[end - 1] < CLUSTER_TOL {
            end += 1;
        }
        let size = end - start;
        let mut block = basis.columns(start, size).into_owned();
        if size > 1 {
            // Inside a cluster the phases are ±θ for a single θ, which the
            // Hermitian matrix Re C + Im C separates.
            let c = block.adjoint() * u * &block;
            let ca = c.adjoint();
            let mixed = (&c + &ca) * c64(0.5, 0.0) + (&c - &ca) * c64(0.0, -0.5);
            block *= hermitian_eigen(&mixed).1;
        }
        vectors.columns_mut(start, size).copy_from(&block);
        start = end;
    }

    let uv = u * &vectors;
    let phases = (0..n)
        .map(|k| principal_phase(vectors.column(k).dotc(&uv.column(k))))
        .collect();
    Ok(EigenSystem { phases, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rv(v: &[f64]) -> CVector {
        CVector::from_iterator(v.len(), v.iter().map(|&x| c64(x, 0.0)))
    }

    #[test]
    fn orthonormalize_drops_dependent() {
        let b = orthonormalize(2, &[rv(&[1.0, 0.0]), rv(&[2.0, 0.0])]).unwrap();
        assert_eq!(b.rank(), 1);
        assert!((b.columns()[(0, 0)].norm() - 1.0).abs() < 1e-12);
        let s = 0.5f64.sqrt();
        let b = orthonormalize(2, &[rv(&[s, s]), rv(&[s, -s]), rv(&[1.0, 0.0])]).unwrap();
        assert_eq!(b.rank(), 2);
        assert!(orthonormalize(2, &[rv(&[1.0, 0.0, 0.0])]).is_err());
    }

    #[test]
    fn projector_examples() {
        assert!(max_abs(&projector_onto(&SubspaceBasis::empty(3))) == 0.0);
        let s = 0.5f64.sqrt();
        let p = projector_onto(&orthonormalize(2, &[rv(&[s, s])]).unwrap());
        for z in p.iter() {
            assert!((z - c64(0.5, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn kernel_examples() {
        let id = CMatrix::identity(3, 3);
        assert!(max_abs(&kernel_projector(&id)) < 1e-12);
        let z = CMatrix::zeros(2, 3);
        assert!(max_abs(&(kernel_projector(&z) - CMatrix::identity(3, 3))) < 1e-12);
        let row = CMatrix::from_row_slice(1, 2, &[c64(1.0, 0.0), c64(1.0, 0.0)]);
        let p = kernel_projector(&row);
        let expect = CMatrix::from_row_slice(
            2,
            2,
            &[c64(0.5, 0.0), c64(-0.5, 0.0), c64(-0.5, 0.0), c64(0.5, 0.0)],
        );
        assert!(max_abs(&(p - expect)) < 1e-12);
    }

    #[test]
    fn min_norm_examples() {
        let a = CMatrix::from_row_slice(1, 2, &[c64(1.0, 0.0), c64(1.0, 0.0)]);
        let t = rv(&[1.0]);
        let (w, r) = min_norm_solution(&a, &t, &SubspaceBasis::full(2)).unwrap();
        assert!(r < 1e-12 && (w[0].re - 0.5).abs() < 1e-12 && (w[1].re - 0.5).abs() < 1e-12);
        let first = SubspaceBasis::coordinates(2, &[0]).unwrap();
        let (w, r) = min_norm_solution(&a, &t, &first).unwrap();
        assert!(r < 1e-12 && (w[0].re - 1.0).abs() < 1e-12);
        let a = CMatrix::from_row_slice(1, 2, &[c64(1.0, 0.0), c64(0.0, 0.0)]);
        let second = SubspaceBasis::coordinates(2, &[1]).unwrap();
        let (_, r) = min_norm_solution(&a, &t, &second).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigensystem_examples() {
        let e = unitary_eigensystem(&CMatrix::identity(3, 3)).unwrap();
        assert!(e.phases().iter().all(|p| p.abs() < 1e-12));
        let d = CMatrix::from_diagonal(&rv(&[1.0, -1.0]));
        let mut ph = unitary_eigensystem(&d).unwrap().phases().to_vec();
        ph.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(ph[0].abs() < 1e-12 && (ph[1] - PI).abs() < 1e-12);
        let bad = CMatrix::from_diagonal(&rv(&[1.0, 2.0]));
        assert!(matches!(unitary_eigensystem(&bad), Err(Error::NonUnitary(_))));
    }

    #[test]
    fn complement_within_block() {
        let outer = SubspaceBasis::coordinates(4, &[0, 1, 2]).unwrap();
        let inner = SubspaceBasis::coordinates(4, &[1]).unwrap();
        let c = inner.complement_within(&outer);
        assert_eq!(c.rank(), 2);
        assert!(c.columns().row(1).iter().all(|z| z.norm() < 1e-12));
        assert!(c.columns().row(3).iter().all(|z| z.norm() < 1e-12));
    }
}
