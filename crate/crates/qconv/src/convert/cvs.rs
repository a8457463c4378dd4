use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{c64, CVector, C64};
use crate::spanprog::{format_input, parse_input};

/// Tolerance on the Gram-difference constraint.
pub const GRAM_TOL: f64 = 1e-9;

/// Sparse complex vector with sorted, distinct indices.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseVector {
    dim: usize,
    entries: Vec<(usize, C64)>,
}

impl SparseVector {
    pub fn zero(dim: usize) -> Self {
        SparseVector { dim, entries: Vec::new() }
    }

    /// Sorts, merges repeated indices and drops exact zeros.
    pub fn new(dim: usize, mut entries: Vec<(usize, C64)>) -> Result<Self> {
        if let Some(&(i, _)) = entries.iter().find(|(i, _)| *i >= dim) {
            return Err(Error::Dimension { expected: dim, found: i + 1 });
        }
        entries.sort_by_key(|e| e.0);
        let mut merged: Vec<(usize, C64)> = Vec::with_capacity(entries.len());
        for (i, z) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == i => last.1 += z,
                _ => merged.push((i, z)),
            }
        }
        merged.retain(|e| e.1 != c64(0.0, 0.0));
        Ok(SparseVector { dim, entries: merged })
    }

    pub fn from_dense(v: &CVector) -> Self {
        let entries = v.iter().enumerate().filter(|(_, z)| z.norm_sqr() > 0.0).map(|(i, z)| (i, *z)).collect();
        SparseVector { dim: v.len(), entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, C64)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|e| e.1.norm_sqr()).sum()
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn dot(&self, other: &SparseVector) -> C64 {
        let (mut i, mut j) = (0, 0);
        let mut acc = c64(0.0, 0.0);
        while i < self.entries.len() && j < other.entries.len() {
            let (a, b) = (self.entries[i].0, other.entries[j].0);
            if a == b {
                acc += self.entries[i].1.conj() * other.entries[j].1;
                i += 1;
                j += 1;
            } else if a < b {
                i += 1;
            } else {
                j += 1;
            }
        }
        acc
    }

    pub fn scaled(&self, s: f64) -> SparseVector {
        SparseVector { dim: self.dim, entries: self.entries.iter().map(|&(i, z)| (i, z * s)).collect() }
    }

    pub fn to_dense(&self) -> CVector {
        let mut v = CVector::zeros(self.dim);
        for &(i, z) in &self.entries {
            v[i] = z;
        }
        v
    }
}

/// Paired vector families `{v_xj}`, `{u_xj}` with initial and target states
/// satisfying `<ρ_x|ρ_y> - <σ_x|σ_y> = Σ_{j: x_j ≠ y_j} <u_xj|v_yj>`.
#[derive(Clone, Debug)]
pub struct ConvertingVectorSet {
    n: usize,
    q: usize,
    dim: usize,
    state_dim: usize,
    domain: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
    v: Vec<Vec<SparseVector>>,
    u: Vec<Vec<SparseVector>>,
    rho: Vec<CVector>,
    sigma: Vec<CVector>,
}

/// Constructor arguments; validated by [`ConvertingVectorSet::new`].
#[derive(Clone, Debug)]
pub struct CvsParts {
    pub n: usize,
    pub q: usize,
    /// Dimension of every `v_xj`, `u_xj`.
    pub dim: usize,
    pub domain: Vec<Vec<u8>>,
    pub v: Vec<Vec<SparseVector>>,
    pub u: Vec<Vec<SparseVector>>,
    pub rho: Vec<CVector>,
    pub sigma: Vec<CVector>,
}

impl ConvertingVectorSet {
    pub fn new(parts: CvsParts) -> Result<Self> {
        let set = Self::assemble(parts)?;
        let residual = set.gram_residual();
        if residual > GRAM_TOL {
            return Err(Error::Validation(format!("Gram-difference residual {residual:.3e} exceeds {GRAM_TOL:e}")));
        }
        Ok(set)
    }

    fn assemble(parts: CvsParts) -> Result<Self> {
        let CvsParts { n, q, dim, domain, v, u, rho, sigma } = parts;
        let size = domain.len();
        if size == 0 {
            return Err(Error::Validation("empty domain".into()));
        }
        if v.len() != size || u.len() != size || rho.len() != size || sigma.len() != size {
            return Err(Error::Validation("per-input families must match the domain size".into()));
        }
        let state_dim = rho[0].len();
        let mut index = HashMap::with_capacity(size);
        for (k, x) in domain.iter().enumerate() {
            if x.len() != n || x.iter().any(|&c| c as usize >= q) {
                return Err(Error::Validation(format!("domain entry {} is not in [{q}]^{n}", format_input(x))));
            }
            if index.insert(x.clone(), k).is_some() {
                return Err(Error::Validation(format!("duplicate domain entry {}", format_input(x))));
            }
            if v[k].len() != n || u[k].len() != n {
                return Err(Error::Validation(format!("input {} needs {n} vectors per family", format_input(x))));
            }
            for vec in v[k].iter().chain(&u[k]) {
                if vec.dim() != dim {
                    return Err(Error::Dimension { expected: dim, found: vec.dim() });
                }
            }
            for s in [&rho[k], &sigma[k]] {
                if s.len() != state_dim {
                    return Err(Error::Dimension { expected: state_dim, found: s.len() });
                }
                if (s.norm() - 1.0).abs() > 1e-9 {
                    return Err(Error::Unnormalized(s.norm()));
                }
            }
        }
        Ok(ConvertingVectorSet { n, q, dim, state_dim, domain, index, v, u, rho, sigma })
    }

    /// Largest violation of the Gram-difference constraint over all pairs.
    pub fn gram_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (a, x) in self.domain.iter().enumerate() {
            for (b, y) in self.domain.iter().enumerate() {
                let lhs = self.rho[a].dotc(&self.rho[b]) - self.sigma[a].dotc(&self.sigma[b]);
                let mut rhs = c64(0.0, 0.0);
                for j in 0..self.n {
                    if x[j] != y[j] {
                        rhs += self.u[a][j].dot(&self.v[b][j]);
                    }
                }
                worst = worst.max((lhs - rhs).norm());
            }
        }
        worst
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn q(&self) -> usize {
        self.q
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn state_dim(&self) -> usize {
        self.state_dim
    }
    pub fn domain(&self) -> &[Vec<u8>] {
        &self.domain
    }
    pub fn len(&self) -> usize {
        self.domain.len()
    }
    pub fn is_empty(&self) -> bool {
        self.domain.is_empty()
    }
    pub fn index_of(&self, x: &[u8]) -> Option<usize> {
        self.index.get(x).copied()
    }
    pub fn v(&self, x: usize, j: usize) -> &SparseVector {
        &self.v[x][j]
    }
    pub fn u(&self, x: usize, j: usize) -> &SparseVector {
        &self.u[x][j]
    }
    pub fn rho(&self, x: usize) -> &CVector {
        &self.rho[x]
    }
    pub fn sigma(&self, x: usize) -> &CVector {
        &self.sigma[x]
    }

    /// `(Σ_j ‖v_xj‖², Σ_j ‖u_xj‖²)` for the input at domain position `x`.
    pub fn witness_sizes(&self, x: usize) -> (f64, f64) {
        let plus = self.v[x].iter().map(SparseVector::norm_sqr).sum();
        let minus = self.u[x].iter().map(SparseVector::norm_sqr).sum();
        (plus, minus)
    }

    pub fn witness_sizes_of(&self, x: &[u8]) -> Result<(f64, f64)> {
        let k = self
            .index_of(x)
            .ok_or_else(|| Error::Validation(format!("input {} is outside the domain", format_input(x))))?;
        Ok(self.witness_sizes(k))
    }

    /// `(W₊, W₋)` over the domain.
    pub fn max_witnesses(&self) -> (f64, f64) {
        (0..self.len()).map(|k| self.witness_sizes(k)).fold((0.0, 0.0), |(a, b), (p, m)| (a.max(p), b.max(m)))
    }

    /// Exchanges the two families, which swaps positive and negative sizes.
    pub fn complement_cvs(&self) -> Result<Self> {
        let mut out = self.clone();
        std::mem::swap(&mut out.u, &mut out.v);
        let residual = out.gram_residual();
        if residual > GRAM_TOL {
            return Err(Error::Validation(format!("complement violates the Gram constraint ({residual:.3e})")));
        }
        Ok(out)
    }

    /// Rescales so that both maxima equal `sqrt(W₊ W₋)`.
    pub fn rescale_balanced(&self) -> Result<Self> {
        let (wp, wm) = self.max_witnesses();
        if wp <= 0.0 || wm <= 0.0 {
            return Err(Error::Validation(format!("cannot balance maxima W+ = {wp}, W- = {wm}")));
        }
        let mut out = self.clone();
        let sv = (wm / wp).powf(0.25);
        let su = (wp / wm).powf(0.25);
        for k in 0..out.len() {
            for j in 0..out.n {
                out.v[k][j] = out.v[k][j].scaled(sv);
                out.u[k][j] = out.u[k][j].scaled(su);
            }
        }
        Ok(out)
    }

    /// Label of each domain input when every `σ_x` is a standard basis
    /// vector; `None` otherwise.
    pub fn basis_labels(&self) -> Option<Vec<usize>> {
        self.sigma
            .iter()
            .map(|s| {
                let (i, z) = s.iter().enumerate().max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))?;
                ((z.norm() - 1.0).abs() < 1e-9).then_some(i)
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&CvsFile::from_set(self)).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<CvsFile>(text)?.into_set()
    }
}

type Entry = (usize, [f64; 2]);

/// On-disk converting vector set. Sparse vectors are lists of
/// `[index, [re, im]]`; dense states are lists of `[re, im]`.
#[derive(Serialize, Deserialize)]
struct CvsFile {
    n: usize,
    q: usize,
    dim: usize,
    inputs: Vec<CvsInputFile>,
}

#[derive(Serialize, Deserialize)]
struct CvsInputFile {
    x: String,
    rho: Vec<[f64; 2]>,
    sigma: Vec<[f64; 2]>,
    v: Vec<Vec<Entry>>,
    u: Vec<Vec<Entry>>,
}

impl CvsFile {
    fn from_set(s: &ConvertingVectorSet) -> Self {
        let sparse = |v: &SparseVector| v.entries().iter().map(|&(i, z)| (i, [z.re, z.im])).collect();
        let dense = |v: &CVector| v.iter().map(|z| [z.re, z.im]).collect();
        CvsFile {
            n: s.n,
            q: s.q,
            dim: s.dim,
            inputs: (0..s.len())
                .map(|k| CvsInputFile {
                    x: format_input(&s.domain[k]),
                    rho: dense(&s.rho[k]),
                    sigma: dense(&s.sigma[k]),
                    v: s.v[k].iter().map(sparse).collect(),
                    u: s.u[k].iter().map(sparse).collect(),
                })
                .collect(),
        }
    }

    fn into_set(self) -> Result<ConvertingVectorSet> {
        let dense = |v: &[[f64; 2]]| CVector::from_iterator(v.len(), v.iter().map(|p| c64(p[0], p[1])));
        let sparse = |dim: usize, v: &[Entry]| SparseVector::new(dim, v.iter().map(|&(i, p)| (i, c64(p[0], p[1]))).collect());
        let mut parts = CvsParts {
            n: self.n,
            q: self.q,
            dim: self.dim,
            domain: vec![],
            v: vec![],
            u: vec![],
            rho: vec![],
            sigma: vec![],
        };
        for inp in &self.inputs {
            parts.domain.push(parse_input(&inp.x)?);
            parts.rho.push(dense(&inp.rho));
            parts.sigma.push(dense(&inp.sigma));
            parts.v.push(inp.v.iter().map(|e| sparse(self.dim, e)).collect::<Result<_>>()?);
            parts.u.push(inp.u.iter().map(|e| sparse(self.dim, e)).collect::<Result<_>>()?);
        }
        ConvertingVectorSet::new(parts)
    }
}
