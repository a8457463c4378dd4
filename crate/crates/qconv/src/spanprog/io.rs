use serde::{Deserialize, Serialize};

use super::{SpanProgram, SpanProgramParts};
use crate::error::{Error, Result};
use crate::numerics::{c64, orthonormalize, CMatrix, CVector, SubspaceBasis};

/// A subspace given either by coordinate indices or by spanning vectors.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SubspaceSpec {
    Indices { indices: Vec<usize> },
    Vectors { vectors: Vec<Vec<[f64; 2]>> },
}

impl SubspaceSpec {
    fn resolve(&self, dim: usize) -> Result<SubspaceBasis> {
        match self {
            SubspaceSpec::Indices { indices } => SubspaceBasis::coordinates(dim, indices),
            SubspaceSpec::Vectors { vectors } => {
                let vs: Vec<CVector> = vectors.iter().map(|v| vector_from_pairs(v)).collect();
                orthonormalize(dim, &vs)
            }
        }
    }

    fn from_basis(b: &SubspaceBasis) -> Self {
        SubspaceSpec::Vectors { vectors: b.vectors().iter().map(pairs_from_vector).collect() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlockSpec {
    /// `H_j`.
    pub owned: SubspaceSpec,
    /// `H_{j,a}` for each letter `a`.
    pub letters: Vec<SubspaceSpec>,
}

/// On-disk span program. Complex numbers are `[re, im]` pairs and `a` is
/// stored row by row.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpanProgramFile {
    pub n: usize,
    pub q: usize,
    pub dim_h: usize,
    pub dim_v: usize,
    pub blocks: Vec<BlockSpec>,
    pub true_block: SubspaceSpec,
    pub false_block: SubspaceSpec,
    pub a: Vec<Vec<[f64; 2]>>,
    pub tau: Vec<[f64; 2]>,
}

pub(crate) fn vector_from_pairs(v: &[[f64; 2]]) -> CVector {
    CVector::from_iterator(v.len(), v.iter().map(|p| c64(p[0], p[1])))
}

pub(crate) fn pairs_from_vector(v: &CVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

impl SpanProgramFile {
    pub fn into_program(self) -> Result<SpanProgram> {
        let dim = self.dim_h;
        if self.a.len() != self.dim_v {
            return Err(Error::Dimension { expected: self.dim_v, found: self.a.len() });
        }
        let mut a = CMatrix::zeros(self.dim_v, dim);
        for (r, row) in self.a.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Dimension { expected: dim, found: row.len() });
            }
            for (c, p) in row.iter().enumerate() {
                a[(r, c)] = c64(p[0], p[1]);
            }
        }
        let mut index_blocks = Vec::new();
        let mut letters = Vec::new();
        for b in &self.blocks {
            index_blocks.push(b.owned.resolve(dim)?);
            letters.push(b.letters.iter().map(|s| s.resolve(dim)).collect::<Result<Vec<_>>>()?);
        }
        SpanProgram::new(SpanProgramParts {
            n: self.n,
            q: self.q,
            index_blocks,
            letters,
            h_true: self.true_block.resolve(dim)?,
            h_false: self.false_block.resolve(dim)?,
            a,
            tau: vector_from_pairs(&self.tau),
        })
    }

    pub fn from_program(p: &SpanProgram) -> Self {
        SpanProgramFile {
            n: p.n,
            q: p.q,
            dim_h: p.dim_h,
            dim_v: p.dim_v,
            blocks: (0..p.n)
                .map(|j| BlockSpec {
                    owned: SubspaceSpec::from_basis(&p.index_blocks[j]),
                    letters: p.letters[j].iter().map(SubspaceSpec::from_basis).collect(),
                })
                .collect(),
            true_block: SubspaceSpec::from_basis(&p.h_true),
            false_block: SubspaceSpec::from_basis(&p.h_false),
            a: (0..p.dim_v)
                .map(|r| (0..p.dim_h).map(|c| [p.a[(r, c)].re, p.a[(r, c)].im]).collect())
                .collect(),
            tau: pairs_from_vector(&p.tau),
        }
    }
}

impl SpanProgram {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<SpanProgramFile>(text)?.into_program()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&SpanProgramFile::from_program(self)).expect("serializable")
    }
}
