use crate::error::{Error, Result};
use crate::numerics::{c64, CMatrix, CVector, SubspaceBasis};
use crate::spanprog::{SpanProgram, SpanProgramParts};

/// OR of `n` bits: `V = C`, `τ = 1`, `A e_i = 1`, `H_{i,1} = span{e_i}`.
pub fn build_or_program(n: usize) -> Result<SpanProgram> {
    if n == 0 {
        return Err(Error::Validation("OR needs at least one bit".into()));
    }
    let coord = |i: usize| SubspaceBasis::coordinates(n, &[i]);
    let mut index_blocks = Vec::with_capacity(n);
    let mut letters = Vec::with_capacity(n);
    for i in 0..n {
        index_blocks.push(coord(i)?);
        letters.push(vec![SubspaceBasis::empty(n), coord(i)?]);
    }
    SpanProgram::new(SpanProgramParts {
        n,
        q: 2,
        index_blocks,
        letters,
        h_true: SubspaceBasis::empty(n),
        h_false: SubspaceBasis::empty(n),
        a: CMatrix::from_element(1, n, c64(1.0, 0.0)),
        tau: CVector::from_element(1, c64(1.0, 0.0)),
    })
}
