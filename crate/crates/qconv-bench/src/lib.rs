//! Fixtures shared by the benchmarks.

use qconv::apps::{build_or_program, build_search_tree, SearchMode};
use qconv::convert::ConvertingVectorSet;
use qconv::numerics::{CMatrix, CVector};
use qconv::random::{random_state, random_unitary, trial_rng};
use qconv::spanprog::{algorithm_unitary, ExtendedProgram, SpanProgram};

/// Haar-random unitary and state of the given dimension.
pub fn random_pair(dim: usize, seed: u64) -> (CMatrix, CVector) {
    let mut rng = trial_rng(seed, 0);
    (random_unitary(dim, &mut rng), random_state(dim, &mut rng))
}

pub fn or_program(n: usize) -> SpanProgram {
    build_or_program(n).expect("valid size")
}

/// The decision unitary of OR on `n` bits at input `x`.
pub fn or_unitary(n: usize, alpha: f64, x: &[u8]) -> CMatrix {
    let p = or_program(n);
    let ext = ExtendedProgram::new(&p, alpha).expect("positive alpha");
    algorithm_unitary(&ext, x).expect("input of length n")
}

pub fn find_both_set(n: usize) -> ConvertingVectorSet {
    build_search_tree(n, SearchMode::FindBoth).and_then(|s| s.compile()).expect("valid size")
}
