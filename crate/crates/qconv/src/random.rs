//! Seeded generators for random test instances.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rand::SeedableRng;

use crate::apps::{Color, DecisionTree, Graph, TreeEdge, TreeVertex};
use crate::error::Result;
use crate::numerics::{c64, orthonormalize, CMatrix, CVector, SubspaceBasis, C64};
use crate::spanprog::{SpanProgram, SpanProgramParts};

/// Independent stream `stream` of the generator seeded by `seed`.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // Box-Muller.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    c64(gaussian(rng), gaussian(rng)) / 2f64.sqrt()
}

pub fn random_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    CVector::from_fn(dim, |_, _| complex_gaussian(rng))
}

/// Uniformly random unit vector.
pub fn random_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    loop {
        let v = random_vector(dim, rng);
        let n = v.norm();
        if n > 1e-6 {
            return v / c64(n, 0.0);
        }
    }
}

/// Haar-random unitary via QR of a Ginibre matrix with phase correction.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for k in 0..dim {
        let d = r[(k, k)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { c64(1.0, 0.0) };
        let col = q.column(k) * ph;
        q.set_column(k, &col);
    }
    q
}

/// Random subspace of the given rank.
pub fn random_subspace<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> SubspaceBasis {
    let vs: Vec<CVector> = (0..rank).map(|_| random_vector(dim, rng)).collect();
    orthonormalize(dim, &vs).expect("consistent dimensions")
}

/// Random unitary built from a few rank-deficient reflections, so that it
/// has degenerate phases at 0 and π like the algorithm unitaries.
pub fn random_reflection_product<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let id = CMatrix::identity(dim, dim);
    let two = c64(2.0, 0.0);
    let p = random_subspace(dim, rng.gen_range(0..=dim), rng).projector();
    let l = random_subspace(dim, rng.gen_range(0..=dim), rng).projector();
    (&p * two - &id) * (&l * two - &id)
}

/// Random span program with `n` indices over alphabet `q`. Each index owns
/// a block of `q` coordinates rotated by a random unitary; letter `a` gets
/// a random non-empty subset of the rotated block, and the subsets cover
/// the block. `τ` lies in the range of `A`.
pub fn random_span_program<R: Rng + ?Sized>(n: usize, q: usize, extra: usize, dim_v: usize, rng: &mut R) -> Result<SpanProgram> {
    let block = q.max(2) - 1;
    let dim_h = n * block + extra;
    let mut index_blocks = Vec::with_capacity(n);
    let mut letters = Vec::with_capacity(n);
    for j in 0..n {
        let rot = random_unitary(block, rng);
        let mut cols = CMatrix::zeros(dim_h, block);
        for r in 0..block {
            for c in 0..block {
                cols[(j * block + r, c)] = rot[(r, c)];
            }
        }
        let owner = SubspaceBasis::from_orthonormal(cols.clone());
        let mut per_letter = Vec::with_capacity(q);
        let mut covered = vec![false; block];
        for a in 0..q {
            let mut pick: Vec<usize> = (0..block).filter(|_| rng.gen_bool(0.5)).collect();
            if a == q - 1 {
                pick.extend((0..block).filter(|&c| !covered[c]));
                pick.sort_unstable();
                pick.dedup();
            }
            if a == 0 && rng.gen_bool(0.3) {
                pick.clear();
            }
            for &c in &pick {
                covered[c] = true;
            }
            let sub = CMatrix::from_fn(dim_h, pick.len(), |r, c| cols[(r, pick[c])]);
            per_letter.push(SubspaceBasis::from_orthonormal(sub));
        }
        index_blocks.push(owner);
        letters.push(per_letter);
    }
    let mut extras: Vec<usize> = (n * block..dim_h).collect();
    extras.shuffle(rng);
    let split = rng.gen_range(0..=extras.len());
    let h_true = SubspaceBasis::coordinates(dim_h, &extras[..split])?;
    let h_false = SubspaceBasis::coordinates(dim_h, &extras[split..])?;
    let a = CMatrix::from_fn(dim_v, dim_h, |_, _| complex_gaussian(rng));
    let support = random_vector(dim_h, rng);
    let tau = &a * support;
    SpanProgram::new(SpanProgramParts { n, q, index_blocks, letters, h_true, h_false, a, tau })
}

/// Random graph with `n_vertices`, edge probability `p`, and `s = 0`,
/// `t = n_vertices - 1`.
pub fn random_graph<R: Rng + ?Sized>(n_vertices: usize, p: f64, rng: &mut R) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n_vertices {
        for v in u + 1..n_vertices {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    if edges.is_empty() {
        edges.push((0, n_vertices - 1));
    }
    Graph::new(n_vertices, edges, 0, n_vertices - 1).expect("valid random graph")
}

/// Random bit string of length `n`.
pub fn random_bits<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<u8> {
    (0..n).map(|_| rng.gen_range(0..2u8)).collect()
}

/// Random decision tree over `[q]^n` with labels in `0..m`. Each internal
/// vertex splits its letters into groups; one group takes the black edge
/// and the rest share one red weight.
pub fn random_tree<R: Rng + ?Sized>(n: usize, q: usize, m: usize, max_depth: usize, rng: &mut R) -> Result<DecisionTree> {
    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    grow(n, q, m, max_depth, Vec::new(), &mut vertices, &mut edges, rng);
    DecisionTree::new(n, q, m, vertices, edges)
}

#[allow(clippy::too_many_arguments)]
fn grow<R: Rng + ?Sized>(
    n: usize,
    q: usize,
    m: usize,
    depth_left: usize,
    asked: Vec<usize>,
    vertices: &mut Vec<TreeVertex>,
    edges: &mut Vec<TreeEdge>,
    rng: &mut R,
) -> usize {
    let v = vertices.len();
    let free: Vec<usize> = (0..n).filter(|j| !asked.contains(j)).collect();
    let internal = depth_left > 0 && !free.is_empty() && (asked.is_empty() || rng.gen_bool(0.7));
    if !internal {
        vertices.push(TreeVertex { query: None, label: Some(rng.gen_range(0..m)) });
        return v;
    }
    let j = *free.choose(rng).expect("non-empty");
    vertices.push(TreeVertex { query: Some(j), label: None });
    let groups = rng.gen_range(1..=q);
    let mut letters: Vec<u8> = (0..q as u8).collect();
    letters.shuffle(rng);
    let mut parts: Vec<Vec<u8>> = letters[..groups].iter().map(|&a| vec![a]).collect();
    for &a in &letters[groups..] {
        parts[rng.gen_range(0..groups)].push(a);
    }
    let black_w = rng.gen_range(0.5..3.0);
    let red_w = rng.gen_range(0.5..3.0);
    let mut next = asked;
    next.push(j);
    for (g, mut part) in parts.into_iter().enumerate() {
        part.sort_unstable();
        let to = grow(n, q, m, depth_left - 1, next.clone(), vertices, edges, rng);
        let (color, weight) = if g == 0 { (Color::Black, black_w) } else { (Color::Red, red_w) };
        edges.push(TreeEdge { from: v, to, letters: part, color, weight });
    }
    v
}
