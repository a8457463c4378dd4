//! Numeric property checks. Each returns the worst violation seen, so a
//! check passes when `worst <= tolerance`.

use rand::Rng;
use serde::Serialize;

use crate::apps::{
    build_or_program, build_or_tree, build_search_tree, build_st_connectivity, verify_sum_bounds, AdviceDistribution,
    DecisionTree, SearchMode,
};
use crate::convert::{conversion_spec, effective_max, ConversionPair, ConversionSpace, ConvertingVectorSet, Side};
use crate::decider::{DecisionConfig, Decider};
use crate::error::Result;
use crate::numerics::{c64, unitary_eigensystem, CMatrix};
use crate::phasesim::circuit::ReferenceCircuit;
use crate::phasesim::{PhaseCheckSpec, SpectralState, Stage};
use crate::random::{
    random_bits, random_graph, random_reflection_product, random_span_program, random_state, random_subspace,
    random_tree, random_unitary, trial_rng,
};
use crate::spanprog::{all_inputs, complement, evaluate, max_witnesses, witness, WitnessKind};

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub cases: usize,
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub note: String,
}

impl CheckReport {
    fn new(name: &str, cases: usize, worst: f64, tolerance: f64, note: String) -> Self {
        CheckReport { name: name.into(), cases, worst, tolerance, passed: worst <= tolerance, note }
    }
}

impl std::fmt::Display for CheckReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {} cases={} worst={:.3e} tol={:.1e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            self.worst,
            self.tolerance
        )?;
        if !self.note.is_empty() {
            write!(f, " {}", self.note)?;
        }
        Ok(())
    }
}

/// `|w₊(P,x) - w₋(P†,x)|` and the mirror over random programs with
/// `n ≤ 4`, `q ≤ 3` and at most 8 columns.
pub fn witness_duality(cases: usize, seed: u64) -> Result<CheckReport> {
    let mut worst: f64 = 0.0;
    let mut largest: f64 = 0.0;
    for c in 0..cases as u64 {
        let mut rng = trial_rng(seed, c);
        let q = 2 + (c % 2) as usize;
        let n = 1 + (c as usize / 2) % 4;
        let extra = (8 - n * (q - 1)).min(2);
        let dim_v = 1 + (c as usize % 3);
        let p = random_span_program(n, q, extra, dim_v, &mut rng)?;
        let pdag = complement(&p)?;
        for x in all_inputs(n, q) {
            let a = witness(&p, &x)?;
            let b = witness(&pdag, &x)?;
            let opposite = matches!(
                (a.kind, b.kind),
                (WitnessKind::Positive, WitnessKind::Negative) | (WitnessKind::Negative, WitnessKind::Positive)
            );
            worst = worst.max(if opposite { (a.size - b.size).abs() } else { f64::INFINITY });
            largest = largest.max(a.size);
        }
    }
    Ok(CheckReport::new("witness-duality", cases, worst, 1e-6, format!("largest_size={largest:.3e}")))
}

/// `‖P_Θ(U) Π w‖ - (Θ/2)‖w‖` for `U = (2Π - I)(2Λ - I)` and `Λw = 0`.
pub fn spectral_gap(pairs: usize, seed: u64) -> Result<CheckReport> {
    let thetas = [0.01, 0.1, 0.5];
    let mut worst = f64::NEG_INFINITY;
    for c in 0..pairs as u64 {
        let mut rng = trial_rng(seed, c);
        let dim = 2 + (c as usize % 7);
        let pi = random_subspace(dim, rng.gen_range(0..=dim), &mut rng).projector();
        let lambda = random_subspace(dim, rng.gen_range(0..dim), &mut rng).projector();
        let id = CMatrix::identity(dim, dim);
        let two = c64(2.0, 0.0);
        let u = (&pi * two - &id) * (&lambda * two - &id);
        let eig = unitary_eigensystem(&u)?;
        let w = (&id - &lambda) * random_state(dim, &mut rng);
        let pw = &pi * &w;
        for theta in thetas {
            let lhs = (eig.spectral_projector(theta) * &pw).norm();
            worst = worst.max(lhs - theta / 2.0 * w.norm());
        }
    }
    Ok(CheckReport::new("spectral-gap", pairs * thetas.len(), worst, 1e-8, String::new()))
}

fn random_u(c: u64, dim: usize, seed: u64) -> CMatrix {
    let mut rng = trial_rng(seed, 1_000_000 + c);
    if c.is_multiple_of(2) {
        random_unitary(dim, &mut rng)
    } else {
        random_reflection_product(dim, &mut rng)
    }
}

/// `‖P₀ψ‖² ≤ p ≤ ‖P_Θψ‖² + ε` for Phase Checking with the default
/// discretization, plus leakage and reflection error on the high-phase part.
pub fn phase_check_sandwich(cases: usize, seed: u64) -> Result<CheckReport> {
    let mut worst = f64::NEG_INFINITY;
    for c in 0..cases as u64 {
        let dim = 2 + (c as usize % 7);
        let theta = [0.05, 0.2, 0.7, 1.5][c as usize % 4];
        let eps = [0.3, 0.1, 0.01][c as usize % 3];
        let u = random_u(c, dim, seed);
        let mut rng = trial_rng(seed, c);
        let psi = random_state(dim, &mut rng);
        let spec = PhaseCheckSpec::new(theta, eps)?;
        let eig = unitary_eigensystem(&u)?;
        let state = SpectralState::new(&eig, &psi)?;
        let p = state.check_probability(&spec);
        let p0 = (eig.spectral_projector(1e-9) * &psi).norm_squared();
        let low = eig.spectral_projector(theta) * &psi;
        worst = worst.max(p0 - p).max(p - low.norm_squared() - eps);
        let high = &psi - &low;
        let hn = high.norm();
        if hn > 1e-6 {
            let h = &high / c64(hn, 0.0);
            let hs = SpectralState::new(&eig, &h)?;
            let ov = hs.reflection_overlaps(&[-h.clone()], &spec)?.overlaps[0];
            let dist = (2.0 - 2.0 * ov.re).max(0.0).sqrt();
            worst = worst.max(hs.check_probability(&spec) - eps).max(dist - eps);
        }
    }
    Ok(CheckReport::new("phase-check-sandwich", cases, worst, 1e-9, String::new()))
}

/// Largest gap between the eigenbasis simulator and the explicit circuit
/// for `t, m ≤ 2` and `dim ≤ 4`.
pub fn circuit_agreement(cases: usize, seed: u64) -> Result<CheckReport> {
    let mut worst: f64 = 0.0;
    for c in 0..cases as u64 {
        let dim = 2 + (c as usize % 3);
        let u = random_u(c, dim, seed);
        let mut rng = trial_rng(seed, 2_000_000 + c);
        let psi = random_state(dim, &mut rng);
        let target = random_state(dim, &mut rng);
        let eig = unitary_eigensystem(&u)?;
        let state = SpectralState::new(&eig, &psi)?;
        for t in 1..=2 {
            for m in 1..=2 {
                let spec = PhaseCheckSpec::from_bits(t, m)?;
                let circ = ReferenceCircuit::new(&u, t, m)?;
                worst = worst.max((state.check_probability(&spec) - circ.check_probability(&psi)).abs());
                let ov = state.reflection_overlaps(std::slice::from_ref(&target), &spec)?.overlaps[0];
                worst = worst.max((ov - circ.reflection_overlap(&psi, &target)).norm());
                for (a, b) in state.basis_distribution(&spec).iter().zip(&circ.basis_distribution(&psi)) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
    }
    Ok(CheckReport::new("circuit-agreement", cases * 4, worst, 1e-8, String::new()))
}

/// Exact 1-test acceptance on OR: at most `1/3` when `f(x) = 0` and at
/// least `2/3` when `f(x) = 1` and `α² ≥ 3w₊(x)`.
pub fn one_test_bounds(n: usize) -> Result<CheckReport> {
    let p = build_or_program(n)?;
    let pdag = complement(&p)?;
    let domain = all_inputs(n, 2);
    let labels = domain.iter().map(|x| evaluate(&p, x)).collect::<Result<Vec<_>>>()?;
    let (wp, wm) = max_witnesses(&p, &domain, &labels)?;
    let decider = Decider::new(&p, &pdag, wp, wm, &DecisionConfig::new(0.1)?)?;
    let mut worst = f64::NEG_INFINITY;
    let (mut zero_tests, mut one_tests) = (0, 0);
    for (x, &f) in domain.iter().zip(&labels) {
        let size = witness(&p, x)?.size;
        for t in decider.prepare(x)?.acceptance_probabilities()? {
            if t.stage != Stage::OneTest {
                continue;
            }
            if !f {
                worst = worst.max(t.p_zero - 1.0 / 3.0);
                zero_tests += 1;
            } else if t.alpha * t.alpha >= 3.0 * size {
                worst = worst.max(2.0 / 3.0 - t.p_zero);
                one_tests += 1;
            }
        }
    }
    Ok(CheckReport::new(
        "one-test-bounds",
        zero_tests + one_tests,
        worst,
        1e-6,
        format!("n={n} f0_tests={zero_tests} f1_tests={one_tests}"),
    ))
}

/// `w₊` against the Laplacian effective resistance on random graphs with at
/// most `max_vertices` vertices; disconnected inputs must give negative
/// witnesses.
pub fn st_resistance(graphs: usize, max_vertices: usize, seed: u64) -> Result<CheckReport> {
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for c in 0..graphs as u64 {
        let mut rng = trial_rng(seed, c);
        let nv = rng.gen_range(3..=max_vertices.max(3));
        let g = random_graph(nv, 0.5, &mut rng);
        let p = build_st_connectivity(&g)?;
        let inputs = if g.n_edges() <= 8 {
            all_inputs(g.n_edges(), 2)
        } else {
            (0..32).map(|_| random_bits(g.n_edges(), &mut rng)).collect()
        };
        for x in inputs {
            let w = witness(&p, &x)?;
            let err = match (g.effective_resistance(&x), w.kind) {
                (Some(r), WitnessKind::Positive) => (w.size - r).abs(),
                (None, WitnessKind::Negative) => 0.0,
                _ => f64::INFINITY,
            };
            worst = worst.max(err);
            checked += 1;
        }
    }
    Ok(CheckReport::new("st-resistance", checked, worst, 1e-6, format!("graphs={graphs}")))
}

fn side_lemmas(space: &ConversionSpace, w_minus: f64, eps_hat: f64, stats: &mut [usize; 3]) -> Result<f64> {
    let w = effective_max(w_minus);
    let cvs = space.cvs();
    let (wp_max, _) = cvs.max_witnesses();
    let rounds = (effective_max(wp_max) * w).log2().ceil().max(0.0) as i32;
    let mut worst = f64::NEG_INFINITY;
    for x in 0..cvs.len() {
        let (wp, _) = cvs.witness_sizes(x);
        let mut alphas: Vec<f64> = (0..=rounds).map(|i| 2f64.powi(i) / w).collect();
        alphas.extend([wp, 2.0 * wp].into_iter().filter(|&a| a >= 1.0 / w));
        for alpha in alphas {
            let spec = conversion_spec(eps_hat, alpha, w_minus)?;
            let theta = eps_hat.powf(1.5) / (alpha * w).sqrt();
            let eig = unitary_eigensystem(&space.unitary(x, alpha, eps_hat)?)?;

            let plus = SpectralState::new(&eig, &space.t_state(x, true))?;
            if alpha >= wp {
                worst = worst.max((1.0 - eps_hat) - plus.check_probability(&spec));
                stats[0] += 1;
            }
            let minus = SpectralState::new(&eig, &space.t_state(x, false))?;
            let low: f64 = minus
                .coefficients()
                .iter()
                .zip(eig.phases())
                .filter(|(_, th)| th.abs() <= theta)
                .map(|(c, _)| c.norm_sqr())
                .sum();
            worst = worst.max(low - eps_hat * eps_hat / 2.0);
            let leak = minus.check_probability(&spec).sqrt();
            worst = worst.max(leak - eps_hat * (1.0 + std::f64::consts::FRAC_1_SQRT_2));

            if eps_hat <= 1.0 / 9.0 {
                let start = SpectralState::new(&eig, &space.initial_state(x))?;
                let p0 = start.check_probability(&spec);
                if p0 > 0.5 - 3.0 * eps_hat {
                    let ov = start.reflection_overlaps(&[space.target_state(x)], &spec)?.overlaps[0];
                    let err = (2.0 - 2.0 * ov.re).max(0.0).sqrt();
                    worst = worst.max(err - 6.0 * eps_hat.sqrt());
                    stats[1] += 1;
                }
                if alpha >= wp {
                    worst = worst.max((0.5 - 2.5 * eps_hat) - p0);
                }
            }
            stats[2] += 1;
        }
    }
    Ok(worst)
}

/// Part 1 and part 2 of the `t±` lemma and both final-state bounds on
/// both sides of `cvs`, all from exact probabilities.
pub fn conversion_lemmas(cvs: &ConvertingVectorSet, eps_hats: &[f64]) -> Result<CheckReport> {
    let pair = ConversionPair::from_set(cvs)?;
    let mut worst = f64::NEG_INFINITY;
    let mut stats = [0usize; 3];
    for &eh in eps_hats {
        for side in [Side::Primal, Side::Dual] {
            worst = worst.max(side_lemmas(pair.space(side), pair.w_minus(side), eh, &mut stats)?);
        }
    }
    Ok(CheckReport::new(
        "conversion-lemmas",
        stats[2],
        worst,
        1e-8,
        format!("large_alpha={} breaks={}", stats[0], stats[1]),
    ))
}

/// Domain `[q]^n` with the tree's labels.
pub fn full_domain(tree: &DecisionTree) -> Result<(Vec<Vec<u8>>, Vec<usize>)> {
    let xs = all_inputs(tree.n(), tree.q());
    let labels = xs.iter().map(|x| tree.evaluate(x)).collect::<Result<Vec<_>>>()?;
    Ok((xs, labels))
}

/// Small trees used by the conversion checks: OR on 4 bits, both search
/// trees on 5 bits and `random` random trees.
pub fn sample_trees(random: usize, seed: u64) -> Result<Vec<(String, ConvertingVectorSet)>> {
    let mut out = Vec::new();
    let or = build_or_tree(4)?;
    let (xs, ls) = full_domain(&or)?;
    out.push(("or-4".to_string(), crate::apps::tree_to_cvs(&or, &xs, &ls)?));
    for mode in [SearchMode::FindBoth, SearchMode::FindFirst] {
        let st = build_search_tree(5, mode)?;
        out.push((format!("{mode}-5"), st.compile()?));
    }
    for c in 0..random as u64 {
        let mut rng = trial_rng(seed, c);
        let n = rng.gen_range(2..=4);
        let q = rng.gen_range(2..=3);
        let tree = random_tree(n, q, 3, 3, &mut rng)?;
        let (xs, ls) = full_domain(&tree)?;
        out.push((format!("random-{c}"), crate::apps::tree_to_cvs(&tree, &xs, &ls)?));
    }
    Ok(out)
}

/// Gram residual and both witness-size bounds of the tree compiler on
/// every input of `domain`.
pub fn tree_bounds(tree: &DecisionTree, domain: &[Vec<u8>], labels: &[usize]) -> Result<CheckReport> {
    let cvs = crate::apps::tree_to_cvs(tree, domain, labels)?;
    let residual = cvs.gram_residual();
    let mut worst = if residual <= 1e-9 { f64::NEG_INFINITY } else { f64::INFINITY };
    for x in domain {
        let (wp, wm) = cvs.witness_sizes_of(x)?;
        let (bp, bm) = tree.witness_bounds(x)?;
        worst = worst.max(wp - bp).max(wm - bm);
    }
    Ok(CheckReport::new("tree-bounds", domain.len(), worst, 1e-9, format!("gram_residual={residual:.1e}")))
}

/// Figure-1 tree on its domain and `random` random trees on `[q]^n`.
pub fn tree_bounds_suite(random: usize, seed: u64) -> Result<CheckReport> {
    let fig = build_search_tree(5, SearchMode::FindBoth)?;
    let (xs, ls) = fig.domain()?;
    let mut reports = vec![tree_bounds(&fig.tree, &xs, &ls)?];
    for c in 0..random as u64 {
        let mut rng = trial_rng(seed, c);
        let n = rng.gen_range(2..=5);
        let q = rng.gen_range(2..=3);
        let tree = random_tree(n, q, 4, 4, &mut rng)?;
        let (xs, ls) = full_domain(&tree)?;
        reports.push(tree_bounds(&tree, &xs, &ls)?);
    }
    let worst = reports.iter().map(|r| r.worst).fold(f64::NEG_INFINITY, f64::max);
    let cases = reports.iter().map(|r| r.cases).sum();
    Ok(CheckReport::new("tree-bounds", cases, worst, 1e-9, format!("trees={}", reports.len())))
}

/// Complement swaps witness sizes; balanced rescaling equalizes maxima.
pub fn cvs_transforms(cvs: &ConvertingVectorSet) -> Result<CheckReport> {
    let dag = cvs.complement_cvs()?;
    let bal = cvs.rescale_balanced()?;
    let mut worst: f64 = 0.0;
    for x in 0..cvs.len() {
        let (p, m) = cvs.witness_sizes(x);
        let (dp, dm) = dag.witness_sizes(x);
        worst = worst.max((p - dm).abs()).max((m - dp).abs());
        let (bp, bm) = bal.witness_sizes(x);
        worst = worst.max((bp * bm - p * m).abs() / (1.0 + p * m));
    }
    let (wp, wm) = cvs.max_witnesses();
    let (bp, bm) = bal.max_witnesses();
    worst = worst.max((bp - bm).abs() / (1.0 + bp)).max((bp * bm - wp * wm).abs() / (1.0 + wp * wm));
    Ok(CheckReport::new("cvs-transforms", cvs.len(), worst, 1e-9, String::new()))
}

/// Empirical bit marginals of the advice sampler against the exact ones,
/// as the largest z-score.
pub fn sampler_marginals(n: usize, samples: usize, seed: u64) -> Result<CheckReport> {
    let mut worst: f64 = 0.0;
    for (s, (mode, p_plus)) in [(SearchMode::FindBoth, 1.0), (SearchMode::FindFirst, 0.5)].into_iter().enumerate() {
        let d = AdviceDistribution::new(n, -1.75, p_plus, mode)?;
        let mut rng = trial_rng(seed, s as u64);
        let mut counts = vec![0usize; n + 1];
        for _ in 0..samples {
            for (i, &b) in d.sample(&mut rng).iter().enumerate() {
                counts[i + 1] += b as usize;
            }
        }
        for (i, &p) in d.bit_marginals().iter().enumerate().skip(1) {
            let sd = (p * (1.0 - p) / samples as f64).sqrt().max(1e-12);
            worst = worst.max((counts[i] as f64 / samples as f64 - p).abs() / sd);
        }
        let total: f64 = d.support().iter().map(|(_, p)| p).sum();
        if (total - 1.0).abs() > 1e-12 {
            worst = f64::INFINITY;
        }
    }
    Ok(CheckReport::new("sampler-marginals", 2 * n, worst, 5.0, format!("samples={samples}")))
}

/// Linear sums against slope `k + 2` and the boundedness of the `√i` sums.
pub fn sum_bounds(k: f64, grid: &[usize]) -> Result<CheckReport> {
    let r = verify_sum_bounds(k, grid)?;
    let slope_err = (r.dividing_linear_slope - (k + 2.0)).abs().max((r.first_linear_slope - (k + 2.0)).abs());
    let worst = if r.sqrt_sums_bounded() && r.normalizer_ok() { slope_err } else { f64::INFINITY };
    Ok(CheckReport::new(
        "sum-bounds",
        grid.len(),
        worst,
        0.15,
        format!("slopes={:.4},{:.4}", r.dividing_linear_slope, r.first_linear_slope),
    ))
}

/// Every check, with fewer cases when `quick` is set.
pub fn run_suite(quick: bool, seed: u64) -> Result<Vec<CheckReport>> {
    let scale = |full: usize, small: usize| if quick { small } else { full };
    let mut out = vec![
        witness_duality(scale(50, 10), seed)?,
        spectral_gap(scale(200, 30), seed)?,
        phase_check_sandwich(scale(100, 20), seed)?,
        circuit_agreement(scale(24, 6), seed)?,
        one_test_bounds(scale(8, 4))?,
        st_resistance(scale(50, 10), 7, seed)?,
        tree_bounds_suite(scale(20, 4), seed)?,
        sampler_marginals(8, scale(200_000, 20_000), seed)?,
        sum_bounds(-1.75, &[64, 256, 1024, 4096, 16384, 65536])?,
    ];
    let eps_hats = [0.25 / 36.0, 0.05];
    for (name, cvs) in sample_trees(scale(3, 1), seed)? {
        let mut r = conversion_lemmas(&cvs, &eps_hats)?;
        r.note = format!("{name} {}", r.note);
        out.push(r);
        let mut t = cvs_transforms(&cvs)?;
        t.note = name;
        out.push(t);
    }
    Ok(out)
}
