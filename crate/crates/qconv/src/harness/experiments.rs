use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use rayon::ThreadPool;

use super::config::{ExperimentConfig, ExperimentKind};
use super::invariants::run_suite;
use super::record::{ExperimentOutput, GroupSummary, SeparationColumns, TrialRecord, TrialTable};
use super::worker_pool;
use crate::apps::{
    build_or_program, build_or_tree, build_search_tree, build_st_connectivity, classical_baseline_queries,
    tree_readout, tree_to_cvs, AdviceDistribution, DecisionTree, Graph, PositionVerifier, SearchMode, SearchTree,
};
use crate::convert::{ConversionPair, StateConversion, VerifiedEvaluation, Verifier};
use crate::decider::{mean_std, DecisionConfig, Decider};
use crate::error::{Error, Result};
use crate::random::trial_rng;
use crate::spanprog::{all_inputs, complement, evaluate, format_input, max_witnesses, parse_input, SpanProgram};

/// Largest domain enumerated to compute `W₊` and `W₋`.
pub const MAX_DOMAIN: usize = 1 << 14;

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn domain_of(n: usize, q: usize) -> Result<Vec<Vec<u8>>> {
    let size = (q as f64).powi(n as i32);
    if size > MAX_DOMAIN as f64 {
        return Err(Error::Budget(format!("domain [{q}]^{n} has more than {MAX_DOMAIN} inputs")));
    }
    Ok(all_inputs(n, q))
}

fn need_n(cfg: &ExperimentConfig) -> Result<usize> {
    cfg.n.ok_or_else(|| Error::Validation(format!("{} needs n or an input file", cfg.kind.name())))
}

fn timed<T>(timing: bool, f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let out = f()?;
    let ms = if timing { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
    Ok((out, ms))
}

/// Fixed input or a uniform draw from `domain`, with the trial's stream.
fn pick_input(cfg: &ExperimentConfig, domain: &[Vec<u8>], trial: usize) -> Result<(Vec<u8>, rand_chacha::ChaCha20Rng)> {
    let mut rng = trial_rng(cfg.seed, trial as u64);
    let x = match &cfg.input {
        Some(s) => parse_input(s)?,
        None => domain.choose(&mut rng).expect("non-empty domain").clone(),
    };
    Ok((x, rng))
}

fn run_trials(
    pool: &ThreadPool,
    trials: usize,
    f: impl Fn(usize) -> Result<TrialRecord> + Sync + Send,
) -> Result<Vec<TrialRecord>> {
    pool.install(|| (0..trials).into_par_iter().map(f).collect())
}

/// Runs the configured experiment.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let pool = worker_pool(cfg.workers)?;
    match cfg.kind {
        ExperimentKind::Decide => decide(cfg, &pool),
        ExperimentKind::Convert => convert(cfg, &pool),
        ExperimentKind::VerifySearch => verify_search(cfg, &pool),
        ExperimentKind::AdviceSeparation => advice_separation(cfg, &pool),
        ExperimentKind::Invariants => Ok(ExperimentOutput::Checks(pool.install(|| run_suite(cfg.trials < 100, cfg.seed))?)),
    }
}

fn load_program(cfg: &ExperimentConfig) -> Result<(SpanProgram, String)> {
    if let Some(path) = &cfg.span {
        return Ok((SpanProgram::from_json(&read(path)?)?, "span".into()));
    }
    if let Some(path) = &cfg.graph {
        let g = Graph::parse(&read(path)?)?;
        return Ok((build_st_connectivity(&g)?, "st-connectivity".into()));
    }
    let n = need_n(cfg)?;
    Ok((build_or_program(n)?, format!("or-{n}")))
}

fn decide(cfg: &ExperimentConfig, pool: &ThreadPool) -> Result<ExperimentOutput> {
    let (p, name) = load_program(cfg)?;
    let pdag = complement(&p)?;
    let domain = domain_of(p.n(), p.q())?;
    let labels = pool.install(|| domain.par_iter().map(|x| evaluate(&p, x)).collect::<Result<Vec<_>>>())?;
    let (wp, wm) = max_witnesses(&p, &domain, &labels)?;
    let decider = Decider::new(&p, &pdag, wp, wm, &DecisionConfig::new(cfg.delta)?)?;
    let picks = (0..cfg.trials).map(|t| pick_input(cfg, &domain, t)).collect::<Result<Vec<_>>>()?;
    let distinct: BTreeSet<&Vec<u8>> = picks.iter().map(|(x, _)| x).collect();
    let instances = distinct
        .into_iter()
        .map(|x| Ok((x.clone(), (decider.prepare(x)?, evaluate(&p, x)?))))
        .collect::<Result<BTreeMap<_, _>>>()?;
    let records = run_trials(pool, cfg.trials, |t| {
        let (x, rng) = &picks[t];
        let (inst, truth) = &instances[x];
        let (res, ms) = timed(cfg.timing, || inst.run(&mut rng.clone()))?;
        Ok(TrialRecord {
            trial: t,
            seed: cfg.seed,
            input: format_input(x),
            answer: (res.answer as u8).to_string(),
            correct: res.answer == *truth,
            queries: res.ledger.total(),
            rounds: res.round_stopped,
            wall_ms: ms,
            separation: None,
        })
    })?;
    let meta = vec![
        ("problem".into(), name),
        ("delta".into(), cfg.delta.to_string()),
        ("w_plus".into(), format!("{wp:.6}")),
        ("w_minus".into(), format!("{wm:.6}")),
    ];
    Ok(ExperimentOutput::Trials(TrialTable { kind: cfg.kind, seed: cfg.seed, records, groups: vec![], meta }))
}

fn load_tree(cfg: &ExperimentConfig) -> Result<(DecisionTree, String)> {
    if let Some(path) = &cfg.tree {
        return Ok((DecisionTree::from_json(&read(path)?)?, "tree".into()));
    }
    let n = need_n(cfg)?;
    Ok((build_or_tree(n)?, format!("or-tree-{n}")))
}

fn convert(cfg: &ExperimentConfig, pool: &ThreadPool) -> Result<ExperimentOutput> {
    let (tree, name) = load_tree(cfg)?;
    let domain = domain_of(tree.n(), tree.q())?;
    let labels = domain.iter().map(|x| tree.evaluate(x)).collect::<Result<Vec<_>>>()?;
    let cvs = tree_to_cvs(&tree, &domain, &labels)?;
    let (wp, wm) = cvs.max_witnesses();
    let alg = StateConversion::new(ConversionPair::from_set(&cvs)?, cfg.epsilon, cfg.delta)?;
    let records = run_trials(pool, cfg.trials, |t| {
        let (x, mut rng) = pick_input(cfg, &domain, t)?;
        let (res, ms) = timed(cfg.timing, || alg.run(&x, &mut rng))?;
        Ok(TrialRecord {
            trial: t,
            seed: cfg.seed,
            input: format_input(&x),
            answer: tree.evaluate(&x)?.to_string(),
            correct: res.error <= cfg.epsilon,
            queries: res.ledger.total(),
            rounds: res.round,
            wall_ms: ms,
            separation: None,
        })
    })?;
    let meta = vec![
        ("problem".into(), name),
        ("epsilon".into(), cfg.epsilon.to_string()),
        ("delta".into(), cfg.delta.to_string()),
        ("w_plus".into(), format!("{wp:.6}")),
        ("w_minus".into(), format!("{wm:.6}")),
    ];
    Ok(ExperimentOutput::Trials(TrialTable { kind: cfg.kind, seed: cfg.seed, records, groups: vec![], meta }))
}

/// Upper bound on the compressed conversion-space dimension of a compiled
/// tree: the state summand twice plus `q` copies of one coordinate per
/// distinct `(edge, label)` pair reaching each index.
pub fn estimated_space_dim(tree: &DecisionTree, domain: &[Vec<u8>], labels: &[usize]) -> Result<usize> {
    let mut per_index: Vec<BTreeSet<(usize, usize)>> = vec![BTreeSet::new(); tree.n()];
    for (x, &l) in domain.iter().zip(labels) {
        for k in tree.path(x)? {
            let j = tree.vertices()[tree.edges()[k].from].query.expect("internal");
            per_index[j].insert((k, l));
        }
    }
    let coords: usize = per_index.iter().map(BTreeSet::len).sum();
    Ok(2 * (tree.m() + 1) + tree.q() * coords)
}

/// Dimension estimate of the search tree on `n` bits without building its
/// domain when the domain alone would exceed the budget.
fn search_dim(n: usize, mode: SearchMode, max_dim: usize) -> Result<(SearchTree, usize)> {
    // The domain has about n²/2 inputs; past this size the estimate is
    // certainly over any practical budget.
    if n * n / 2 > 64 * max_dim.max(1) {
        return Err(Error::Budget(format!("search on {n} bits is far beyond the {max_dim}-dimensional budget")));
    }
    let st = build_search_tree(n, mode)?;
    let (xs, ls) = st.domain()?;
    let dim = estimated_space_dim(&st.tree, &xs, &ls)?;
    if dim > max_dim {
        return Err(Error::Budget(format!(
            "search on {n} bits needs a conversion space of about {dim} dimensions (budget {max_dim})"
        )));
    }
    Ok((st, dim))
}

/// `√(G |path(x)| log₂ n)`.
fn reference_bound(tree: &DecisionTree, x: &[u8]) -> Result<f64> {
    let g = tree.max_red().max(1) as f64;
    let len = tree.path(x)?.len() as f64;
    Ok((g * len * (tree.n() as f64).log2().max(1.0)).sqrt())
}

fn positions(st: &SearchTree, label: Option<usize>) -> String {
    match label.and_then(|l| st.outputs.get(l)) {
        Some(p) if !p.is_empty() => p.iter().map(usize::to_string).collect::<Vec<_>>().join("+"),
        _ => "none".into(),
    }
}

/// Quantum runner for one search size: Algorithm 3 for find-both,
/// Algorithm 2 for find-first.
enum SearchRunner {
    Verified(VerifiedEvaluation, PositionVerifier),
    Converted(StateConversion),
}

impl SearchRunner {
    fn new(cfg: &ExperimentConfig, st: &SearchTree) -> Result<Self> {
        let pair = ConversionPair::from_set(&st.compile()?)?;
        Ok(match st.mode {
            SearchMode::FindBoth => SearchRunner::Verified(
                VerifiedEvaluation::new(pair, tree_readout(st.tree.m()), cfg.delta)?,
                PositionVerifier::new(st),
            ),
            SearchMode::FindFirst => SearchRunner::Converted(StateConversion::new(pair, cfg.epsilon, cfg.delta)?),
        })
    }

    /// `(answer, correct, queries, round)` for one run.
    fn run(&self, st: &SearchTree, x: &[u8], rng: &mut rand_chacha::ChaCha20Rng, eps: f64) -> Result<(String, bool, u64, usize)> {
        let truth = st.tree.evaluate(x)?;
        match self {
            SearchRunner::Verified(alg, verifier) => {
                let out = alg.run(x, verifier as &dyn Verifier, rng)?;
                Ok((positions(st, out.answer), out.answer == Some(truth), out.ledger.total(), out.round))
            }
            SearchRunner::Converted(alg) => {
                let out = alg.run(x, rng)?;
                Ok((positions(st, Some(truth)), out.error <= eps, out.ledger.total(), out.round))
            }
        }
    }
}

fn verify_search(cfg: &ExperimentConfig, pool: &ThreadPool) -> Result<ExperimentOutput> {
    if cfg.mode != SearchMode::FindBoth {
        return Err(Error::Validation("verify-search needs find-both; find-first outputs are not checkable with constant queries".into()));
    }
    let n = need_n(cfg)?;
    let (st, dim) = search_dim(n, cfg.mode, cfg.max_dim)?;
    let dist = AdviceDistribution::new(n, cfg.k, cfg.p_plus, cfg.mode)?;
    let runner = SearchRunner::new(cfg, &st)?;
    let records = run_trials(pool, cfg.trials, |t| {
        let mut rng = trial_rng(cfg.seed, t as u64);
        let x = match &cfg.input {
            Some(s) => parse_input(s)?,
            None => dist.sample(&mut rng),
        };
        let ((answer, correct, queries, rounds), ms) = timed(cfg.timing, || runner.run(&st, &x, &mut rng, cfg.epsilon))?;
        Ok(TrialRecord { trial: t, seed: cfg.seed, input: format_input(&x), answer, correct, queries, rounds, wall_ms: ms, separation: None })
    })?;
    let meta = vec![
        ("n".into(), n.to_string()),
        ("k".into(), cfg.k.to_string()),
        ("delta".into(), cfg.delta.to_string()),
        ("space_dim".into(), dim.to_string()),
    ];
    Ok(ExperimentOutput::Trials(TrialTable { kind: cfg.kind, seed: cfg.seed, records, groups: vec![], meta }))
}

fn advice_separation(cfg: &ExperimentConfig, pool: &ThreadPool) -> Result<ExperimentOutput> {
    let grid: Vec<usize> = if cfg.grid.is_empty() { vec![need_n(cfg)?] } else { cfg.grid.clone() };
    // Fail before any work when a size is out of budget.
    let trees = grid.iter().map(|&n| search_dim(n, cfg.mode, cfg.max_dim)).collect::<Result<Vec<_>>>()?;
    let mut records = Vec::with_capacity(grid.len() * cfg.trials);
    let mut groups = Vec::with_capacity(grid.len());
    for (g, (&n, (st, dim))) in grid.iter().zip(&trees).enumerate() {
        let dist = AdviceDistribution::new(n, cfg.k, cfg.p_plus, cfg.mode)?;
        let runner = SearchRunner::new(cfg, st)?;
        let base = g * cfg.trials;
        let rows = run_trials(pool, cfg.trials, |t| {
            let mut rng = trial_rng(cfg.seed, (base + t) as u64);
            let x = dist.sample(&mut rng);
            let ((answer, correct, queries, rounds), ms) =
                timed(cfg.timing, || runner.run(st, &x, &mut rng, cfg.epsilon))?;
            Ok(TrialRecord {
                trial: base + t,
                seed: cfg.seed,
                input: format_input(&x),
                answer,
                correct,
                queries,
                rounds,
                wall_ms: ms,
                separation: Some(SeparationColumns {
                    n,
                    classical_queries: classical_baseline_queries(&x, cfg.mode)?,
                    quantum_bound: reference_bound(&st.tree, &x)?,
                }),
            })
        })?;
        let (quantum_mean, quantum_sd) = mean_std(rows.iter().map(|r| r.queries as f64));
        let classical_mean = rows.iter().map(|r| r.separation.map_or(0.0, |s| s.classical_queries as f64)).sum::<f64>()
            / rows.len() as f64;
        let quantum_bound = dist
            .support()
            .iter()
            .map(|(x, p)| Ok(p * reference_bound(&st.tree, x)?))
            .sum::<Result<f64>>()?;
        groups.push(GroupSummary {
            n,
            trials: rows.len(),
            classical_average: dist.classical_average(),
            classical_mean,
            quantum_mean,
            quantum_sd,
            quantum_bound,
            error_rate: rows.iter().filter(|r| !r.correct).count() as f64 / rows.len() as f64,
            space_dim: *dim,
        });
        records.extend(rows);
    }
    let meta = vec![
        ("mode".into(), cfg.mode.to_string()),
        ("k".into(), cfg.k.to_string()),
        ("p_plus".into(), cfg.p_plus.to_string()),
        ("epsilon".into(), cfg.epsilon.to_string()),
        ("delta".into(), cfg.delta.to_string()),
    ];
    Ok(ExperimentOutput::Trials(TrialTable { kind: cfg.kind, seed: cfg.seed, records, groups, meta }))
}
