use qconv::apps::{build_search_tree, classical_baseline_queries, SearchMode};
use qconv::convert::ConversionSpace;
use qconv::harness::record::{TRIAL_COLUMNS, SEPARATION_COLUMNS};
use qconv::harness::{
    estimated_space_dim, run_experiment, ExperimentConfig, ExperimentKind, ExperimentOutput, Summary, CSV_VERSION,
};
use qconv::spanprog::parse_input;
use qconv::Error;

fn cfg(kind: ExperimentKind) -> ExperimentConfig {
    ExperimentConfig { kind, n: Some(4), trials: 40, seed: 3, ..ExperimentConfig::default() }
}

fn table(out: &ExperimentOutput) -> &qconv::harness::TrialTable {
    match out {
        ExperimentOutput::Trials(t) => t,
        ExperimentOutput::Checks(_) => panic!("expected a trial table"),
    }
}

fn rows(csv: &str) -> Vec<csv::StringRecord> {
    let body: String = csv.lines().skip(1).map(|l| format!("{l}\n")).collect();
    csv::Reader::from_reader(body.as_bytes()).records().map(Result::unwrap).collect()
}

#[test]
fn config_json_round_trip() {
    let mut c = cfg(ExperimentKind::AdviceSeparation);
    c.grid = vec![4, 6];
    c.mode = SearchMode::FindFirst;
    c.workers = Some(2);
    let back = ExperimentConfig::from_json(&c.to_json()).unwrap();
    assert_eq!(back, c);
    let partial = ExperimentConfig::from_json(r#"{"kind": "verify-search", "n": 6, "delta": 0.25}"#).unwrap();
    assert_eq!(partial.kind, ExperimentKind::VerifySearch);
    assert_eq!(partial.trials, 100);
    assert_eq!(partial.max_dim, 1500);
}

#[test]
fn config_rejects_bad_values() {
    assert!(ExperimentConfig::from_json(r#"{"kind": "decide", "trails": 3}"#).is_err());
    assert!(ExperimentConfig::from_json(r#"{"kind": "bogus"}"#).is_err());
    for bad in [
        ExperimentConfig { trials: 0, ..cfg(ExperimentKind::Decide) },
        ExperimentConfig { delta: 1.0, ..cfg(ExperimentKind::Decide) },
        ExperimentConfig { epsilon: 0.0, ..cfg(ExperimentKind::Convert) },
        ExperimentConfig { workers: Some(0), ..cfg(ExperimentKind::Decide) },
        ExperimentConfig { span: Some("a".into()), tree: Some("b".into()), ..cfg(ExperimentKind::Decide) },
    ] {
        assert!(bad.validate().unwrap_err().is_validation());
    }
    assert_eq!("advice-separation".parse::<ExperimentKind>().unwrap(), ExperimentKind::AdviceSeparation);
    assert!("separation".parse::<ExperimentKind>().is_err());
}

#[test]
fn missing_size_is_a_validation_error() {
    let c = ExperimentConfig { n: None, ..cfg(ExperimentKind::Decide) };
    assert!(run_experiment(&c).unwrap_err().is_validation());
}

#[test]
fn csv_layout_and_summary() {
    let out = run_experiment(&cfg(ExperimentKind::Decide)).unwrap();
    let csv = out.to_csv().unwrap();
    let head = csv.lines().next().unwrap();
    assert!(head.starts_with(&format!("# qconv-csv {CSV_VERSION} kind=decide seed=3 problem=or-4")));
    assert_eq!(csv.lines().nth(1).unwrap(), TRIAL_COLUMNS.join(","));
    let rows = rows(&csv);
    assert_eq!(rows.len(), 40);
    let t = table(&out);
    let column_total: u128 = rows.iter().map(|r| r[5].parse::<u128>().unwrap()).sum();
    let s = Summary::of(&t.records);
    assert_eq!(s.total_queries, column_total);
    assert!(out.summary_block().contains(&format!("total_queries={column_total}")));
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(&r[0], i.to_string());
        assert_eq!(&r[1], "3");
        assert_eq!(&r[7], "0.000");
        let x = parse_input(&r[2]).unwrap();
        let truth = if x.contains(&1) { "1" } else { "0" };
        assert_eq!(&r[4], if &r[3] == truth { "1" } else { "0" });
    }
}

#[test]
fn worker_count_does_not_change_output() {
    for kind in [ExperimentKind::Decide, ExperimentKind::Convert] {
        let one = run_experiment(&ExperimentConfig { workers: Some(1), trials: 12, ..cfg(kind) }).unwrap();
        let four = run_experiment(&ExperimentConfig { workers: Some(4), trials: 12, ..cfg(kind) }).unwrap();
        assert_eq!(one.to_csv().unwrap(), four.to_csv().unwrap());
        assert_eq!(one.summary_block(), four.summary_block());
    }
}

#[test]
fn fixed_input_is_used_for_every_trial() {
    let c = ExperimentConfig { input: Some("0010".into()), trials: 10, ..cfg(ExperimentKind::Decide) };
    let out = run_experiment(&c).unwrap();
    assert!(table(&out).records.iter().all(|r| r.input == "0010"));
    let wrong = ExperimentConfig { input: Some("00100".into()), ..c };
    assert!(run_experiment(&wrong).is_err());
}

#[test]
fn timing_fills_the_wall_clock_column() {
    let c = ExperimentConfig { timing: true, trials: 5, ..cfg(ExperimentKind::Decide) };
    let out = run_experiment(&c).unwrap();
    assert!(table(&out).records.iter().any(|r| r.wall_ms > 0.0));
}

#[test]
fn separation_rows_carry_classical_costs() {
    let c = ExperimentConfig {
        grid: vec![4, 5],
        delta: 0.25,
        trials: 10,
        n: None,
        ..cfg(ExperimentKind::AdviceSeparation)
    };
    let out = run_experiment(&c).unwrap();
    let csv = out.to_csv().unwrap();
    let mut cols: Vec<&str> = TRIAL_COLUMNS.to_vec();
    cols.extend(SEPARATION_COLUMNS);
    assert_eq!(csv.lines().nth(1).unwrap(), cols.join(","));
    let t = table(&out);
    assert_eq!(t.records.len(), 20);
    assert_eq!(t.groups.len(), 2);
    for r in &t.records {
        let s = r.separation.unwrap();
        let x = parse_input(&r.input).unwrap();
        assert_eq!(x.len(), s.n);
        assert_eq!(s.classical_queries, classical_baseline_queries(&x, SearchMode::FindBoth).unwrap());
    }
    for g in &t.groups {
        let mine: Vec<_> = t.records.iter().filter(|r| r.separation.unwrap().n == g.n).collect();
        assert_eq!(mine.len(), g.trials);
        let mean = mine.iter().map(|r| r.queries as f64).sum::<f64>() / g.trials as f64;
        assert!((mean - g.quantum_mean).abs() <= 1e-9 * mean);
    }
}

#[test]
fn oversized_search_is_a_budget_error() {
    let c = ExperimentConfig { n: Some(64), trials: 1, ..cfg(ExperimentKind::VerifySearch) };
    let err = run_experiment(&c).unwrap_err();
    assert!(matches!(err, Error::Budget(_)), "{err}");
    assert!(!err.is_validation());
    let grid = ExperimentConfig { grid: vec![4, 256], n: None, ..cfg(ExperimentKind::AdviceSeparation) };
    assert!(matches!(run_experiment(&grid).unwrap_err(), Error::Budget(_)));
}

#[test]
fn verify_search_needs_find_both() {
    let c = ExperimentConfig { mode: SearchMode::FindFirst, ..cfg(ExperimentKind::VerifySearch) };
    assert!(run_experiment(&c).unwrap_err().is_validation());
}

#[test]
fn space_estimate_matches_the_built_space() {
    for (n, mode) in [(4, SearchMode::FindBoth), (5, SearchMode::FindBoth), (6, SearchMode::FindFirst)] {
        let st = build_search_tree(n, mode).unwrap();
        let (xs, ls) = st.domain().unwrap();
        let est = estimated_space_dim(&st.tree, &xs, &ls).unwrap();
        let space = ConversionSpace::new(&st.compile().unwrap()).unwrap();
        assert!(space.dim() <= est);
        assert_eq!(space.dim(), est, "n={n} {mode}");
    }
}

#[test]
fn quick_invariant_suite_passes() {
    let c = ExperimentConfig { trials: 10, ..cfg(ExperimentKind::Invariants) };
    let out = run_experiment(&c).unwrap();
    assert!(out.all_passed(), "{}", out.to_csv().unwrap());
    assert!(out.to_csv().unwrap().lines().nth(1).unwrap().starts_with("check,cases,worst"));
}
