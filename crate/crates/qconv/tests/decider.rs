use qconv::apps::{build_or_program, build_st_connectivity, four_cycle};
use qconv::decider::{average_queries, decision_rounds, repetitions, Decider, DecisionConfig};
use qconv::phasesim::Stage;
use qconv::random::trial_rng;
use qconv::spanprog::{all_inputs, complement, max_witnesses, SpanProgram};

fn or_pair(n: usize) -> (SpanProgram, SpanProgram, f64, f64) {
    let p = build_or_program(n).unwrap();
    let d = complement(&p).unwrap();
    let xs = all_inputs(n, 2);
    let labels: Vec<bool> = xs.iter().map(|x| x.contains(&1)).collect();
    let (wp, wm) = max_witnesses(&p, &xs, &labels).unwrap();
    (p, d, wp, wm)
}

fn marked(n: usize, m: usize) -> Vec<u8> {
    (0..n).map(|i| (i < m) as u8).collect()
}

#[test]
fn schedule_sizes() {
    let (_, _, wp, wm) = or_pair(8);
    assert!((wp - 1.0).abs() < 1e-9 && (wm - 8.0).abs() < 1e-9);
    assert_eq!(decision_rounds(wp, wm), 3);
    assert_eq!(decision_rounds(1.0, 1.0), 1);
    assert_eq!(repetitions(3, 0, 0.1), 162);
    assert_eq!(repetitions(3, 3, 0.1), 108);
    assert_eq!(repetitions(0, 0, 0.75), 54);
}

#[test]
fn rejects_bad_configuration() {
    let (p, d, wp, wm) = or_pair(3);
    assert!(DecisionConfig::new(0.0).is_err());
    assert!(DecisionConfig::new(1.0).is_err());
    let cfg = DecisionConfig::new(0.1).unwrap();
    assert!(Decider::new(&p, &d, 0.0, wm, &cfg).is_err());
    assert!(Decider::new(&p, &d, wp, f64::INFINITY, &cfg).is_err());
    let other = build_or_program(4).unwrap();
    assert!(Decider::new(&p, &other, wp, wm, &cfg).is_err());
}

#[test]
fn program_is_not_its_own_complement() {
    let (p, _, wp, wm) = or_pair(3);
    let cfg = DecisionConfig::new(0.1).unwrap();
    let dec = Decider::new(&p, &p, wp, wm, &cfg).unwrap();
    assert!(dec.prepare(&[1, 0, 0]).err().unwrap().is_validation());
}

#[test]
fn exact_answer_probabilities() {
    let (p, d, wp, wm) = or_pair(4);
    let delta = 0.1;
    let dec = Decider::new(&p, &d, wp, wm, &DecisionConfig::new(delta).unwrap()).unwrap();
    for x in all_inputs(4, 2) {
        let e = dec.prepare(&x).unwrap().exact().unwrap();
        assert!((e.prob_one + e.prob_zero - 1.0).abs() < 1e-12);
        let right = if x.contains(&1) { e.prob_one } else { e.prob_zero };
        assert!(right >= 1.0 - delta, "{x:?}: {right}");
        let stopped: f64 = e.stops.iter().map(|s| s.2).sum();
        assert!(stopped <= 1.0 + 1e-12);
    }
}

#[test]
fn tests_alternate_in_loop_order() {
    let (p, d, wp, wm) = or_pair(4);
    let dec = Decider::new(&p, &d, wp, wm, &DecisionConfig::new(0.2).unwrap()).unwrap();
    let probs = dec.prepare(&[0, 1, 0, 0]).unwrap().acceptance_probabilities().unwrap();
    assert_eq!(probs.len(), 2 * (decision_rounds(wp, wm) + 1));
    for (k, t) in probs.iter().enumerate() {
        assert_eq!(t.round, k / 2);
        assert_eq!(t.stage, if k % 2 == 0 { Stage::OneTest } else { Stage::ZeroTest });
        assert!((0.0..=1.0 + 1e-12).contains(&t.p_zero));
    }
}

#[test]
fn ledger_matches_transcript() {
    let (p, d, wp, wm) = or_pair(4);
    let dec = Decider::new(&p, &d, wp, wm, &DecisionConfig::new(0.2).unwrap()).unwrap();
    let inst = dec.prepare(&[0, 0, 1, 1]).unwrap();
    for t in 0..10 {
        let r = inst.run(&mut trial_rng(11, t)).unwrap();
        let one: u64 = r.ledger.stage_total(Stage::OneTest);
        let zero: u64 = r.ledger.stage_total(Stage::ZeroTest);
        assert_eq!(one + zero, r.ledger.total());
        assert_eq!(r.transcript.last().unwrap().round, r.round_stopped);
        let last = r.transcript.last().unwrap();
        assert!(r.exhausted || last.zeros >= last.samples.div_ceil(2));
    }
}

#[test]
fn sampled_cost_matches_exact_expectation() {
    let (p, d, wp, wm) = or_pair(4);
    let cfg = DecisionConfig::new(0.2).unwrap();
    let x = [0, 1, 0, 0];
    let (mean, sd, runs) = average_queries(&p, &d, wp, wm, &x, &cfg, 400, 12).unwrap();
    let exact = Decider::new(&p, &d, wp, wm, &cfg).unwrap().prepare(&x).unwrap().exact().unwrap();
    assert!((mean - exact.expected_queries).abs() <= 5.0 * sd / 20.0 + 1e-9, "{mean} vs {}", exact.expected_queries);
    assert_eq!(runs.len(), 400);
}

#[test]
fn same_seed_same_run() {
    let (p, d, wp, wm) = or_pair(4);
    let cfg = DecisionConfig::new(0.3).unwrap();
    let a = average_queries(&p, &d, wp, wm, &[1, 0, 0, 0], &cfg, 20, 5).unwrap().2;
    let b = average_queries(&p, &d, wp, wm, &[1, 0, 0, 0], &cfg, 20, 5).unwrap().2;
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.ledger, y.ledger);
        assert_eq!(x.answer, y.answer);
    }
}

#[test]
fn more_marked_bits_cost_less() {
    let (p, d, wp, wm) = or_pair(8);
    let dec = Decider::new(&p, &d, wp, wm, &DecisionConfig::new(0.1).unwrap()).unwrap();
    let one = dec.prepare(&marked(8, 1)).unwrap().exact().unwrap().expected_queries;
    let four = dec.prepare(&marked(8, 4)).unwrap().exact().unwrap().expected_queries;
    assert!(four < one, "{four} vs {one}");
}

#[test]
fn truncated_loop_defaults_to_one() {
    let (p, d, wp, wm) = or_pair(4);
    let cfg = DecisionConfig { delta: 0.2, max_round_override: Some(0) };
    let dec = Decider::new(&p, &d, wp, wm, &cfg).unwrap();
    let e = dec.prepare(&[0, 0, 0, 0]).unwrap().exact().unwrap();
    assert_eq!(e.stops.len(), 2);
    let exhausted = 1.0 - e.stops.iter().map(|s| s.2).sum::<f64>();
    let one_stops: f64 = e.stops.iter().filter(|s| s.1 == Stage::OneTest).map(|s| s.2).sum();
    assert!((e.prob_one - one_stops - exhausted).abs() < 1e-12);
}

#[test]
fn four_cycle_connectivity() {
    let g = four_cycle();
    let p = build_st_connectivity(&g).unwrap();
    let d = complement(&p).unwrap();
    let xs = all_inputs(g.n_edges(), 2);
    let labels: Vec<bool> = xs.iter().map(|x| g.connected(x)).collect();
    let (wp, wm) = max_witnesses(&p, &xs, &labels).unwrap();
    let dec = Decider::new(&p, &d, wp, wm, &DecisionConfig::new(0.1).unwrap()).unwrap();
    for (x, &want) in xs.iter().zip(&labels) {
        let e = dec.prepare(x).unwrap().exact().unwrap();
        let right = if want { e.prob_one } else { e.prob_zero };
        assert!(right >= 0.9, "{x:?}: {right}");
    }
}
