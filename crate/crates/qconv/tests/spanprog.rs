use proptest::prelude::*;
use qconv::apps::graph::{build_st_connectivity, Graph};
use qconv::apps::build_or_program;
use qconv::numerics::{basis_vector, c64, max_abs, unitarity_defect, unitary_eigensystem, CVector};
use qconv::random::{random_span_program, trial_rng};
use qconv::spanprog::{
    algorithm_unitary, all_inputs, complement, evaluate, max_witnesses, negative_witness,
    parse_input, positive_witness, witness, ExtendedProgram, SpanProgram, WitnessKind,
};

fn bits(s: &str) -> Vec<u8> {
    parse_input(s).unwrap()
}

#[test]
fn or_positive_witnesses() {
    let p = build_or_program(4).unwrap();
    let r = positive_witness(&p, &bits("1111")).unwrap();
    assert_eq!(r.kind, WitnessKind::Positive);
    assert!((r.size - 0.25).abs() < 1e-12);
    assert!((positive_witness(&p, &bits("1000")).unwrap().size - 1.0).abs() < 1e-12);
    assert_eq!(positive_witness(&p, &bits("0000")).unwrap().kind, WitnessKind::None);
}

#[test]
fn or_negative_witnesses() {
    let p = build_or_program(4).unwrap();
    let r = negative_witness(&p, &bits("0000")).unwrap();
    assert_eq!(r.kind, WitnessKind::Negative);
    assert!((r.size - 4.0).abs() < 1e-12);
    assert!((r.witness[0] - c64(1.0, 0.0)).norm() < 1e-12);
    assert_eq!(negative_witness(&p, &bits("0100")).unwrap().kind, WitnessKind::None);
}

#[test]
fn or_weight_scaling() {
    for n in 1..=8 {
        let p = build_or_program(n).unwrap();
        for x in all_inputs(n, 2) {
            let m = x.iter().filter(|&&b| b == 1).count();
            let r = witness(&p, &x).unwrap();
            if m == 0 {
                assert!((r.size - n as f64).abs() < 1e-9);
            } else {
                assert!((r.size - 1.0 / m as f64).abs() < 1e-9);
            }
        }
        let domain = all_inputs(n, 2);
        let labels: Vec<bool> = domain.iter().map(|x| x.contains(&1)).collect();
        let (wp, wm) = max_witnesses(&p, &domain, &labels).unwrap();
        assert!((wp - 1.0).abs() < 1e-9 && (wm - n as f64).abs() < 1e-9);
    }
}

#[test]
fn single_edge_cut_has_unit_negative_witness() {
    let g = Graph::new(2, vec![(0, 1)], 0, 1).unwrap();
    let p = build_st_connectivity(&g).unwrap();
    let r = negative_witness(&p, &[0]).unwrap();
    assert_eq!(r.kind, WitnessKind::Negative);
    assert!((r.size - 1.0).abs() < 1e-12);
}

#[test]
fn path_graph_maxima() {
    let g = Graph::new(3, vec![(0, 1), (1, 2)], 0, 2).unwrap();
    let p = build_st_connectivity(&g).unwrap();
    let domain = all_inputs(2, 2);
    let labels: Vec<bool> = domain.iter().map(|x| g.connected(x)).collect();
    let (wp, wm) = max_witnesses(&p, &domain, &labels).unwrap();
    assert!((wp - 2.0).abs() < 1e-9);
    assert!((wm - 1.0).abs() < 1e-9);
}

#[test]
fn parallel_edges_halve_resistance() {
    let g = Graph::new(2, vec![(0, 1), (0, 1)], 0, 1).unwrap();
    let p = build_st_connectivity(&g).unwrap();
    assert!((positive_witness(&p, &[1, 1]).unwrap().size - 0.5).abs() < 1e-12);
}

#[test]
fn wrong_labels_are_rejected() {
    let p = build_or_program(2).unwrap();
    let domain = all_inputs(2, 2);
    let labels = vec![true; 4];
    assert!(max_witnesses(&p, &domain, &labels).is_err());
}

#[test]
fn complement_exchanges_or_witnesses() {
    let p = build_or_program(4).unwrap();
    let c = complement(&p).unwrap();
    let x = bits("1100");
    assert!((positive_witness(&p, &x).unwrap().size - 0.5).abs() < 1e-9);
    assert!((negative_witness(&c, &x).unwrap().size - 0.5).abs() < 1e-9);
    let z = bits("0000");
    assert!((positive_witness(&c, &z).unwrap().size - 4.0).abs() < 1e-9);
    let cc = complement(&c).unwrap();
    for x in all_inputs(4, 2) {
        let (a, b) = (witness(&p, &x).unwrap(), witness(&cc, &x).unwrap());
        assert_eq!(a.kind, b.kind);
        assert!((a.size - b.size).abs() < 1e-8);
    }
}

#[test]
fn complement_requires_reachable_target() {
    let mut p: serde_json::Value = serde_json::from_str(&build_or_program(2).unwrap().to_json()).unwrap();
    p["a"] = serde_json::json!([[[0.0, 0.0], [0.0, 0.0]]]);
    let p = SpanProgram::from_json(&p.to_string()).unwrap();
    assert!(complement(&p).is_err());
}

#[test]
fn json_round_trip() {
    let mut rng = trial_rng(3, 0);
    let p = random_span_program(3, 3, 1, 2, &mut rng).unwrap();
    let q = SpanProgram::from_json(&p.to_json()).unwrap();
    for x in all_inputs(3, 3) {
        let (a, b) = (witness(&p, &x).unwrap(), witness(&q, &x).unwrap());
        assert_eq!(a.kind, b.kind);
        assert!((a.size - b.size).abs() < 1e-9 * (1.0 + a.size));
    }
    assert!(SpanProgram::from_json("{\"n\": 1}").unwrap_err().is_validation());
}

#[test]
fn or_two_bit_unitary() {
    let p = build_or_program(2).unwrap();
    let e = ExtendedProgram::new(&p, 1.0).unwrap();
    let u = algorithm_unitary(&e, &bits("00")).unwrap();
    assert!(unitarity_defect(&u) < 1e-10);
    let eig = unitary_eigensystem(&u).unwrap();
    // A 1-eigenvector must lie in both H(x) ⊕ |0̂> and ker A^α or both complements.
    let pi = e.input_projector(&bits("00")).unwrap();
    for k in 0..eig.dim() {
        if eig.phases()[k].abs() < 1e-9 {
            let v = eig.vectors().column(k).into_owned();
            let a = (&pi * &v - &v).norm();
            let b = (e.lambda_alpha() * &v - &v).norm();
            let a0 = (&pi * &v).norm();
            let b0 = (e.lambda_alpha() * &v).norm();
            assert!((a < 1e-8 && b < 1e-8) || (a0 < 1e-8 && b0 < 1e-8));
        }
    }
}

fn duality_case(seed: u64) {
    let mut rng = trial_rng(seed, 0);
    let q = 2 + (seed % 2) as usize;
    let n = 1 + (seed as usize / 2) % 4;
    let block = q - 1;
    let extra = (8 - n * block).min(2);
    let dim_v = 1 + (seed as usize % 3);
    let p = random_span_program(n, q, extra, dim_v, &mut rng).unwrap();
    let c = complement(&p).unwrap();
    for x in all_inputs(n, q) {
        let a = witness(&p, &x).unwrap();
        let b = witness(&c, &x).unwrap();
        match a.kind {
            WitnessKind::Positive => assert_eq!(b.kind, WitnessKind::Negative),
            WitnessKind::Negative => assert_eq!(b.kind, WitnessKind::Positive),
            WitnessKind::None => unreachable!(),
        }
        assert!((a.size - b.size).abs() <= 1e-6 * (1.0 + a.size), "seed {seed}: {} vs {}", a.size, b.size);
    }
}

#[test]
fn witness_duality_fixed_seeds() {
    for seed in 0..50 {
        duality_case(seed);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn witness_duality(seed in 50u64..1_000_000) {
        duality_case(seed);
    }

    #[test]
    fn appendix_b_eigenvectors(seed in 0u64..1_000_000, alpha_scale in 1.0f64..4.0) {
        let mut rng = trial_rng(seed, 7);
        let p = random_span_program(3, 2, 1, 2, &mut rng).unwrap();
        for x in all_inputs(3, 2) {
            let r = witness(&p, &x).unwrap();
            match r.kind {
                WitnessKind::Positive => {
                    let alpha = (r.size * alpha_scale).sqrt().max(1e-3);
                    let e = ExtendedProgram::new(&p, alpha).unwrap();
                    let u = algorithm_unitary(&e, &x).unwrap();
                    let mut v = CVector::zeros(e.dim());
                    v.rows_mut(0, p.dim_h()).copy_from(&(-&r.witness));
                    v[e.hat_index()] = c64(alpha, 0.0);
                    prop_assert!((&u * &v - &v).norm() < 1e-8 * (1.0 + v.norm()));
                }
                WitnessKind::Negative => {
                    let alpha = alpha_scale;
                    let e = ExtendedProgram::new(&p, alpha).unwrap();
                    let omega_row = r.witness.transpose();
                    let wa = omega_row * e.a_alpha();
                    let v: CVector = wa.adjoint() * c64(alpha, 0.0);
                    let lam = e.lambda_alpha() * &v;
                    prop_assert!(lam.norm() < 1e-8 * (1.0 + v.norm()));
                    let pi = e.input_projector(&x).unwrap();
                    let hat = basis_vector(e.dim(), e.hat_index());
                    prop_assert!((&pi * &v - hat).norm() < 1e-8 * (1.0 + v.norm()));
                }
                WitnessKind::None => prop_assert!(false),
            }
        }
        prop_assert!(max_abs(&(e_check(&p))) < 1e-12);
    }

    #[test]
    fn evaluation_matches_or(x in proptest::collection::vec(0u8..2, 1..7)) {
        let p = build_or_program(x.len()).unwrap();
        prop_assert_eq!(evaluate(&p, &x).unwrap(), x.contains(&1));
    }
}

/// `A^α` restricted to `H` equals `A`.
fn e_check(p: &SpanProgram) -> qconv::numerics::CMatrix {
    let e = ExtendedProgram::new(p, 2.0).unwrap();
    e.a_alpha().columns(0, p.dim_h()).into_owned() - p.a()
}
