use std::f64::consts::PI;

use proptest::prelude::*;
use qconv::numerics::{basis_vector, c64, unitary_eigensystem, CMatrix, CVector};
use qconv::phasesim::circuit::ReferenceCircuit;
use qconv::phasesim::{
    check_probability, kernel_amplitude, reflection_overlaps, sample_phase_check, PhaseCheckSpec,
    QueryLedger, SpectralState, Stage,
};
use qconv::random::{random_reflection_product, random_state, random_subspace, random_unitary, trial_rng};

fn diag(phases: &[f64]) -> CMatrix {
    let d = CVector::from_iterator(phases.len(), phases.iter().map(|&p| qconv::numerics::C64::from_polar(1.0, p)));
    CMatrix::from_diagonal(&d)
}

#[test]
fn zero_phase_eigenvector_always_accepts() {
    let u = diag(&[0.0, 1.0, -2.0]);
    let spec = PhaseCheckSpec::new(0.2, 0.1).unwrap();
    let p = check_probability(&u, &basis_vector(3, 0), &spec).unwrap();
    assert!((p - 1.0).abs() < 1e-12);
    let r = reflection_overlaps(&u, &basis_vector(3, 0), &[basis_vector(3, 0)], &spec).unwrap();
    assert!((r.overlaps[0] - c64(1.0, 0.0)).norm() < 1e-12);
}

#[test]
fn pi_eigenvector_is_rejected_and_flipped() {
    let u = diag(&[PI, 0.5]);
    let spec = PhaseCheckSpec::from_bits(2, 3).unwrap();
    let psi = basis_vector(2, 0);
    assert!(check_probability(&u, &psi, &spec).unwrap() < 1e-24);
    let r = reflection_overlaps(&u, &psi, std::slice::from_ref(&psi), &spec).unwrap();
    assert!((r.overlaps[0] + c64(1.0, 0.0)).norm() < 1e-12);
}

#[test]
fn equal_superposition_of_zero_and_pi() {
    let u = diag(&[0.0, PI]);
    let psi = CVector::from_vec(vec![c64(1.0, 0.0), c64(1.0, 0.0)]) / c64(2f64.sqrt(), 0.0);
    let spec = PhaseCheckSpec::from_bits(2, 2).unwrap();
    let a = kernel_amplitude(PI, 2).norm();
    let expected = 0.5 + 0.5 * a.powi(4);
    assert!((check_probability(&u, &psi, &spec).unwrap() - expected).abs() < 1e-12);
    let circ = ReferenceCircuit::new(&u, 2, 1).unwrap();
    let spec1 = PhaseCheckSpec::from_bits(2, 1).unwrap();
    assert!((circ.check_probability(&psi) - check_probability(&u, &psi, &spec1).unwrap()).abs() < 1e-12);
}

#[test]
fn unnormalized_input_is_rejected() {
    let u = diag(&[0.0, 0.3]);
    let spec = PhaseCheckSpec::new(0.2, 0.1).unwrap();
    let psi = CVector::from_vec(vec![c64(1.0, 0.0), c64(1.0, 0.0)]);
    assert!(check_probability(&u, &psi, &spec).unwrap_err().is_validation());
}

#[test]
fn sampling_charges_and_concentrates() {
    let u = diag(&[0.0, PI]);
    let psi = CVector::from_vec(vec![c64(1.0, 0.0), c64(1.0, 0.0)]) / c64(2f64.sqrt(), 0.0);
    let spec = PhaseCheckSpec::from_bits(1, 1).unwrap();
    let eig = unitary_eigensystem(&u).unwrap();
    let state = SpectralState::new(&eig, &psi).unwrap();
    let mut rng = trial_rng(11, 0);
    let mut ledger = QueryLedger::new();
    let hits = (0..10_000)
        .filter(|_| sample_phase_check(&state, &spec, &mut rng, &mut ledger, 0, Stage::OneTest).sampled)
        .count();
    assert!((hits as f64 / 1e4 - 0.5).abs() < 0.02);
    assert_eq!(ledger.total(), 10_000 * spec.cost());
}

/// Random unitary of one of two kinds: Haar or a product of reflections.
fn random_u(seed: u64, dim: usize) -> CMatrix {
    let mut rng = trial_rng(seed, 1);
    if seed.is_multiple_of(2) {
        random_unitary(dim, &mut rng)
    } else {
        random_reflection_product(dim, &mut rng)
    }
}

#[test]
fn spectral_simulation_matches_circuit() {
    for seed in 0..24u64 {
        let dim = 2 + (seed as usize % 3);
        let u = random_u(seed, dim);
        let mut rng = trial_rng(seed, 2);
        let psi = random_state(dim, &mut rng);
        let target = random_state(dim, &mut rng);
        let eig = unitary_eigensystem(&u).unwrap();
        let state = SpectralState::new(&eig, &psi).unwrap();
        for t in 1..=2 {
            for m in 1..=2 {
                let spec = PhaseCheckSpec::from_bits(t, m).unwrap();
                let circ = ReferenceCircuit::new(&u, t, m).unwrap();
                assert!((state.check_probability(&spec) - circ.check_probability(&psi)).abs() < 1e-8);
                let ov = state.reflection_overlaps(std::slice::from_ref(&target), &spec).unwrap();
                assert!((ov.overlaps[0] - circ.reflection_overlap(&psi, &target)).norm() < 1e-8);
                let fast = state.basis_distribution(&spec);
                let slow = circ.basis_distribution(&psi);
                for (a, b) in fast.iter().zip(&slow) {
                    assert!((a - b).abs() < 1e-8, "seed {seed} t {t} m {m}: {a} vs {b}");
                }
                let p = random_subspace(dim, 1, &mut rng).projector();
                let projs = vec![p.clone(), CMatrix::identity(dim, dim) - p];
                let gen = state.measurement_distribution(&projs, &spec).unwrap();
                let brute = circ.measurement_distribution(&psi, &projs);
                for (a, b) in gen.iter().zip(&brute) {
                    assert!((a - b).abs() < 1e-8);
                }
            }
        }
    }
}

#[test]
fn projectors_must_resolve_identity() {
    let u = diag(&[0.0, 0.3]);
    let eig = unitary_eigensystem(&u).unwrap();
    let state = SpectralState::new(&eig, &basis_vector(2, 0)).unwrap();
    let spec = PhaseCheckSpec::new(0.2, 0.1).unwrap();
    let only = vec![basis_vector(2, 0) * basis_vector(2, 0).adjoint()];
    assert!(state.measurement_distribution(&only, &spec).is_err());
}

fn sandwich_case(seed: u64, dim: usize, theta: f64, eps: f64) {
    let u = random_u(seed, dim);
    let mut rng = trial_rng(seed, 3);
    let psi = random_state(dim, &mut rng);
    let spec = PhaseCheckSpec::new(theta, eps).unwrap();
    let eig = unitary_eigensystem(&u).unwrap();
    let state = SpectralState::new(&eig, &psi).unwrap();
    let p = state.check_probability(&spec);
    let p0 = (eig.spectral_projector(1e-9) * &psi).norm_squared();
    let pt_proj = eig.spectral_projector(theta);
    let pt = (&pt_proj * &psi).norm_squared();
    assert!(p0 <= p + 1e-9 && p <= pt + eps + 1e-9, "{p0} <= {p} <= {pt} + {eps}");

    // Leakage and reflection fidelity on the high-phase part.
    let high = &psi - &pt_proj * &psi;
    let hn = high.norm();
    if hn > 1e-6 {
        let h = &high / c64(hn, 0.0);
        let hs = SpectralState::new(&eig, &h).unwrap();
        assert!(hs.check_probability(&spec) <= eps + 1e-9);
        let ov = hs.reflection_overlaps(&[-h.clone()], &spec).unwrap();
        // ‖(R + I)h‖² = ‖R h‖² + 1 + 2 Re<h|R h> = 2 - 2 Re<-h|R h>.
        let dist = (2.0 - 2.0 * ov.overlaps[0].re).max(0.0).sqrt();
        assert!(dist < eps + 1e-9, "reflection error {dist} vs {eps}");
    }
}

#[test]
fn sandwich_holds_on_fixed_grid() {
    for seed in 0..100u64 {
        let theta = [0.05, 0.2, 0.7, 1.5][seed as usize % 4];
        let eps = [0.3, 0.1, 0.01][seed as usize % 3];
        sandwich_case(seed, 2 + seed as usize % 7, theta, eps);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sandwich_property(seed in 0u64..1_000_000, dim in 1usize..8, theta in 0.02f64..2.0, eps in 0.005f64..0.5) {
        sandwich_case(seed, dim, theta, eps);
    }

    #[test]
    fn basis_distribution_is_normalized(seed in 0u64..1_000_000, dim in 1usize..9, t in 1u32..6, m in 1u32..4) {
        let u = random_u(seed, dim);
        let mut rng = trial_rng(seed, 4);
        let psi = random_state(dim, &mut rng);
        let eig = unitary_eigensystem(&u).unwrap();
        let state = SpectralState::new(&eig, &psi).unwrap();
        let spec = PhaseCheckSpec::from_bits(t, m).unwrap();
        let total: f64 = state.basis_distribution(&spec).iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-8);
        let p = state.check_probability(&spec);
        prop_assert!((-1e-12..=1.0 + 1e-9).contains(&p));
    }

    #[test]
    fn kernel_amplitude_bounded(theta in -10.0f64..10.0, t in 1u32..30) {
        prop_assert!(kernel_amplitude(theta, t).norm() <= 1.0 + 1e-12);
    }
}
