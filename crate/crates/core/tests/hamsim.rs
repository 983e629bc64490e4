mod common;

use clustercut::circuit::{Gate, GateKind};
use clustercut::estimator::Mode;
use clustercut::hamsim::*;
use clustercut::linalg::{c, max_abs_diff, C64};
use common::{random_two_party, rng};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

/// Transverse-field chain in each party with a single `ZZ` coupling.
fn two_chains(coupling: f64) -> ClusteredHamiltonian {
    let mut terms = Vec::new();
    for base in [0, 3] {
        terms.push(HamTerm::pauli("ZZ", &[base, base + 1], 0.5).unwrap());
        terms.push(HamTerm::pauli("ZZ", &[base + 1, base + 2], 0.5).unwrap());
        for q in base..base + 3 {
            terms.push(HamTerm::pauli("X", &[q], 0.4).unwrap());
        }
    }
    terms.push(HamTerm::pauli("ZZ", &[2, 3], coupling).unwrap());
    ClusteredHamiltonian::new(vec![vec![0, 1, 2], vec![3, 4, 5]], terms).unwrap()
}

fn task(h: ClusteredHamiltonian, t: f64, epsilon: f64) -> CorrelationTask {
    let preps = vec![
        vec![Gate::one(GateKind::Ry(0.7), 0), Gate::one(GateKind::H, 2)],
        vec![Gate::one(GateKind::Ry(-1.1), 4), Gate::one(GateKind::Rx(0.5), 3)],
    ];
    let observables = vec![
        PartyObservable::pauli(vec![0, 1, 2], "XIZ").unwrap(),
        PartyObservable::pauli(vec![3, 4, 5], "ZYI").unwrap(),
    ];
    CorrelationTask { hamiltonian: h, preps, observables, t, epsilon }
}

#[test]
fn classification_and_strengths() {
    let h = two_chains(0.2);
    assert_eq!(h.intra.len(), 10);
    assert_eq!(h.inter.len(), 1);
    assert!((h.h_b() - 0.2).abs() < 1e-15);
    assert!((h.h_a() - 2.0 * (0.5 + 0.5 + 1.2)).abs() < 1e-12);
    assert_eq!(h.degree(), 3);
    let g = h.interaction_graph();
    assert_eq!(g.edges, vec![(0, 1)]);
}

#[test]
fn terms_must_have_bounded_norm() {
    let err = ClusteredHamiltonian::new(vec![vec![0], vec![1]], vec![HamTerm::pauli("ZZ", &[0, 1], 1.5).unwrap()]);
    assert!(err.is_err());
    let err = ClusteredHamiltonian::new(vec![vec![0, 1]], vec![HamTerm::pauli("Z", &[2], 0.5).unwrap()]);
    assert!(err.is_err());
}

#[test]
fn identity_letters_are_dropped() {
    let t = HamTerm::pauli("IZ", &[0, 4], 0.3).unwrap();
    assert_eq!(t.qubits, vec![4]);
    assert!((t.norm() - 0.3).abs() < 1e-15);
}

#[test]
fn spec_example_step_counts() {
    // d' = 1, h_B = 0.2, t = 1, ε = 0.1: 4·1·0.2/0.1 = 8 and 2·0.04/0.1 → 1.
    let s = trotter_steps(0.0, 0.2, 1, 1.0, 0.1);
    assert_eq!(s.m1, 8 + 1);
    // d' = 2: 16 + 1, and m2 = ⌈2·h_A²·t²/(m1 ε)⌉.
    let s = trotter_steps(1.5, 0.2, 2, 1.0, 0.1);
    assert_eq!(s.m1, 17);
    assert_eq!(s.m2, (2.0f64 * 2.25 / (17.0 * 0.1)).ceil() as usize);
}

#[test]
fn documented_step_example() {
    // d' = 2, h_B = 1, t = 1, ε = 0.5: ⌈4·2·1·1/0.5⌉ + ⌈2·1·1/0.5⌉ = 16 + 4.
    let s = trotter_steps(0.0, 1.0, 2, 1.0, 0.5);
    assert_eq!(s.m1, 20);
}

#[test]
fn no_interaction_means_no_inter_gates() {
    let h = ClusteredHamiltonian::new(
        vec![vec![0], vec![1]],
        vec![HamTerm::pauli("X", &[0], 0.5).unwrap(), HamTerm::pauli("Y", &[1], 0.5).unwrap()],
    )
    .unwrap();
    let s = trotter_steps(h.h_a(), h.h_b(), h.degree(), 1.0, 0.1);
    assert_eq!(s.m1, 1);
    assert!(s.flags.clamped);
    let c = build_trotter_circuit(&h, 1.0, s.m1, s.m2);
    assert!(c.gates.iter().all(|g| g.arity() == 1));
}

#[test]
fn cut_count_is_m1_times_inter_terms() {
    let t = task(two_chains(0.2), 0.5, 0.4);
    let report = correlation(&t, &CorrelationOptions { samples: Some(10), ..Default::default() }).unwrap();
    assert_eq!(report.k, report.m1 * t.hamiltonian.inter.len());
}

#[test]
fn tfim_error_decreases_with_steps() {
    let mut terms = vec![HamTerm::pauli("ZZ", &[0, 1], 0.6).unwrap(), HamTerm::pauli("ZZ", &[2, 3], 0.6).unwrap()];
    terms.push(HamTerm::pauli("ZZ", &[1, 2], 0.3).unwrap());
    for q in 0..4 {
        terms.push(HamTerm::pauli("X", &[q], 0.7).unwrap());
    }
    let h = ClusteredHamiltonian::new(vec![vec![0, 1], vec![2, 3]], terms).unwrap();
    let eps = 0.1;
    let s = trotter_steps(h.h_a(), h.h_b(), h.degree(), 1.0, eps);
    let errors: Vec<f64> = [1, 2, 4, 8, s.m1].iter().map(|&m1| trotter_error(&h, 1.0, m1, s.m2)).collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
    assert!(errors[4] < 2.0 * eps);
}

#[test]
fn decoupled_parties_factorize() {
    let mut terms = Vec::new();
    for base in [0, 3] {
        terms.push(HamTerm::pauli("ZZ", &[base, base + 1], 0.5).unwrap());
        terms.push(HamTerm::pauli("XX", &[base + 1, base + 2], 0.5).unwrap());
        terms.push(HamTerm::pauli("Y", &[base], 0.3).unwrap());
    }
    let h = ClusteredHamiltonian::new(vec![vec![0, 1, 2], vec![3, 4, 5]], terms).unwrap();
    let mut t = task(h, 0.7, 0.2);
    t.observables = vec![
        PartyObservable::pauli(vec![0, 1, 2], "ZII").unwrap(),
        PartyObservable::pauli(vec![3, 4, 5], "IZI").unwrap(),
    ];
    let joint = t.exact().unwrap();
    let single = |p: usize| {
        let mut tp = t.clone();
        tp.observables[1 - p] = PartyObservable::pauli(t.hamiltonian.parties[1 - p].clone(), "III").unwrap();
        tp.exact().unwrap()
    };
    assert!((joint - single(0) * single(1)).abs() < 1e-10);
    let report = correlation(&t, &CorrelationOptions { mode: Mode::Enumerate, ..Default::default() }).unwrap();
    assert_eq!(report.k, 0);
    assert!((report.estimate.value - joint).abs() < t.epsilon);
}

#[test]
fn circuit_gate_count_and_unitary() {
    let h = two_chains(0.2);
    let c = build_trotter_circuit(&h, 0.8, 3, 2);
    assert_eq!(c.len(), 3 * (h.inter.len() + 2 * h.intra.len()));
    let mut u = DMatrix::<C64>::identity(64, 64);
    for g in &c.gates {
        u = clustercut::linalg::embed(g.matrix(), g.targets(), 6) * u;
    }
    assert!((u - trotter_unitary(&h, 0.8, 3, 2)).norm() < 1e-10);
}

#[test]
fn commutator_bounded_by_degree() {
    let h = two_chains(0.2);
    assert!(h.commutator_norm() <= 4.0 * h.h_b() * h.degree() as f64 + 1e-12);
}

#[test]
fn time_zero_gives_product_of_expectations() {
    let t = task(two_chains(0.2), 0.0, 0.2);
    let exact = t.exact().unwrap();
    let report = correlation(&t, &CorrelationOptions { mode: Mode::Enumerate, ..Default::default() }).unwrap();
    assert_eq!((report.m1, report.m2), (1, 1));
    assert!(report.flags.clamped);
    // XIZ on H|0⟩ at q2 and Ry(0.7)|0⟩ at q0: ⟨X⟩ = sin 0.7, ⟨Z⟩(q2) = 0; so the product vanishes.
    assert!(exact.abs() < 1e-12);
    assert!((report.estimate.value - exact).abs() < 1e-9);
}

#[test]
fn enumerate_matches_trotter_circuit_value() {
    let t = task(two_chains(0.3), 0.3, 0.5);
    let report = correlation(&t, &CorrelationOptions { mode: Mode::Enumerate, ..Default::default() }).unwrap();
    let exact = t.exact().unwrap();
    assert!(report.k >= 1);
    assert!(report.max_fragment_width <= 3);
    assert!((report.estimate.value - exact).abs() <= 0.25, "{} vs {exact}", report.estimate.value);
}

#[test]
fn explicit_terms_round_trip_json() {
    let text = r#"{"parties":[[0,1],[2]],"terms":[
        {"pauli":"ZZ","qubits":[1,2],"coeff":0.2},
        {"pauli":"X","qubits":[0],"coeff":0.5},
        {"matrix":[[[0.5,0],[0,0]],[[0,0],[-0.5,0]]],"qubits":[2]}]}"#;
    let h = ClusteredHamiltonian::from_json(text).unwrap();
    assert_eq!(h.n, 3);
    assert_eq!(h.inter.len(), 1);
    assert_eq!(h.intra.len(), 2);
    let z = clustercut::linalg::embed(&clustercut::Pauli::Z.matrix(), &[2], 3) * c(0.5, 0.0);
    let explicit = h.intra.iter().find(|t| t.pauli.is_none()).unwrap();
    assert!(max_abs_diff(&explicit.matrix, &[c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)]) < 1e-15);
    let dense = h.matrix();
    let expected = clustercut::linalg::embed(&clustercut::Pauli::X.matrix(), &[0], 3) * c(0.5, 0.0)
        + (clustercut::linalg::embed(&clustercut::Pauli::Z.matrix(), &[1], 3)
            * clustercut::linalg::embed(&clustercut::Pauli::Z.matrix(), &[2], 3))
            * c(0.2, 0.0)
        + z;
    assert!((dense - expected).norm() < 1e-12);
}

#[test]
fn bad_json_reports_error() {
    assert!(ClusteredHamiltonian::from_json(r#"{"parties":[[0]],"terms":[{"qubits":[0]}]}"#).is_err());
    assert!(ClusteredHamiltonian::from_json("{").is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn planned_steps_meet_error_budget(seed in any::<u64>(), t in 0.1f64..1.0) {
        let h = random_two_party(seed);
        let eps = 0.2;
        let s = trotter_steps(h.h_a(), h.h_b(), h.degree(), t, eps);
        prop_assert!(trotter_error(&h, t, s.m1, s.m2) <= 4.0 * eps);
    }

    #[test]
    fn trotter_error_vanishes_for_commuting_parts(seed in any::<u64>()) {
        let mut r = rng(seed);
        let terms = vec![
            HamTerm::pauli("Z", &[0], r.gen_range(-1.0..1.0)).unwrap(),
            HamTerm::pauli("ZZ", &[0, 1], r.gen_range(-1.0..1.0)).unwrap(),
            HamTerm::pauli("Z", &[1], r.gen_range(-1.0..1.0)).unwrap(),
        ];
        let h = ClusteredHamiltonian::new(vec![vec![0], vec![1]], terms).unwrap();
        prop_assert!(trotter_error(&h, 1.3, 1, 1) < 1e-12);
    }
}
