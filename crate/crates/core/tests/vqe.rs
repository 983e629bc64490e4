mod common;

use clustercut::backend::statevector::StateVector;
use clustercut::linalg::Pauli;
use clustercut::vqe::*;
use common::rng;
use proptest::prelude::*;
use rand::Rng;

fn random_theta(spec: &AnsatzSpec, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..spec.param_count()).map(|_| r.gen_range(-3.2..3.2)).collect()
}

#[test]
fn parameter_count_and_length_check() {
    let spec = AnsatzSpec::new(6, 1, Entangler::CzChain);
    assert_eq!(spec.param_count(), 30);
    assert!(matches!(
        build_ansatz(&spec, &[0.0; 29]),
        Err(clustercut::Error::LengthMismatch { expected: 30, got: 29 })
    ));
}

#[test]
fn depth_zero_is_rotations_only() {
    let spec = AnsatzSpec::new(4, 0, Entangler::CnotLadder);
    let c = build_ansatz(&spec, &random_theta(&spec, 1)).unwrap();
    assert_eq!(c.len(), 8);
    assert!(c.gates.iter().all(|g| g.arity() == 1));
}

#[test]
fn zero_angles_leave_ground_state_under_cz() {
    let spec = AnsatzSpec::new(5, 3, Entangler::CzChain);
    let amps = ansatz_state(&spec, &vec![0.0; spec.param_count()]).unwrap();
    assert!((amps[0].re - 1.0).abs() < 1e-12);
    assert!(amps[1..].iter().all(|a| a.norm() < 1e-12));
}

#[test]
fn fast_kernels_match_gate_circuit() {
    for (ent, seed) in [(Entangler::CzChain, 2), (Entangler::CnotLadder, 3)] {
        let spec = AnsatzSpec::new(5, 2, ent).with_pruned([2]);
        let theta = random_theta(&spec, seed);
        let fast = ansatz_state(&spec, &theta).unwrap();
        let slow = StateVector::run(&build_ansatz(&spec, &theta).unwrap());
        let diff = fast.iter().zip(slow.amplitudes()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(diff < 1e-12);
    }
}

#[test]
fn identity_hamiltonian_has_unit_energy() {
    let spec = AnsatzSpec::new(4, 1, Entangler::CzChain);
    let h = PauliSumHamiltonian::from_labels(4, &[(1.0, "IIII")]).unwrap();
    for mode in [EnergyMode::Full, EnergyMode::CutExact] {
        let e = energy(&spec, &random_theta(&spec, 4), &h, mode).unwrap();
        assert!((e.value - 1.0).abs() < 1e-12);
    }
}

#[test]
fn diagonal_hamiltonian_at_zero_angles() {
    let spec = AnsatzSpec::new(4, 2, Entangler::CzChain);
    let h = PauliSumHamiltonian::from_labels(4, &[(0.5, "ZIZI"), (-0.25, "IZII"), (0.1, "IIIZ")]).unwrap();
    assert!(h.is_diagonal());
    let e = energy(&spec, &vec![0.0; spec.param_count()], &h, EnergyMode::Full).unwrap();
    // ⟨0000|H|0000⟩ is the coefficient sum.
    assert!((e.value - 0.35).abs() < 1e-12);
    assert!((e.value - h.matrix()[(0, 0)].re).abs() < 1e-12);
}

#[test]
fn cz_cut_energy_matches_full() {
    let spec = AnsatzSpec::new(6, 1, Entangler::CzChain);
    let h = PauliSumHamiltonian::random(6, 12, &mut rng(9));
    for seed in 0..3 {
        let theta = random_theta(&spec, 100 + seed);
        let full = energy(&spec, &theta, &h, EnergyMode::Full).unwrap();
        let cut = energy(&spec, &theta, &h, EnergyMode::CutExact).unwrap();
        assert!((full.value - cut.value).abs() < 1e-8);
        assert!(cut.k <= 1);
        assert_eq!(cut.max_fragment_width, 3);
    }
}

#[test]
fn generic_cut_energy_matches_full() {
    // The ladder's single crossing CNOT goes through the generic gate cut.
    let spec = AnsatzSpec::new(2, 1, Entangler::CnotLadder);
    let h = PauliSumHamiltonian::from_labels(2, &[(0.3, "XY"), (-0.7, "ZZ"), (0.2, "IX")]).unwrap();
    let theta = random_theta(&spec, 12);
    let full = energy(&spec, &theta, &h, EnergyMode::Full).unwrap();
    let cut = energy(&spec, &theta, &h, EnergyMode::CutExact).unwrap();
    assert!((full.value - cut.value).abs() < 1e-8);
}

#[test]
fn shot_energy_is_close() {
    let spec = AnsatzSpec::new(4, 1, Entangler::CzChain);
    let h = PauliSumHamiltonian::from_labels(4, &[(0.6, "ZZZZ"), (-0.4, "XIIX")]).unwrap();
    let theta = random_theta(&spec, 21);
    let full = energy(&spec, &theta, &h, EnergyMode::Full).unwrap();
    let shots = energy(&spec, &theta, &h, EnergyMode::CutShots { shots: DEFAULT_SHOTS, seed: 5 }).unwrap();
    assert!(shots.stderr > 0.0);
    assert!((full.value - shots.value).abs() < 6.0 * shots.stderr + 1e-3, "{} vs {}", full.value, shots.value);
    let again = energy(&spec, &theta, &h, EnergyMode::CutShots { shots: DEFAULT_SHOTS, seed: 5 }).unwrap();
    assert_eq!(shots.value.to_bits(), again.value.to_bits());
}

#[test]
fn ground_energy_is_minimal_expectation() {
    let h = PauliSumHamiltonian::random(3, 10, &mut rng(2));
    let v = h.ground_energy();
    let spec = AnsatzSpec::new(3, 2, Entangler::CnotLadder);
    for seed in 0..20 {
        let e = energy(&spec, &random_theta(&spec, seed), &h, EnergyMode::Full).unwrap();
        assert!(e.value >= v - 1e-12);
    }
}

#[test]
fn spsa_descends_on_a_bowl() {
    let cfg = SpsaConfig { iterations: 300, ..SpsaConfig::default() };
    let theta0 = vec![1.5, -2.0, 0.7, 1.1];
    let norm = |t: &[f64]| t.iter().map(|x| x * x).sum::<f64>();
    let trace = spsa_minimize(|t| Ok(norm(t) * 0.1), theta0.clone(), &cfg).unwrap();
    assert_eq!(trace.steps.len(), 300);
    assert!(norm(&trace.theta) < norm(&theta0));
}

#[test]
fn spsa_is_deterministic() {
    let spec = AnsatzSpec::new(3, 1, Entangler::CnotLadder);
    let h = PauliSumHamiltonian::random(3, 8, &mut rng(4));
    let cfg = SpsaConfig { iterations: 25, seed: 17, keep_theta: true, ..SpsaConfig::default() };
    let a = spsa_vqe(&spec, &h, &cfg, EnergyMode::Full).unwrap();
    let b = spsa_vqe(&spec, &h, &cfg, EnergyMode::Full).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.steps[0].theta.as_ref().unwrap(), &cfg.initial_theta(spec.param_count()));
    let other = spsa_vqe(&spec, &h, &SpsaConfig { seed: 18, ..cfg }, EnergyMode::Full).unwrap();
    assert_ne!(a.theta, other.theta);
}

#[test]
fn spsa_update_rule() {
    let cfg = SpsaConfig { iterations: 1, seed: 3, ..SpsaConfig::default() };
    let theta0 = vec![0.2, -0.4, 0.9];
    let f = |t: &[f64]| Ok(t[0] * 2.0 + t[1] * t[1] - t[2]);
    let trace = spsa_minimize(f, theta0.clone(), &cfg).unwrap();
    let r = cfg.perturbation(1, 3);
    assert!(r.iter().all(|x| x.abs() == 1.0));
    let s = &trace.steps[0];
    let g = (s.f_plus - s.f_minus) / (2.0 * cfg.c_k(1));
    for i in 0..3 {
        assert!((trace.theta[i] - (theta0[i] - cfg.a_k(1) * g * r[i])).abs() < 1e-15);
    }
    assert!((cfg.c_k(4) - 0.15).abs() < 1e-15);
    assert!((cfg.a_k(1) - 1.0).abs() < 1e-15);
}

#[test]
fn perturbations_are_balanced() {
    let cfg = SpsaConfig::default();
    let total: f64 = (1..=200).flat_map(|k| cfg.perturbation(k, 50)).sum();
    // 10000 fair signs: a 5σ band is ±500.
    assert!(total.abs() < 500.0);
}

#[test]
fn trace_csv_columns() {
    let spec = AnsatzSpec::new(2, 1, Entangler::CzChain);
    let h = PauliSumHamiltonian::from_labels(2, &[(1.0, "ZZ"), (0.5, "XI")]).unwrap();
    let trace = spsa_vqe(&spec, &h, &SpsaConfig { iterations: 3, ..SpsaConfig::default() }, EnergyMode::Full).unwrap();
    let csv = trace_csv(&trace, h.ground_energy());
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "iteration,F_plus,F_minus,F_ideal,relative_error");
    assert_eq!(lines.len(), 4);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 5));
}

#[test]
fn regimes_and_their_sizes() {
    let regimes = pruning_regimes();
    let counts: Vec<usize> =
        regimes.iter().map(|r| AnsatzSpec::new(6, r.depth, Entangler::CnotLadder).param_count()).collect();
    assert_eq!(counts, vec![174, 174, 66]);
    assert_eq!(regimes.iter().map(Regime::full_layers).collect::<Vec<_>>(), vec![9, 3, 3]);
}

#[test]
fn pruned_layers_remove_exactly_crossing_cnots() {
    let spec = AnsatzSpec::new(6, 9, Entangler::CnotLadder).with_pruned([1, 2, 4, 6, 8, 9]);
    for k in 1..=9 {
        let pairs = spec.entangler_pairs(k);
        let expected: Vec<(usize, usize)> = (0..6)
            .flat_map(|i| (i + 1..6).map(move |j| (i, j)))
            .filter(|&(i, j)| !spec.pruned.contains(&k) || !(i + 1 <= 3 && 3 < j + 1))
            .collect();
        assert_eq!(pairs, expected);
    }
}

#[test]
fn small_pruning_experiment_shapes() {
    let cfg = PruningConfig {
        n: 4,
        hamiltonians: 2,
        terms: 6,
        spsa: SpsaConfig { iterations: 20, ..SpsaConfig::default() },
        regimes: pruning_regimes(),
        seed: 1,
    };
    let report = pruning_experiment(&cfg).unwrap();
    assert_eq!(report.curves.len(), 3);
    assert!(report.curves.iter().all(|c| c.len() == 20));
    let csv = report.to_csv();
    assert_eq!(csv.lines().next().unwrap(), "iteration,D9_D1_9,D9_D1_3,D3_D1_3");
    assert_eq!(csv.lines().count(), 21);
    assert_eq!(report, pruning_experiment(&cfg).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn parameter_identity(n in 1usize..10, d in 0usize..12) {
        let spec = AnsatzSpec::new(n, d, Entangler::CnotLadder);
        prop_assert_eq!(spec.param_count(), (3 * d + 2) * n);
        let theta = vec![0.1; spec.param_count()];
        let rotations = build_ansatz(&spec, &theta).unwrap().gates.iter().filter(|g| g.arity() == 1).count();
        prop_assert_eq!(rotations, spec.param_count());
    }

    #[test]
    fn pauli_expectation_matches_dense(seed in any::<u64>()) {
        let mut r = rng(seed);
        let h = PauliSumHamiltonian::random(3, 5, &mut r);
        let spec = AnsatzSpec::new(3, 1, Entangler::CnotLadder);
        let amps = ansatz_state(&spec, &random_theta(&spec, seed)).unwrap();
        let v = nalgebra::DVector::from_column_slice(&amps);
        let dense = (v.adjoint() * h.matrix() * &v)[(0, 0)].re;
        prop_assert!((dense - h.expectation(&amps)).abs() < 1e-10);
    }
}

#[test]
fn labels_round_trip() {
    let h = PauliSumHamiltonian::from_labels(3, &[(0.5, "XYZ")]).unwrap();
    assert_eq!(h.terms[0].1, vec![Pauli::X, Pauli::Y, Pauli::Z]);
    assert_eq!(h.labels(), vec![(0.5, "XYZ".to_string())]);
}

#[test]
fn json_round_trip() {
    let h = PauliSumHamiltonian::from_labels(3, &[(0.5, "XZI"), (-1.25, "IYY")]).unwrap();
    let back = PauliSumHamiltonian::from_json(&h.to_json()).unwrap();
    assert_eq!(back.labels(), h.labels());
    assert_eq!(back.n, 3);
    assert!(PauliSumHamiltonian::from_json(r#"{"n": 2, "terms": [{"coeff": 1.0, "pauli": "XYZ"}]}"#).is_err());
}
