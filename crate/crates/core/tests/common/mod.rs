#![allow(dead_code)]

use clustercut::backend::statevector::StateVector;
use clustercut::circuit::{Block, Circuit, Gate, GateKind, GeneralFn, PostProcess, QcAlgorithm};
use clustercut::network::{build_network, Clustering, TensorNetwork};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Full-register statevector value `E_y f(y)`.
pub fn oracle(alg: &QcAlgorithm) -> f64 {
    StateVector::run(&alg.circuit).expectation(&alg.post)
}

pub fn random_1q(rng: &mut ChaCha8Rng, q: usize) -> Gate {
    let a = rng.gen_range(-3.0..3.0);
    match rng.gen_range(0..8) {
        0 => Gate::one(GateKind::H, q),
        1 => Gate::one(GateKind::S, q),
        2 => Gate::one(GateKind::T, q),
        3 => Gate::one(GateKind::Rx(a), q),
        4 => Gate::one(GateKind::Ry(a), q),
        5 => Gate::one(GateKind::Rz(a), q),
        6 => Gate::one(GateKind::Sdg, q),
        _ => Gate::one(GateKind::Y, q),
    }
}

pub fn random_2q(rng: &mut ChaCha8Rng, a: usize, b: usize) -> Gate {
    match rng.gen_range(0..4) {
        0 => Gate::two(GateKind::Cnot, a, b),
        1 => Gate::two(GateKind::Cz, a, b),
        2 => Gate::two(GateKind::Swap, a, b),
        _ => Gate::two(GateKind::Rpp { paulis: [clustercut::Pauli::X, clustercut::Pauli::Z], angle: rng.gen_range(-2.0..2.0) }, a, b),
    }
}

pub fn random_general(rng: &mut ChaCha8Rng, n: usize) -> PostProcess {
    let table: Vec<f64> = (0..1usize << n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    PostProcess::General(GeneralFn::from_table(n, table).unwrap())
}

pub fn random_blocks(rng: &mut ChaCha8Rng, parts: &[Vec<usize>]) -> PostProcess {
    let blocks = parts
        .iter()
        .map(|qs| Block::new(qs.clone(), (0..1usize << qs.len()).map(|_| rng.gen_range(-1.0..=1.0)).collect()).unwrap())
        .collect();
    PostProcess::Decomposable(blocks)
}

/// A random clustered instance: qubits split into `parts` groups, gates mostly
/// inside a group plus `crossing` gates between groups. Every vertex joins the
/// group of its first target; crossing gates therefore cut wires.
pub struct Instance {
    pub alg: QcAlgorithm,
    pub net: TensorNetwork,
    pub clustering: Clustering,
    pub parts: Vec<Vec<usize>>,
}

pub fn random_instance(rng: &mut ChaCha8Rng, n: usize, m: usize, parts: usize, crossing: usize, general: bool) -> Instance {
    let mut qubits: Vec<usize> = (0..n).collect();
    qubits.shuffle(rng);
    let mut groups: Vec<Vec<usize>> = (0..parts).map(|p| qubits.iter().copied().skip(p).step_by(parts).collect()).collect();
    groups.iter_mut().for_each(|g| g.sort_unstable());
    let mut party = vec![0; n];
    for (p, g) in groups.iter().enumerate() {
        g.iter().for_each(|&q| party[q] = p);
    }
    let mut crossing_at: Vec<usize> = (0..m).collect();
    crossing_at.shuffle(rng);
    crossing_at.truncate(crossing);
    let mut gates = Vec::with_capacity(m);
    for i in 0..m {
        if crossing_at.contains(&i) && parts > 1 {
            let pa = rng.gen_range(0..parts);
            let pb = (pa + rng.gen_range(1..parts)) % parts;
            let a = *groups[pa].choose(rng).unwrap();
            let b = *groups[pb].choose(rng).unwrap();
            gates.push(random_2q(rng, a, b));
            continue;
        }
        let g = &groups[rng.gen_range(0..parts)];
        if g.len() >= 2 && rng.gen_bool(0.5) {
            let pick: Vec<usize> = g.choose_multiple(rng, 2).copied().collect();
            gates.push(random_2q(rng, pick[0], pick[1]));
        } else {
            let q = *g.choose(rng).unwrap();
            gates.push(random_1q(rng, q));
        }
    }
    let post = if general { random_general(rng, n) } else { random_blocks(rng, &groups) };
    let alg = QcAlgorithm::new(Circuit::with_gates(n, gates), post).unwrap();
    let net = build_network(&alg);
    let mut clusters: Vec<Vec<usize>> = vec![Vec::new(); parts];
    for (v, vertex) in net.vertices.iter().enumerate() {
        if !net.is_observable(v) {
            clusters[party[vertex.qubits[0]]].push(v);
        }
    }
    let clustering = Clustering::from_clusters(&net, &clusters).unwrap();
    Instance { alg, net, clustering, parts: groups }
}

/// Four-qubit circuit with the topology of the standard K=1, d=3 example:
/// `A` on q3, `B(q1,q2)`, `C(q2,q3)`, `D(q0,q1)`, general final observable.
/// Returns the algorithm and the vertex lists of the two clusters.
pub fn fig1(rng: &mut ChaCha8Rng) -> (QcAlgorithm, Vec<Vec<usize>>) {
    let gates = vec![
        Gate::one(GateKind::Ry(rng.gen_range(-3.0..3.0)), 3),
        Gate::two(GateKind::Cnot, 1, 2),
        Gate::two(GateKind::Rpp { paulis: [clustercut::Pauli::Y, clustercut::Pauli::X], angle: rng.gen_range(-3.0..3.0) }, 2, 3),
        Gate::two(GateKind::Cnot, 0, 1),
    ];
    let post = random_general(rng, 4);
    let alg = QcAlgorithm::new(Circuit::with_gates(4, gates), post).unwrap();
    // Inputs are vertices 0..4 and gates 4..8 in order A, B, C, D.
    let clusters = vec![vec![1, 2, 3, 4, 5, 6], vec![0, 7]];
    (alg, clusters)
}

/// Random two-party Hamiltonian on 3+3 qubits with `‖H_j‖ ≤ 1`: random
/// single-qubit fields, nearest-neighbour couplings, and one inter coupling.
pub fn random_two_party(seed: u64) -> clustercut::hamsim::ClusteredHamiltonian {
    use clustercut::hamsim::{ClusteredHamiltonian, HamTerm};
    let mut r = rng(seed);
    let letters = ["X", "Y", "Z"];
    let mut terms = Vec::new();
    for base in [0, 3] {
        for q in base..base + 3 {
            let p = letters[r.gen_range(0..3)];
            terms.push(HamTerm::pauli(p, &[q], r.gen_range(-1.0..1.0)).unwrap());
        }
        for (a, b) in [(base, base + 1), (base + 1, base + 2)] {
            let p = format!("{}{}", letters[r.gen_range(0..3)], letters[r.gen_range(0..3)]);
            terms.push(HamTerm::pauli(&p, &[a, b], r.gen_range(-1.0..1.0)).unwrap());
        }
    }
    let (a, b) = (r.gen_range(0..3), r.gen_range(3..6));
    let p = format!("{}{}", letters[r.gen_range(0..3)], letters[r.gen_range(0..3)]);
    terms.push(HamTerm::pauli(&p, &[a, b], r.gen_range(-0.5..0.5)).unwrap());
    ClusteredHamiltonian::new(vec![vec![0, 1, 2], vec![3, 4, 5]], terms).unwrap()
}
