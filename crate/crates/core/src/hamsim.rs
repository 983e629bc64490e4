//! Correlation functions of clustered Hamiltonians.
//!
//! `H = Σ_j H^{(1)}_j + Σ_j H^{(2)}_j` where intra terms act inside one party
//! and inter terms couple exactly two parties. The evolution is approximated
//! by the nested product formula
//! `Ũ = (∏_B e^{-i H_b t/m1} (∏_A e^{-i H_a t/(m1 m2)})^{m2})^{m1}`,
//! after which every inter-party gate is cut and the parties are simulated
//! separately.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::backend::statevector::StateVector;
use crate::circuit::{Block, Circuit, Gate, GateKind, PostProcess, QcAlgorithm};
use crate::cutting::plan_qubit_partition;
use crate::error::{Error, Result};
use crate::estimator::{ceil_tol, estimate, Estimate, EstimatorConfig, Mode};
use crate::linalg::{c, embed, expm_hermitian, expm_hermitian_flat, hermitian_norm, to_dmatrix, Pauli, C64};
use crate::network::{build_network, Multigraph};

const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct HamTerm {
    pub qubits: Vec<usize>,
    /// Hermitian matrix over `qubits` (first qubit most significant).
    pub matrix: Vec<C64>,
    /// Pauli form `coeff · P`, when the term was given that way.
    pub pauli: Option<(Vec<Pauli>, f64)>,
}

impl HamTerm {
    /// `coeff · P` for a Pauli label over `qubits`; identity letters are dropped.
    pub fn pauli(label: &str, qubits: &[usize], coeff: f64) -> Result<HamTerm> {
        let ps = crate::linalg::parse_pauli_string(label)
            .ok_or_else(|| Error::InvalidHamiltonian(format!("bad Pauli label '{label}'")))?;
        if ps.len() != qubits.len() {
            return Err(Error::InvalidHamiltonian(format!("label '{label}' does not match {} qubits", qubits.len())));
        }
        let (ps, qs): (Vec<Pauli>, Vec<usize>) = ps.into_iter().zip(qubits.iter().copied()).filter(|(p, _)| *p != Pauli::I).unzip();
        if qs.is_empty() || qs.len() > 2 {
            return Err(Error::InvalidHamiltonian(format!("term '{label}' must act on one or two qubits")));
        }
        let mut m = vec![c(coeff, 0.0)];
        let mut dim = 1;
        for p in &ps {
            m = crate::linalg::kron(&m, dim, &p.matrix(), 2);
            dim *= 2;
        }
        Ok(HamTerm { qubits: qs, matrix: m, pauli: Some((ps, coeff)) })
    }

    /// Explicit Hermitian term on one or two qubits.
    pub fn hermitian(qubits: &[usize], matrix: Vec<C64>) -> Result<HamTerm> {
        let dim = 1usize << qubits.len();
        if qubits.is_empty() || qubits.len() > 2 || matrix.len() != dim * dim {
            return Err(Error::InvalidHamiltonian("explicit terms need a 2×2 or 4×4 matrix".into()));
        }
        let herm_defect = crate::linalg::max_abs_diff(&matrix, &crate::linalg::dagger(&matrix, dim));
        if herm_defect > 1e-10 {
            return Err(Error::InvalidHamiltonian(format!("term on {qubits:?} is not Hermitian")));
        }
        Ok(HamTerm { qubits: qubits.to_vec(), matrix, pauli: None })
    }

    pub fn norm(&self) -> f64 {
        match &self.pauli {
            Some((_, coeff)) => coeff.abs(),
            None => hermitian_norm(&to_dmatrix(&self.matrix, 1 << self.qubits.len())),
        }
    }

    /// Gate implementing `exp(-i τ H_j)`.
    pub fn exp_gate(&self, tau: f64) -> Gate {
        match &self.pauli {
            Some((ps, coeff)) => {
                let angle = 2.0 * coeff * tau;
                match ps.as_slice() {
                    [Pauli::X] => Gate::one(GateKind::Rx(angle), self.qubits[0]),
                    [Pauli::Y] => Gate::one(GateKind::Ry(angle), self.qubits[0]),
                    [Pauli::Z] => Gate::one(GateKind::Rz(angle), self.qubits[0]),
                    [a, b] => Gate::two(GateKind::Rpp { paulis: [*a, *b], angle }, self.qubits[0], self.qubits[1]),
                    _ => unreachable!("identity letters are stripped"),
                }
            }
            None => {
                let dim = 1usize << self.qubits.len();
                let u = expm_hermitian_flat(&self.matrix, dim, tau);
                match self.qubits.as_slice() {
                    [q] => Gate::new(GateKind::Unitary1(u), vec![*q]),
                    qs => Gate::new(GateKind::Unitary2(u), qs.to_vec()),
                }
            }
        }
    }

    fn dense(&self, n: usize) -> DMatrix<C64> {
        embed(&self.matrix, &self.qubits, n)
    }
}

#[derive(Debug, Clone)]
pub struct ClusteredHamiltonian {
    pub n: usize,
    pub parties: Vec<Vec<usize>>,
    /// Terms inside one party, sorted by (party, qubits).
    pub intra: Vec<HamTerm>,
    /// Terms coupling two parties, sorted by (lower party, qubits).
    pub inter: Vec<HamTerm>,
    party_of: Vec<usize>,
}

impl ClusteredHamiltonian {
    pub fn new(parties: Vec<Vec<usize>>, terms: Vec<HamTerm>) -> Result<ClusteredHamiltonian> {
        let n = parties.iter().flatten().map(|&q| q + 1).max().unwrap_or(0);
        let mut party_of = vec![usize::MAX; n];
        for (p, qs) in parties.iter().enumerate() {
            for &q in qs {
                if party_of[q] != usize::MAX {
                    return Err(Error::InvalidHamiltonian(format!("qubit {q} in two parties")));
                }
                party_of[q] = p;
            }
        }
        if let Some(q) = party_of.iter().position(|&p| p == usize::MAX) {
            return Err(Error::InvalidHamiltonian(format!("qubit {q} belongs to no party")));
        }
        let mut intra = Vec::new();
        let mut inter = Vec::new();
        for t in terms {
            if t.qubits.iter().any(|&q| q >= n) || (t.qubits.len() == 2 && t.qubits[0] == t.qubits[1]) {
                return Err(Error::InvalidHamiltonian(format!("term on {:?} has invalid qubits", t.qubits)));
            }
            if t.norm() > 1.0 + NORM_TOL {
                return Err(Error::InvalidHamiltonian(format!("term on {:?} has norm {} > 1", t.qubits, t.norm())));
            }
            let ps: Vec<usize> = t.qubits.iter().map(|&q| party_of[q]).collect();
            if ps.iter().all(|&p| p == ps[0]) {
                intra.push(t);
            } else {
                inter.push(t);
            }
        }
        let key = |t: &HamTerm| (t.qubits.iter().map(|&q| party_of[q]).min().unwrap(), t.qubits.clone());
        intra.sort_by_key(key);
        inter.sort_by_key(key);
        Ok(ClusteredHamiltonian { n, parties, intra, inter, party_of })
    }

    pub fn party_of(&self, q: usize) -> usize {
        self.party_of[q]
    }

    /// `h_A = Σ ‖H^{(1)}_j‖`.
    pub fn h_a(&self) -> f64 {
        self.intra.iter().map(HamTerm::norm).sum()
    }

    /// `h_B = Σ ‖H^{(2)}_j‖`.
    pub fn h_b(&self) -> f64 {
        self.inter.iter().map(HamTerm::norm).sum()
    }

    /// `d'`: the largest number of terms acting on any single qubit.
    pub fn degree(&self) -> usize {
        let mut count = vec![0usize; self.n];
        for t in self.intra.iter().chain(&self.inter) {
            t.qubits.iter().for_each(|&q| count[q] += 1);
        }
        count.into_iter().max().unwrap_or(0)
    }

    /// Party graph with one edge per inter term.
    pub fn interaction_graph(&self) -> Multigraph {
        let edges = self
            .inter
            .iter()
            .map(|t| (self.party_of[t.qubits[0]], self.party_of[t.qubits[1]]))
            .collect();
        Multigraph { n: self.parties.len(), edges }
    }

    fn sum_dense(&self, terms: &[HamTerm]) -> DMatrix<C64> {
        let dim = 1usize << self.n;
        terms.iter().fold(DMatrix::zeros(dim, dim), |acc, t| acc + t.dense(self.n))
    }

    /// Dense `A = Σ H^{(1)}`.
    pub fn intra_matrix(&self) -> DMatrix<C64> {
        self.sum_dense(&self.intra)
    }

    /// Dense `B = Σ H^{(2)}`.
    pub fn inter_matrix(&self) -> DMatrix<C64> {
        self.sum_dense(&self.inter)
    }

    pub fn matrix(&self) -> DMatrix<C64> {
        self.intra_matrix() + self.inter_matrix()
    }

    /// `‖[A, B]‖`, bounded by `4 h_B d'`.
    pub fn commutator_norm(&self) -> f64 {
        let (a, b) = (self.intra_matrix(), self.inter_matrix());
        crate::linalg::spectral_norm(&(&a * &b - &b * &a))
    }

    pub fn from_json(text: &str) -> Result<ClusteredHamiltonian> {
        let raw: HamiltonianJson =
            serde_json::from_str(text).map_err(|e| Error::Parse(crate::circuit::describe_json_error(text, &e)))?;
        raw.into_hamiltonian()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermJson {
    pub qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pauli: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeff: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<[f64; 2]>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HamiltonianJson {
    pub parties: Vec<Vec<usize>>,
    pub terms: Vec<TermJson>,
}

impl HamiltonianJson {
    pub fn into_hamiltonian(self) -> Result<ClusteredHamiltonian> {
        let terms = self
            .terms
            .into_iter()
            .map(|t| match (t.pauli, t.matrix) {
                (Some(p), None) => HamTerm::pauli(&p, &t.qubits, t.coeff.unwrap_or(1.0)),
                (None, Some(m)) => {
                    let scale = t.coeff.unwrap_or(1.0);
                    HamTerm::hermitian(&t.qubits, m.iter().flatten().map(|[re, im]| c(*re, *im) * scale).collect())
                }
                _ => Err(Error::InvalidHamiltonian("each term needs exactly one of 'pauli' or 'matrix'".into())),
            })
            .collect::<Result<Vec<_>>>()?;
        ClusteredHamiltonian::new(self.parties, terms)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrotterFlags {
    /// `ε > d' t`: the time-step bound's precondition fails.
    pub epsilon_above_degree_time: bool,
    /// `ε > h_B t`: the product-formula bound's precondition fails.
    pub epsilon_above_strength_time: bool,
    /// A step count was raised to 1.
    pub clamped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrotterSteps {
    pub m1: usize,
    pub m2: usize,
    pub flags: TrotterFlags,
}

/// `m1 = ⌈4 d' h_B t²/ε⌉ + ⌈2 h_B² t²/ε⌉` and `m2 = ⌈2 h_A² (t/m1)² / (ε/m1)⌉`,
/// both at least 1.
pub fn trotter_steps(h_a: f64, h_b: f64, d_prime: usize, t: f64, epsilon: f64) -> TrotterSteps {
    let t2 = t * t;
    let raw_m1 = ceil_tol(4.0 * d_prime as f64 * h_b * t2 / epsilon) + ceil_tol(2.0 * h_b * h_b * t2 / epsilon);
    let m1 = (raw_m1 as usize).max(1);
    let raw_m2 = ceil_tol(2.0 * h_a * h_a * t2 / (m1 as f64 * epsilon));
    let m2 = (raw_m2 as usize).max(1);
    TrotterSteps {
        m1,
        m2,
        flags: TrotterFlags {
            epsilon_above_degree_time: epsilon > d_prime as f64 * t,
            epsilon_above_strength_time: epsilon > h_b * t,
            clamped: raw_m1 < 1 || raw_m2 < 1,
        },
    }
}

/// Gates of `Ũ` in time order: each of the `m1` outer steps runs the intra
/// product `m2` times, then the inter product.
pub fn build_trotter_circuit(h: &ClusteredHamiltonian, t: f64, m1: usize, m2: usize) -> Circuit {
    let mut circuit = Circuit::new(h.n).named(format!("trotter(t={t}, m1={m1}, m2={m2})"));
    let inner = t / (m1 as f64 * m2 as f64);
    let outer = t / m1 as f64;
    for _ in 0..m1 {
        for _ in 0..m2 {
            circuit.extend(h.intra.iter().map(|term| term.exp_gate(inner)));
        }
        circuit.extend(h.inter.iter().map(|term| term.exp_gate(outer)));
    }
    circuit
}

/// Dense `Ũ` without building the gate list.
pub fn trotter_unitary(h: &ClusteredHamiltonian, t: f64, m1: usize, m2: usize) -> DMatrix<C64> {
    let dim = 1usize << h.n;
    let product = |terms: &[HamTerm], tau: f64| {
        terms.iter().fold(DMatrix::identity(dim, dim), |acc: DMatrix<C64>, term| {
            let g = term.exp_gate(tau);
            embed(g.matrix(), g.targets(), h.n) * acc
        })
    };
    let inner = product(&h.intra, t / (m1 as f64 * m2 as f64));
    let outer = product(&h.inter, t / m1 as f64);
    let step = outer * matrix_power(&inner, m2);
    matrix_power(&step, m1)
}

fn matrix_power(m: &DMatrix<C64>, mut k: usize) -> DMatrix<C64> {
    let mut result = DMatrix::identity(m.nrows(), m.ncols());
    let mut base = m.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = &result * &base;
        }
        base = &base * &base;
        k >>= 1;
    }
    result
}

/// `‖e^{-iHt} − Ũ‖` in spectral norm.
pub fn trotter_error(h: &ClusteredHamiltonian, t: f64, m1: usize, m2: usize) -> f64 {
    let exact = expm_hermitian(&h.matrix(), t);
    crate::linalg::spectral_norm(&(exact - trotter_unitary(h, t, m1, m2)))
}

/// Observable of one party: a Hermitian `O` on the party's qubits with a
/// diagonalizing circuit `V` (`V O V†` diagonal, entries in `[-1, 1]`).
#[derive(Debug, Clone)]
pub struct PartyObservable {
    /// Party qubits; the local matrix uses qubit `qubits[i]` as bit `i`.
    pub qubits: Vec<usize>,
    pub matrix: DMatrix<C64>,
    /// Gates on global qubit indices.
    pub diagonalizer: Vec<Gate>,
    /// Diagonal of `V O V†` in the local bit order.
    eigenvalues: Vec<f64>,
}

impl PartyObservable {
    pub fn new(qubits: Vec<usize>, matrix: DMatrix<C64>, diagonalizer: Vec<Gate>) -> Result<PartyObservable> {
        let k = qubits.len();
        let dim = 1usize << k;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::InvalidHamiltonian(format!("observable must be {dim}×{dim}")));
        }
        let mut v = DMatrix::<C64>::identity(dim, dim);
        for g in &diagonalizer {
            let local: Option<Vec<usize>> = g.targets().iter().map(|q| qubits.iter().position(|x| x == q)).collect();
            let local = local.ok_or_else(|| Error::InvalidHamiltonian("diagonalizer leaves the party".into()))?;
            v = embed(g.matrix(), &local, k) * v;
        }
        let d = &v * &matrix * v.adjoint();
        let mut eigenvalues = Vec::with_capacity(dim);
        for i in 0..dim {
            for j in 0..dim {
                if i != j && d[(i, j)].norm() > 1e-9 {
                    return Err(Error::InvalidHamiltonian("diagonalizer does not diagonalize the observable".into()));
                }
            }
            let ev = d[(i, i)];
            if ev.im.abs() > 1e-9 || ev.re.abs() > 1.0 + 1e-9 {
                return Err(Error::InvalidHamiltonian(format!("observable eigenvalue {ev} outside [-1, 1]")));
            }
            eigenvalues.push(ev.re.clamp(-1.0, 1.0));
        }
        Ok(PartyObservable { qubits, matrix, diagonalizer, eigenvalues })
    }

    /// Tensor product of Paulis over the party qubits (label letter `i` on `qubits[i]`).
    pub fn pauli(qubits: Vec<usize>, label: &str) -> Result<PartyObservable> {
        let ps = crate::linalg::parse_pauli_string(label)
            .ok_or_else(|| Error::InvalidHamiltonian(format!("bad Pauli label '{label}'")))?;
        if ps.len() != qubits.len() {
            return Err(Error::InvalidHamiltonian(format!("label '{label}' does not cover the party")));
        }
        let k = qubits.len();
        let mut m = DMatrix::<C64>::identity(1 << k, 1 << k);
        let mut diag = Vec::new();
        for (i, p) in ps.iter().enumerate() {
            m = embed(&p.matrix(), &[i], k) * m;
            let change = crate::circuit::pauli_basis_change(&[*p]);
            diag.extend(change.into_iter().map(|g| g.remapped(|_| qubits[i])));
        }
        PartyObservable::new(qubits, m, diag)
    }

    /// Decomposable block: eigenvalue as a function of the party's measured bits.
    pub fn block(&self) -> Block {
        let k = self.qubits.len();
        let table = (0..1usize << k)
            .map(|t| {
                let local = (0..k).fold(0usize, |acc, i| acc | (((t >> (k - 1 - i)) & 1) << i));
                self.eigenvalues[local]
            })
            .collect();
        Block { qubits: self.qubits.clone(), table }
    }
}

#[derive(Debug, Clone)]
pub struct CorrelationTask {
    pub hamiltonian: ClusteredHamiltonian,
    /// Per-party preparation gates (global qubit indices), applied to `|0…0⟩`.
    pub preps: Vec<Vec<Gate>>,
    pub observables: Vec<PartyObservable>,
    pub t: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone)]
pub struct CorrelationOptions {
    /// Share of `ε` given to the Trotter error; the rest goes to estimation.
    pub trotter_fraction: f64,
    pub mode: Mode,
    pub seed: u64,
    /// Width of the simulated device.
    pub max_width: usize,
    pub samples: Option<u64>,
}

impl Default for CorrelationOptions {
    fn default() -> Self {
        CorrelationOptions { trotter_fraction: 0.5, mode: Mode::Montecarlo, seed: 0, max_width: 12, samples: None }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrelationReport {
    pub estimate: Estimate,
    pub m1: usize,
    pub m2: usize,
    pub flags: TrotterFlags,
    pub h_a: f64,
    pub h_b: f64,
    pub d_prime: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub cc: usize,
    /// Exponent `(h_B t)² cc / ε` of the predicted classical cost, constants omitted.
    pub cost_exponent: f64,
    /// Sampling overhead `∏_e Σ_k |c^e_k|` of the cut gates.
    pub overhead: f64,
    pub gates: usize,
    pub max_fragment_width: usize,
}

impl CorrelationTask {
    fn check(&self) -> Result<()> {
        let parties = self.hamiltonian.parties.len();
        if self.observables.len() != parties || self.preps.len() != parties {
            return Err(Error::InvalidArgument(format!("need one prep and one observable per party ({parties})")));
        }
        for (p, obs) in self.observables.iter().enumerate() {
            let mut a = obs.qubits.clone();
            let mut b = self.hamiltonian.parties[p].clone();
            a.sort_unstable();
            b.sort_unstable();
            if a != b {
                return Err(Error::InvalidArgument(format!("observable {p} does not cover party {p}")));
            }
        }
        for (p, gates) in self.preps.iter().enumerate() {
            if gates.iter().flat_map(|g| g.targets()).any(|&q| q >= self.hamiltonian.n || self.hamiltonian.party_of(q) != p) {
                return Err(Error::InvalidArgument(format!("preparation of party {p} leaves the party")));
            }
        }
        if !(self.epsilon > 0.0) || !(self.t >= 0.0) {
            return Err(Error::InvalidArgument("need ε > 0 and t ≥ 0".into()));
        }
        Ok(())
    }

    fn post(&self) -> PostProcess {
        PostProcess::Decomposable(self.observables.iter().map(PartyObservable::block).collect())
    }

    fn circuit_with(&self, evolution: Vec<Gate>) -> Circuit {
        let mut c = Circuit::new(self.hamiltonian.n).named("correlation");
        c.extend(self.preps.iter().flatten().cloned());
        c.extend(evolution);
        c.extend(self.observables.iter().flat_map(|o| o.diagonalizer.iter().cloned()));
        c
    }

    /// Exact correlation from the dense evolution `e^{-iHt}`.
    pub fn exact(&self) -> Result<f64> {
        self.check()?;
        let mut prep = StateVector::zero(self.hamiltonian.n);
        self.preps.iter().flatten().for_each(|g| prep.apply_gate(g));
        let u = expm_hermitian(&self.hamiltonian.matrix(), self.t);
        let evolved = &u * nalgebra::DVector::from_column_slice(prep.amplitudes());
        let mut sv = StateVector::from_amplitudes(evolved.as_slice().to_vec());
        self.observables.iter().flat_map(|o| &o.diagonalizer).for_each(|g| sv.apply_gate(g));
        Ok(sv.expectation(&self.post()))
    }
}

/// Cut-based correlation estimate: Trotter circuit with the error budget
/// split between Trotter error and estimation, every inter-party gate cut.
pub fn correlation(task: &CorrelationTask, opts: &CorrelationOptions) -> Result<CorrelationReport> {
    task.check()?;
    let h = &task.hamiltonian;
    if !(opts.trotter_fraction > 0.0 && opts.trotter_fraction < 1.0) {
        return Err(Error::InvalidArgument("trotter fraction must lie in (0, 1)".into()));
    }
    let eps_trotter = task.epsilon * opts.trotter_fraction;
    let eps_estimate = task.epsilon - eps_trotter;
    let steps = trotter_steps(h.h_a(), h.h_b(), h.degree(), task.t, eps_trotter);
    let trotter = build_trotter_circuit(h, task.t, steps.m1, steps.m2);
    let circuit = task.circuit_with(trotter.gates);
    let gates = circuit.len();
    let alg = QcAlgorithm::new(circuit, task.post())?;
    let net = build_network(&alg);
    let plan = plan_qubit_partition(&net, &h.parties)?;
    let cfg = EstimatorConfig {
        mode: opts.mode,
        epsilon: eps_estimate.min(1.0),
        seed: opts.seed,
        exact_entries: false,
        samples: opts.samples,
        backend: crate::backend::Backend::new(opts.max_width),
        ..EstimatorConfig::default()
    };
    let estimate = estimate(&plan, &cfg)?;
    let hb_t = h.h_b() * task.t;
    Ok(CorrelationReport {
        estimate,
        m1: steps.m1,
        m2: steps.m2,
        flags: steps.flags,
        h_a: h.h_a(),
        h_b: h.h_b(),
        d_prime: h.degree(),
        k: plan.k(),
        cc: plan.params.cc(),
        cost_exponent: hb_t * hb_t * plan.params.cc() as f64 / task.epsilon,
        overhead: plan.overhead(),
        gates,
        max_fragment_width: plan.recycled_width(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_formula() {
        // 4·2·1·1/0.5 = 16, 2·1·1/0.5 = 4
        let s = trotter_steps(0.0, 1.0, 2, 1.0, 0.5);
        assert_eq!(s.m1, 20);
        assert_eq!(s.m2, 1);
        let s = trotter_steps(1.0, 0.5, 1, 0.0, 0.1);
        assert_eq!((s.m1, s.m2), (1, 1));
        assert!(s.flags.clamped && s.flags.epsilon_above_degree_time);
    }

    #[test]
    fn single_z_term_matches_exponential() {
        let h = ClusteredHamiltonian::new(vec![vec![0]], vec![HamTerm::pauli("Z", &[0], 1.0).unwrap()]).unwrap();
        let c = build_trotter_circuit(&h, std::f64::consts::FRAC_PI_4, 1, 1);
        assert_eq!(c.len(), 1);
        let expected = expm_hermitian_flat(&Pauli::Z.matrix(), 2, std::f64::consts::FRAC_PI_4);
        assert!(crate::linalg::max_abs_diff(c.gates[0].matrix(), &expected) < 1e-12);
    }

    #[test]
    fn pauli_observable_block_values() {
        let o = PartyObservable::pauli(vec![3, 4], "XZ").unwrap();
        let b = o.block();
        // bits (q3, q4): 00 → +1, 01 → -1, 10 → -1, 11 → +1
        assert_eq!(b.table, vec![1.0, -1.0, -1.0, 1.0]);
        assert_eq!(o.diagonalizer.len(), 1);
        assert_eq!(o.diagonalizer[0].targets(), &[3]);
    }
}
