//! Hardware-efficient ansatz, SPSA, and cut evaluation of VQE energies.
//!
//! The ansatz is `U(θ) = U_D(θ_D) U_ENT ⋯ U_1(θ_1) U_ENT U_0(θ_0)` with
//! `U_0 = ⊗_j Z_j(θ_{0,1}) X_j(θ_{0,2})` and `U_k = ⊗_j Z_j(θ_{k,1}) X_j(θ_{k,2}) Z_j(θ_{k,3})`,
//! where `Z_j(β) = exp(-iβZ)` and `X_j(β) = exp(-iβX)`.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::backend::Backend;
use crate::circuit::{pauli_basis_change, pauli_observable_expectation_post, Circuit, Gate, GateKind, QcAlgorithm};
use crate::cutting::plan_qubit_partition;
use crate::error::{Error, Result};
use crate::estimator::{estimate_enumerate_with, estimate_tensor_contract_with, Entries, DEFAULT_BUDGET};
use crate::linalg::{c, eigh, Pauli, C64, ZERO};
use crate::network::build_network;
use crate::rng::{keyed, stream};

/// Default shots per fragment setting in shot-mode energies.
pub const DEFAULT_SHOTS: u64 = 8000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Entangler {
    /// `∏_i CZ(i, i+1)`.
    CzChain,
    /// `∏_{i<j} CNOT(i, j)` in lexicographic order.
    CnotLadder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub n: usize,
    #[serde(rename = "D")]
    pub depth: usize,
    pub entangler: Entangler,
    /// Layers `k ∈ 1..=D` whose entangler drops every gate crossing the partition.
    #[serde(default)]
    pub pruned: Vec<usize>,
    /// Qubit partition used for pruning and cutting; halves by default.
    #[serde(default)]
    pub partition: Vec<Vec<usize>>,
}

impl AnsatzSpec {
    pub fn new(n: usize, depth: usize, entangler: Entangler) -> AnsatzSpec {
        AnsatzSpec { n, depth, entangler, pruned: Vec::new(), partition: halves(n) }
    }

    pub fn with_pruned(mut self, layers: impl IntoIterator<Item = usize>) -> AnsatzSpec {
        self.pruned = layers.into_iter().collect();
        self
    }

    pub fn with_partition(mut self, partition: Vec<Vec<usize>>) -> AnsatzSpec {
        self.partition = partition;
        self
    }

    /// `(3D + 2)·n`.
    pub fn param_count(&self) -> usize {
        (3 * self.depth + 2) * self.n
    }

    /// Index of `θ^j_{k,comp}` (`comp` is 1-based as in the ansatz formula).
    pub fn param_index(&self, layer: usize, qubit: usize, comp: usize) -> usize {
        if layer == 0 {
            2 * qubit + comp - 1
        } else {
            2 * self.n + 3 * self.n * (layer - 1) + 3 * qubit + comp - 1
        }
    }

    fn partition_or_halves(&self) -> Vec<Vec<usize>> {
        if self.partition.is_empty() {
            halves(self.n)
        } else {
            self.partition.clone()
        }
    }

    fn side_of(&self) -> Vec<usize> {
        let mut side = vec![0; self.n];
        for (p, qs) in self.partition_or_halves().iter().enumerate() {
            qs.iter().filter(|&&q| q < self.n).for_each(|&q| side[q] = p);
        }
        side
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > 24 {
            return Err(Error::InvalidArgument(format!("ansatz width {} out of range", self.n)));
        }
        if let Some(k) = self.pruned.iter().find(|&&k| k == 0 || k > self.depth) {
            return Err(Error::InvalidArgument(format!("pruned layer {k} outside 1..={}", self.depth)));
        }
        let mut seen = vec![false; self.n];
        for &q in self.partition_or_halves().iter().flatten() {
            if q >= self.n || seen[q] {
                return Err(Error::InvalidArgument(format!("partition repeats or exceeds qubit {q}")));
            }
            seen[q] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidArgument("partition does not cover every qubit".into()));
        }
        Ok(())
    }

    /// Two-qubit gates of the entangler preceding layer `k` as `(a, b)` pairs.
    pub fn entangler_pairs(&self, k: usize) -> Vec<(usize, usize)> {
        let pairs: Vec<(usize, usize)> = match self.entangler {
            Entangler::CzChain => (0..self.n.saturating_sub(1)).map(|i| (i, i + 1)).collect(),
            Entangler::CnotLadder => {
                (0..self.n).flat_map(|i| (i + 1..self.n).map(move |j| (i, j))).collect()
            }
        };
        if self.pruned.contains(&k) {
            let side = self.side_of();
            pairs.into_iter().filter(|&(a, b)| side[a] == side[b]).collect()
        } else {
            pairs
        }
    }

    fn entangler_gate(&self, a: usize, b: usize) -> Gate {
        match self.entangler {
            Entangler::CzChain => Gate::two(GateKind::Cz, a, b),
            Entangler::CnotLadder => Gate::two(GateKind::Cnot, a, b),
        }
    }
}

fn halves(n: usize) -> Vec<Vec<usize>> {
    vec![(0..n / 2).collect(), (n / 2..n).collect()]
}

fn check_len(spec: &AnsatzSpec, theta: &[f64]) -> Result<()> {
    if theta.len() != spec.param_count() {
        return Err(Error::LengthMismatch { expected: spec.param_count(), got: theta.len() });
    }
    Ok(())
}

pub fn build_ansatz(spec: &AnsatzSpec, theta: &[f64]) -> Result<Circuit> {
    spec.validate()?;
    check_len(spec, theta)?;
    let n = spec.n;
    let mut circuit = Circuit::new(n).named(format!("ansatz(n={n}, D={})", spec.depth));
    let zrot = |q: usize, b: f64| Gate::one(GateKind::Rz(2.0 * b), q);
    let xrot = |q: usize, b: f64| Gate::one(GateKind::Rx(2.0 * b), q);
    for q in 0..n {
        circuit.push(xrot(q, theta[spec.param_index(0, q, 2)]));
        circuit.push(zrot(q, theta[spec.param_index(0, q, 1)]));
    }
    for k in 1..=spec.depth {
        for (a, b) in spec.entangler_pairs(k) {
            circuit.push(spec.entangler_gate(a, b));
        }
        for q in 0..n {
            circuit.push(zrot(q, theta[spec.param_index(k, q, 3)]));
            circuit.push(xrot(q, theta[spec.param_index(k, q, 2)]));
            circuit.push(zrot(q, theta[spec.param_index(k, q, 1)]));
        }
    }
    Ok(circuit)
}

/// `U(θ)|0…0⟩` with in-place rotation kernels; same state as running [`build_ansatz`].
pub fn ansatz_state(spec: &AnsatzSpec, theta: &[f64]) -> Result<Vec<C64>> {
    spec.validate()?;
    check_len(spec, theta)?;
    let n = spec.n;
    let mut amps = vec![ZERO; 1 << n];
    amps[0] = c(1.0, 0.0);
    for q in 0..n {
        rx_inplace(&mut amps, q, theta[spec.param_index(0, q, 2)]);
        rz_inplace(&mut amps, q, theta[spec.param_index(0, q, 1)]);
    }
    for k in 1..=spec.depth {
        for (a, b) in spec.entangler_pairs(k) {
            match spec.entangler {
                Entangler::CzChain => cz_inplace(&mut amps, a, b),
                Entangler::CnotLadder => cnot_inplace(&mut amps, a, b),
            }
        }
        for q in 0..n {
            rz_inplace(&mut amps, q, theta[spec.param_index(k, q, 3)]);
            rx_inplace(&mut amps, q, theta[spec.param_index(k, q, 2)]);
            rz_inplace(&mut amps, q, theta[spec.param_index(k, q, 1)]);
        }
    }
    Ok(amps)
}

/// `exp(-iβZ)` on qubit `q`.
fn rz_inplace(amps: &mut [C64], q: usize, beta: f64) {
    let (s, co) = beta.sin_cos();
    let lo = c(co, -s);
    let hi = c(co, s);
    for (i, a) in amps.iter_mut().enumerate() {
        *a *= if (i >> q) & 1 == 0 { lo } else { hi };
    }
}

/// `exp(-iβX)` on qubit `q`.
fn rx_inplace(amps: &mut [C64], q: usize, beta: f64) {
    let (s, co) = beta.sin_cos();
    let bit = 1usize << q;
    for i in 0..amps.len() {
        if i & bit == 0 {
            let (a0, a1) = (amps[i], amps[i | bit]);
            amps[i] = a0 * co + c(a1.im * s, -a1.re * s);
            amps[i | bit] = a1 * co + c(a0.im * s, -a0.re * s);
        }
    }
}

fn cz_inplace(amps: &mut [C64], a: usize, b: usize) {
    let mask = (1usize << a) | (1usize << b);
    for (i, x) in amps.iter_mut().enumerate() {
        if i & mask == mask {
            *x = -*x;
        }
    }
}

fn cnot_inplace(amps: &mut [C64], control: usize, target: usize) {
    let (cb, tb) = (1usize << control, 1usize << target);
    for i in 0..amps.len() {
        if i & cb != 0 && i & tb == 0 {
            amps.swap(i, i | tb);
        }
    }
}

/// `Σ_i α_i σ_i` over Pauli strings (letter `q` acts on qubit `q`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliSumHamiltonian {
    pub n: usize,
    pub terms: Vec<(f64, Vec<Pauli>)>,
}

/// Bit masks of a Pauli string: flips, phase flips, and the number of `Y`s.
#[derive(Debug, Clone, Copy)]
struct Masks {
    x: usize,
    z: usize,
    ny: u32,
}

impl Masks {
    fn of(ps: &[Pauli]) -> Masks {
        let mut m = Masks { x: 0, z: 0, ny: 0 };
        for (q, p) in ps.iter().enumerate() {
            match p {
                Pauli::I => {}
                Pauli::X => m.x |= 1 << q,
                Pauli::Z => m.z |= 1 << q,
                Pauli::Y => {
                    m.x |= 1 << q;
                    m.z |= 1 << q;
                    m.ny += 1;
                }
            }
        }
        m
    }

    /// `σ|i⟩ = phase(i)·|i ⊕ x⟩`.
    fn phase(&self, i: usize) -> C64 {
        let sign = if (i & self.z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        let iy = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)][(self.ny % 4) as usize];
        iy * sign
    }
}

impl PauliSumHamiltonian {
    pub fn new(n: usize, terms: Vec<(f64, Vec<Pauli>)>) -> Result<PauliSumHamiltonian> {
        if let Some((_, ps)) = terms.iter().find(|(_, ps)| ps.len() != n) {
            return Err(Error::LengthMismatch { expected: n, got: ps.len() });
        }
        if terms.iter().any(|(a, _)| !a.is_finite()) {
            return Err(Error::InvalidHamiltonian("non-finite coefficient".into()));
        }
        Ok(PauliSumHamiltonian { n, terms })
    }

    /// Parse `[(coeff, "XZIY"), …]`.
    pub fn from_labels(n: usize, terms: &[(f64, &str)]) -> Result<PauliSumHamiltonian> {
        let parsed = terms
            .iter()
            .map(|(a, s)| {
                let ps = crate::linalg::parse_pauli_string(s)
                    .ok_or_else(|| Error::InvalidHamiltonian(format!("bad Pauli label '{s}'")))?;
                Ok((*a, ps))
            })
            .collect::<Result<Vec<_>>>()?;
        PauliSumHamiltonian::new(n, parsed)
    }

    /// Parse `{"n": 3, "terms": [{"coeff": 0.5, "pauli": "XZI"}, …]}`.
    pub fn from_json(text: &str) -> Result<PauliSumHamiltonian> {
        #[derive(Deserialize)]
        struct Term {
            coeff: f64,
            pauli: String,
        }
        #[derive(Deserialize)]
        struct Raw {
            n: usize,
            terms: Vec<Term>,
        }
        let raw: Raw =
            serde_json::from_str(text).map_err(|e| Error::Parse(crate::circuit::describe_json_error(text, &e)))?;
        let terms: Vec<(f64, &str)> = raw.terms.iter().map(|t| (t.coeff, t.pauli.as_str())).collect();
        PauliSumHamiltonian::from_labels(raw.n, &terms)
    }

    pub fn to_json(&self) -> String {
        let terms: Vec<serde_json::Value> = self
            .labels()
            .into_iter()
            .map(|(coeff, pauli)| serde_json::json!({ "coeff": coeff, "pauli": pauli }))
            .collect();
        serde_json::json!({ "n": self.n, "terms": terms }).to_string()
    }

    /// `L` terms with `α ∈ [-1, 1]` and each letter uniform over `{I, X, Y, Z}`.
    pub fn random<R: Rng>(n: usize, l: usize, rng: &mut R) -> PauliSumHamiltonian {
        const LETTERS: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
        let terms = (0..l)
            .map(|_| {
                let a = rng.gen_range(-1.0..=1.0);
                (a, (0..n).map(|_| LETTERS[rng.gen_range(0..4)]).collect())
            })
            .collect();
        PauliSumHamiltonian { n, terms }
    }

    pub fn labels(&self) -> Vec<(f64, String)> {
        self.terms.iter().map(|(a, ps)| (*a, ps.iter().map(|p| p.to_char()).collect())).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        self.terms.iter().all(|(_, ps)| ps.iter().all(|p| matches!(p, Pauli::I | Pauli::Z)))
    }

    /// `⟨ψ|H|ψ⟩`.
    pub fn expectation(&self, amps: &[C64]) -> f64 {
        self.terms
            .iter()
            .map(|(a, ps)| {
                let m = Masks::of(ps);
                let v: C64 = amps.iter().enumerate().map(|(i, x)| amps[i ^ m.x].conj() * m.phase(i) * x).sum();
                a * v.re
            })
            .sum()
    }

    pub fn matrix(&self) -> DMatrix<C64> {
        let dim = 1usize << self.n;
        let mut h = DMatrix::zeros(dim, dim);
        for (a, ps) in &self.terms {
            let m = Masks::of(ps);
            for i in 0..dim {
                h[(i ^ m.x, i)] += m.phase(i) * *a;
            }
        }
        h
    }

    /// Smallest eigenvalue by dense diagonalization.
    pub fn ground_energy(&self) -> f64 {
        let (evals, _) = eigh(&self.matrix());
        evals.into_iter().fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnergyMode {
    /// Statevector of the whole register.
    Full,
    /// Fragments on the partition with exact fragment expectations.
    CutExact,
    /// Fragments on the partition, `shots` per fragment setting.
    CutShots { shots: u64, seed: u64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyEstimate {
    pub value: f64,
    pub stderr: f64,
    /// Fragment executions summed over terms (0 in full mode).
    pub fragments: u64,
    /// Largest number of cut coordinates over terms.
    #[serde(rename = "K")]
    pub k: usize,
    pub max_fragment_width: usize,
}

/// `⟨0|U(θ)† H U(θ)|0⟩`.
pub fn energy(spec: &AnsatzSpec, theta: &[f64], h: &PauliSumHamiltonian, mode: EnergyMode) -> Result<EnergyEstimate> {
    if h.n != spec.n {
        return Err(Error::LengthMismatch { expected: spec.n, got: h.n });
    }
    match mode {
        EnergyMode::Full => {
            let amps = ansatz_state(spec, theta)?;
            Ok(EnergyEstimate { value: h.expectation(&amps), stderr: 0.0, fragments: 0, k: 0, max_fragment_width: spec.n })
        }
        EnergyMode::CutExact | EnergyMode::CutShots { .. } => cut_energy(spec, theta, h, mode),
    }
}

fn cut_energy(spec: &AnsatzSpec, theta: &[f64], h: &PauliSumHamiltonian, mode: EnergyMode) -> Result<EnergyEstimate> {
    let ansatz = build_ansatz(spec, theta)?;
    let partition = spec.partition_or_halves();
    let backend = Backend::new(partition.iter().map(Vec::len).max().unwrap_or(0).max(2));
    let mut out = EnergyEstimate { value: 0.0, stderr: 0.0, fragments: 0, k: 0, max_fragment_width: 0 };
    let mut var = 0.0;
    for (t, (alpha, ps)) in h.terms.iter().enumerate() {
        if ps.iter().all(|&p| p == Pauli::I) {
            out.value += alpha;
            continue;
        }
        let mut circuit = ansatz.clone();
        circuit.extend(pauli_basis_change(ps));
        let label: String = ps.iter().map(|p| p.to_char()).collect();
        let alg = QcAlgorithm::new(circuit, pauli_observable_expectation_post(&label)?)?;
        let plan = plan_qubit_partition(&build_network(&alg), &partition)?;
        let est = match mode {
            EnergyMode::CutExact => estimate_enumerate_with(&plan, DEFAULT_BUDGET, &backend)?,
            EnergyMode::CutShots { shots, seed } => {
                let term_seed = keyed(seed, stream::INSTANCE, t as u64).gen();
                estimate_tensor_contract_with(&plan, Entries::Shots(shots), 1.0, term_seed, &backend)?
            }
            EnergyMode::Full => unreachable!(),
        };
        out.value += alpha * est.value;
        var += (alpha * est.stderr).powi(2);
        out.fragments += est.fragments;
        out.k = out.k.max(plan.k());
        out.max_fragment_width = out.max_fragment_width.max(plan.recycled_width());
    }
    out.stderr = var.sqrt();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpsaConfig {
    pub iterations: usize,
    /// `c_k = c / k^γ`.
    pub c: f64,
    pub gamma: f64,
    /// `a_k = a / k^α`.
    pub a: f64,
    pub alpha: f64,
    pub seed: u64,
    /// Keep `θ(k)` in every trace step.
    #[serde(default)]
    pub keep_theta: bool,
}

impl Default for SpsaConfig {
    fn default() -> Self {
        SpsaConfig { iterations: 200, c: 0.3, gamma: 0.5, a: 1.0, alpha: 0.3, seed: 0, keep_theta: false }
    }
}

impl SpsaConfig {
    /// Gains for the pruning experiment: 50 unit-scale terms make the default step overshoot.
    pub fn pruning() -> Self {
        SpsaConfig { iterations: 100_000, a: 0.01, ..SpsaConfig::default() }
    }

    pub fn c_k(&self, k: usize) -> f64 {
        self.c / (k as f64).powf(self.gamma)
    }

    pub fn a_k(&self, k: usize) -> f64 {
        self.a / (k as f64).powf(self.alpha)
    }

    /// `r(k)` with entries uniform in `{±1}`.
    pub fn perturbation(&self, k: usize, dim: usize) -> Vec<f64> {
        let mut rng = keyed(self.seed, stream::SPSA, k as u64);
        (0..dim).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect()
    }

    /// Starting point uniform in `[0, 2π)`.
    pub fn initial_theta(&self, dim: usize) -> Vec<f64> {
        let mut rng = keyed(self.seed, stream::SPSA, 0);
        (0..dim).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpsaStep {
    pub k: usize,
    pub f_plus: f64,
    pub f_minus: f64,
    /// `F(θ(k))` before the update.
    pub f_theta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpsaTrace {
    pub steps: Vec<SpsaStep>,
    pub theta: Vec<f64>,
}

/// SPSA on an arbitrary objective. Each step evaluates `F(θ ± c_k r)` and
/// `F(θ)` concurrently, then moves `θ ← θ − a_k (F⁺ − F⁻)/(2 c_k) · r`.
pub fn spsa_minimize<F>(objective: F, theta0: Vec<f64>, cfg: &SpsaConfig) -> Result<SpsaTrace>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let mut theta = theta0;
    let mut steps = Vec::with_capacity(cfg.iterations);
    for k in 1..=cfg.iterations {
        let r = cfg.perturbation(k, theta.len());
        let ck = cfg.c_k(k);
        let plus: Vec<f64> = theta.iter().zip(&r).map(|(t, r)| t + ck * r).collect();
        let minus: Vec<f64> = theta.iter().zip(&r).map(|(t, r)| t - ck * r).collect();
        let ((f_plus, f_minus), f_theta) =
            rayon::join(|| rayon::join(|| objective(&plus), || objective(&minus)), || objective(&theta));
        let (f_plus, f_minus, f_theta) = (f_plus?, f_minus?, f_theta?);
        steps.push(SpsaStep { k, f_plus, f_minus, f_theta, theta: cfg.keep_theta.then(|| theta.clone()) });
        let g = (f_plus - f_minus) / (2.0 * ck);
        let ak = cfg.a_k(k);
        theta.iter_mut().zip(&r).for_each(|(t, r)| *t -= ak * g * r);
    }
    Ok(SpsaTrace { steps, theta })
}

/// SPSA on the ansatz energy, starting from [`SpsaConfig::initial_theta`].
pub fn spsa_vqe(spec: &AnsatzSpec, h: &PauliSumHamiltonian, cfg: &SpsaConfig, mode: EnergyMode) -> Result<SpsaTrace> {
    spec.validate()?;
    let theta0 = cfg.initial_theta(spec.param_count());
    spsa_minimize(|theta| Ok(energy(spec, theta, h, mode)?.value), theta0, cfg)
}

/// CSV with columns `iteration,F_plus,F_minus,F_ideal,relative_error`.
pub fn trace_csv(trace: &SpsaTrace, v_opt: f64) -> String {
    let mut out = String::from("iteration,F_plus,F_minus,F_ideal,relative_error\n");
    for s in &trace.steps {
        out.push_str(&format!("{},{},{},{},{}\n", s.k, s.f_plus, s.f_minus, s.f_theta, relative_error(s.f_theta, v_opt)));
    }
    out
}

pub fn relative_error(value: f64, v_opt: f64) -> f64 {
    ((value - v_opt) / v_opt).abs()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub name: String,
    #[serde(rename = "D")]
    pub depth: usize,
    pub pruned: Vec<usize>,
}

impl Regime {
    /// Number of unpruned entanglers.
    pub fn full_layers(&self) -> usize {
        self.depth - self.pruned.len()
    }
}

/// `(D=9, D₁=9)`, `(D=9, D₁=3)` with `R = {1,2,4,6,8,9}`, and `(D=3, D₁=3)`.
pub fn pruning_regimes() -> Vec<Regime> {
    vec![
        Regime { name: "D9_D1_9".into(), depth: 9, pruned: vec![] },
        Regime { name: "D9_D1_3".into(), depth: 9, pruned: vec![1, 2, 4, 6, 8, 9] },
        Regime { name: "D3_D1_3".into(), depth: 3, pruned: vec![] },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruningConfig {
    pub n: usize,
    pub hamiltonians: usize,
    pub terms: usize,
    pub spsa: SpsaConfig,
    pub regimes: Vec<Regime>,
    /// Master seed for Hamiltonians and per-instance SPSA seeds.
    pub seed: u64,
}

impl Default for PruningConfig {
    fn default() -> Self {
        PruningConfig {
            n: 6,
            hamiltonians: 20,
            terms: 50,
            spsa: SpsaConfig::pruning(),
            regimes: pruning_regimes(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PruningReport {
    pub regimes: Vec<Regime>,
    /// Per regime: relative error of `F(θ(k))` averaged over Hamiltonians, per iteration.
    pub curves: Vec<Vec<f64>>,
    /// Ground energies of the sampled Hamiltonians.
    pub v_opt: Vec<f64>,
}

impl PruningReport {
    /// Mean of the averaged curve over its last `fraction` of iterations.
    pub fn final_value(&self, regime: usize, fraction: f64) -> f64 {
        let curve = &self.curves[regime];
        let tail = ((curve.len() as f64 * fraction).ceil() as usize).clamp(1, curve.len().max(1));
        curve[curve.len() - tail..].iter().sum::<f64>() / tail as f64
    }

    /// `iteration,<regime>,…`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration");
        self.regimes.iter().for_each(|r| out.push_str(&format!(",{}", r.name)));
        out.push('\n');
        let len = self.curves.first().map_or(0, Vec::len);
        for i in 0..len {
            out.push_str(&(i + 1).to_string());
            self.curves.iter().for_each(|c| out.push_str(&format!(",{}", c[i])));
            out.push('\n');
        }
        out
    }
}

/// Runs SPSA (full-register energies) for every regime on each random
/// Hamiltonian and averages the relative-error traces.
pub fn pruning_experiment(cfg: &PruningConfig) -> Result<PruningReport> {
    use rayon::prelude::*;
    let instances: Vec<(PauliSumHamiltonian, u64)> = (0..cfg.hamiltonians)
        .map(|i| {
            let mut rng = keyed(cfg.seed, stream::INSTANCE, i as u64);
            let h = PauliSumHamiltonian::random(cfg.n, cfg.terms, &mut rng);
            (h, rng.gen())
        })
        .collect();
    let v_opt: Vec<f64> = instances.iter().map(|(h, _)| h.ground_energy()).collect();
    let jobs: Vec<(usize, usize)> =
        (0..cfg.regimes.len()).flat_map(|r| (0..instances.len()).map(move |i| (r, i))).collect();
    let traces: Vec<Vec<f64>> = jobs
        .par_iter()
        .map(|&(r, i)| {
            let regime = &cfg.regimes[r];
            let spec = AnsatzSpec::new(cfg.n, regime.depth, Entangler::CnotLadder).with_pruned(regime.pruned.clone());
            let spsa = SpsaConfig { seed: instances[i].1, keep_theta: false, ..cfg.spsa };
            let trace = spsa_vqe(&spec, &instances[i].0, &spsa, EnergyMode::Full)?;
            Ok(trace.steps.iter().map(|s| relative_error(s.f_theta, v_opt[i])).collect())
        })
        .collect::<Result<_>>()?;
    let count = instances.len().max(1) as f64;
    let curves = (0..cfg.regimes.len())
        .map(|r| {
            let mut avg = vec![0.0; cfg.spsa.iterations];
            for t in &traces[r * instances.len()..(r + 1) * instances.len()] {
                avg.iter_mut().zip(t).for_each(|(a, x)| *a += x / count);
            }
            avg
        })
        .collect();
    Ok(PruningReport { regimes: cfg.regimes.clone(), curves, v_opt })
}
