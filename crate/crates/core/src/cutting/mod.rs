//! Wire and gate cuts, and the fragment circuits they produce.
//!
//! A wire cut replaces the identity channel on a qubit by
//! `Φ(A) = Σ_i c_i Tr(A O_i) ρ_i` over the eight-entry table of
//! [`cut_rule_table`]: the upstream fragment measures `O_i` and the
//! downstream fragment prepares `ρ_i`. A split gate shares a term index of
//! its [`gate_cut::GateCutRule`] between the fragments holding its two sides.
//!
//! Each cut is a *coordinate* with its own alphabet (8 for wires, 6 for the
//! specialized gate rules). A full assignment `s` picks one entry per
//! coordinate; its weight is `c_s = ∏_e c^e_{s_e}`.

pub mod gate_cut;

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use crate::backend::{FragmentJob, Instr, PrepState};
use crate::circuit::{table_index, PostProcess};
use crate::error::{Error, Result};
use crate::linalg::{kron, Pauli, C64, ZERO};
use crate::network::{
    cluster_params, cut_sites, site_clusters, ClusterParams, Clustering, CutSite, ObservableKind, TensorNetwork,
    VertexKind,
};
pub use gate_cut::{cz_decomposition, GateCutRule, GateCutTerm, LocalOp};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WireCutEntry {
    pub observable: Pauli,
    pub state: PrepState,
    pub coeff: f64,
}

/// The eight `(O_i, ρ_i, c_i)` entries of the wire cut.
pub const WIRE_CUT: [WireCutEntry; 8] = [
    WireCutEntry { observable: Pauli::I, state: PrepState::Zero, coeff: 0.5 },
    WireCutEntry { observable: Pauli::I, state: PrepState::One, coeff: 0.5 },
    WireCutEntry { observable: Pauli::X, state: PrepState::Plus, coeff: 0.5 },
    WireCutEntry { observable: Pauli::X, state: PrepState::Minus, coeff: -0.5 },
    WireCutEntry { observable: Pauli::Y, state: PrepState::PlusI, coeff: 0.5 },
    WireCutEntry { observable: Pauli::Y, state: PrepState::MinusI, coeff: -0.5 },
    WireCutEntry { observable: Pauli::Z, state: PrepState::Zero, coeff: 0.5 },
    WireCutEntry { observable: Pauli::Z, state: PrepState::One, coeff: -0.5 },
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutRule {
    pub entries: [WireCutEntry; 8],
}

impl CutRule {
    /// `Σ_i c_i (O_i ⊗ ρ_i)`, which equals SWAP.
    pub fn swap_sum(&self) -> Vec<C64> {
        let mut out = vec![ZERO; 16];
        for e in &self.entries {
            let term = kron(&e.observable.matrix(), 2, &e.state.projector(), 2);
            for (o, t) in out.iter_mut().zip(term) {
                *o += t * e.coeff;
            }
        }
        out
    }

    /// `Φ(A) = Σ_i c_i Tr(A O_i) ρ_i` for a 2×2 matrix `A`.
    pub fn reconstruct(&self, a: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; 4];
        for e in &self.entries {
            let tr = crate::linalg::trace(&crate::linalg::matmul(a, &e.observable.matrix(), 2), 2);
            for (o, p) in out.iter_mut().zip(e.state.projector()) {
                *o += p * tr * e.coeff;
            }
        }
        out
    }
}

pub fn cut_rule_table() -> CutRule {
    CutRule { entries: WIRE_CUT }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CoordKind {
    Wire,
    Gate(GateCutRule),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Coordinate {
    pub site: CutSite,
    /// `(source, target)` clusters for wires, `(first side, second side)` for gates.
    pub clusters: (usize, usize),
    pub kind: CoordKind,
}

impl Coordinate {
    pub fn coeffs(&self) -> Vec<f64> {
        match &self.kind {
            CoordKind::Wire => WIRE_CUT.iter().map(|e| e.coeff).collect(),
            CoordKind::Gate(rule) => rule.coeffs(),
        }
    }

    pub fn alphabet(&self) -> usize {
        match &self.kind {
            CoordKind::Wire => 8,
            CoordKind::Gate(rule) => rule.terms.len(),
        }
    }

    /// `Σ_k |c_k|`: 4 for a wire cut.
    pub fn overhead(&self) -> f64 {
        self.coeffs().iter().map(|c| c.abs()).sum()
    }

    /// Cluster that absorbs this coordinate's coefficient in tensor contraction.
    pub fn owner(&self) -> usize {
        self.clusters.0.min(self.clusters.1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FragOp {
    Gate { wires: Vec<usize>, gate: usize },
    /// Downstream end of a wire cut.
    Prep { wire: usize, coord: usize },
    /// Upstream end of a wire cut; frees the wire.
    Measure { wire: usize, coord: usize },
    /// One side of a split gate.
    Half { wires: Vec<usize>, coord: usize, side: usize },
}

/// Runnable fragment template of one cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct Fragment {
    pub cluster: usize,
    pub width: usize,
    pub ops: Vec<FragOp>,
    /// `(wire, original qubit)` read out at the end, ordered by qubit.
    pub terminals: Vec<(usize, usize)>,
    /// Cut coordinates touching this fragment, ascending; a local setting
    /// lists one entry per coordinate in this order.
    pub coords: Vec<usize>,
    /// Decomposable blocks whose observable lives in this cluster.
    pub blocks: Vec<usize>,
}

impl Fragment {
    /// Local settings count `∏ alphabet`.
    pub fn settings(&self, plan: &CutPlan) -> usize {
        self.coords.iter().map(|&c| plan.coords[c].alphabet()).product()
    }

    /// Decode a mixed-radix local setting index (first coordinate most significant).
    pub fn decode(&self, plan: &CutPlan, mut index: usize) -> Vec<usize> {
        let mut digits = vec![0; self.coords.len()];
        for (slot, &c) in self.coords.iter().enumerate().rev() {
            let a = plan.coords[c].alphabet();
            digits[slot] = index % a;
            index /= a;
        }
        digits
    }

    pub fn encode(&self, plan: &CutPlan, digits: &[usize]) -> usize {
        self.coords.iter().zip(digits).fold(0, |acc, (&c, &d)| acc * plan.coords[c].alphabet() + d)
    }

    /// Restrict a global assignment to this fragment's coordinates.
    pub fn local(&self, s: &[usize]) -> Vec<usize> {
        self.coords.iter().map(|&c| s[c]).collect()
    }

    /// Concrete job for a local setting.
    pub fn job<'a>(&'a self, plan: &'a CutPlan, local: &[usize]) -> FragmentJob<'a> {
        let pick = |coord: usize| local[self.coords.binary_search(&coord).expect("own coordinate")];
        let gates = &plan.net.alg.circuit.gates;
        let mut instrs = Vec::with_capacity(self.ops.len());
        for op in &self.ops {
            match op {
                FragOp::Gate { wires, gate } => instrs.push(Instr::Unitary { wires, matrix: gates[*gate].matrix() }),
                FragOp::Prep { wire, coord } => {
                    instrs.push(Instr::Prep { wire: *wire, state: WIRE_CUT[pick(*coord)].state })
                }
                FragOp::Measure { wire, coord } => {
                    instrs.push(Instr::MeasureDiscard { wire: *wire, pauli: WIRE_CUT[pick(*coord)].observable })
                }
                FragOp::Half { wires, coord, side } => {
                    let CoordKind::Gate(rule) = &plan.coords[*coord].kind else { unreachable!("split gate coordinate") };
                    for lop in &rule.terms[pick(*coord)].sides[*side] {
                        instrs.push(match lop {
                            LocalOp::Unitary(m) => Instr::Unitary { wires, matrix: m },
                            LocalOp::MeasureKeep(p) => Instr::MeasureKeep { wire: wires[0], pauli: *p },
                        });
                    }
                }
            }
        }
        FragmentJob { width: self.width, instrs, terminals: self.terminals.iter().map(|t| t.0).collect() }
    }

    /// Spread packed terminal bits onto the original qubit positions.
    pub fn global_bits(&self, local: u64) -> u64 {
        self.terminals
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &(_, q))| acc | (((local >> i) & 1) << q))
    }

    /// `∏_{owned blocks} f_b` as a function of packed terminal bits.
    pub fn block_factor(&self, post: &PostProcess, local: u64) -> f64 {
        let y = self.global_bits(local);
        self.blocks
            .iter()
            .map(|&b| {
                let block = &post.blocks()[b];
                block.table[table_index(&block.qubits, y)]
            })
            .product()
    }
}

/// A clustering expanded into cut coordinates and per-cluster fragments.
#[derive(Debug, Clone)]
pub struct CutPlan {
    pub net: TensorNetwork,
    pub clustering: Clustering,
    pub params: ClusterParams,
    pub coords: Vec<Coordinate>,
    pub fragments: Vec<Fragment>,
}

/// Expand a clustering. Split gates must have a specialized rule.
pub fn plan_cuts(net: &TensorNetwork, cl: &Clustering) -> Result<CutPlan> {
    let params = cluster_params(net, cl);
    let mut coords = Vec::new();
    let mut edge_coord = BTreeMap::new();
    let mut gate_coord = BTreeMap::new();
    for site in cut_sites(net, cl) {
        let clusters = site_clusters(net, cl, site);
        let kind = match site {
            CutSite::Wire { edge } => {
                edge_coord.insert(edge, coords.len());
                CoordKind::Wire
            }
            CutSite::Gate { vertex } => {
                let VertexKind::Gate { index } = net.vertices[vertex].kind else { unreachable!() };
                let gate = &net.alg.circuit.gates[index];
                let rule = gate_cut::rule_for(gate).ok_or_else(|| {
                    Error::InvalidClustering(format!(
                        "gate {index} ({}) has no split rule; give it its own cluster instead",
                        gate.kind().name()
                    ))
                })?;
                gate_coord.insert(vertex, coords.len());
                CoordKind::Gate(rule)
            }
        };
        coords.push(Coordinate { site, clusters, kind });
    }
    let fragments = (0..cl.r())
        .map(|j| FragmentBuilder::new(net, cl, &edge_coord, &gate_coord, j).build())
        .collect();
    Ok(CutPlan { net: net.clone(), clustering: cl.clone(), params, coords, fragments })
}

/// Plan for a qubit partition (see [`Clustering::from_qubit_partition`]).
pub fn plan_qubit_partition(net: &TensorNetwork, parts: &[Vec<usize>]) -> Result<CutPlan> {
    plan_cuts(net, &Clustering::from_qubit_partition(net, parts)?)
}

struct FragmentBuilder<'a> {
    net: &'a TensorNetwork,
    cl: &'a Clustering,
    edge_coord: &'a BTreeMap<usize, usize>,
    gate_coord: &'a BTreeMap<usize, usize>,
    j: usize,
    live: Vec<Option<usize>>,
    free: VecDeque<usize>,
    width: usize,
    ops: Vec<FragOp>,
    terminals: Vec<(usize, usize)>,
}

impl<'a> FragmentBuilder<'a> {
    fn new(
        net: &'a TensorNetwork,
        cl: &'a Clustering,
        edge_coord: &'a BTreeMap<usize, usize>,
        gate_coord: &'a BTreeMap<usize, usize>,
        j: usize,
    ) -> Self {
        FragmentBuilder {
            net,
            cl,
            edge_coord,
            gate_coord,
            j,
            live: vec![None; net.n()],
            free: VecDeque::new(),
            width: 0,
            ops: Vec::new(),
            terminals: Vec::new(),
        }
    }

    /// Recycled wire (FIFO) or a new one. Freed wires are already reset to |0⟩.
    fn alloc(&mut self) -> usize {
        self.free.pop_front().unwrap_or_else(|| {
            self.width += 1;
            self.width - 1
        })
    }

    /// Wire currently holding qubit `q`; inputs are allocated on first use.
    fn wire(&mut self, q: usize) -> usize {
        match self.live[q] {
            Some(w) => w,
            None => {
                let w = self.alloc();
                self.live[q] = Some(w);
                w
            }
        }
    }

    fn owns(&self, v: usize, port: usize) -> bool {
        self.cl.port_cluster(v, port) == Some(self.j)
    }

    fn build(mut self) -> Fragment {
        let net = self.net;
        let final_obs = net.final_observable;
        for v in 0..net.vertices.len() {
            let vertex = &net.vertices[v];
            if let VertexKind::Input { .. } = vertex.kind {
                continue;
            }
            let mut ports = Vec::new();
            for (p, &e) in net.in_edges(v).iter().enumerate() {
                let edge = net.edges[e];
                let q = edge.qubit;
                let src_here = self.owns(edge.src, edge.src_port);
                let dst_here = Some(v) != final_obs && self.owns(v, p);
                let src_is_input = matches!(net.vertices[edge.src].kind, VertexKind::Input { .. });
                if Some(v) == final_obs {
                    if src_here {
                        let w = self.wire(q);
                        self.terminals.push((w, q));
                        self.live[q] = None;
                    }
                    continue;
                }
                if src_here && !dst_here && src_is_input {
                    // A cut leaving an input: measure a fresh |0⟩ wire.
                    let w = self.alloc();
                    self.ops.push(FragOp::Measure { wire: w, coord: self.edge_coord[&e] });
                    self.free.push_back(w);
                }
                if dst_here {
                    if !src_here {
                        let w = self.alloc();
                        self.ops.push(FragOp::Prep { wire: w, coord: self.edge_coord[&e] });
                        self.live[q] = Some(w);
                    } else {
                        self.wire(q);
                    }
                    ports.push(p);
                }
            }
            if ports.is_empty() {
                continue;
            }
            match vertex.kind {
                VertexKind::Gate { index } => {
                    let wires: Vec<usize> = ports.iter().map(|&p| self.live[vertex.qubits[p]].unwrap()).collect();
                    match self.gate_coord.get(&v) {
                        Some(&coord) => self.ops.push(FragOp::Half { wires, coord, side: ports[0] }),
                        None => self.ops.push(FragOp::Gate { wires, gate: index }),
                    }
                    for &p in &ports {
                        let e = net.out_edges(v)[p];
                        let edge = net.edges[e];
                        if Some(edge.dst) != final_obs && !self.owns(edge.dst, edge.dst_port) {
                            let q = edge.qubit;
                            let w = self.live[q].take().unwrap();
                            self.ops.push(FragOp::Measure { wire: w, coord: self.edge_coord[&e] });
                            self.free.push_back(w);
                        }
                    }
                }
                VertexKind::Observable(_) => {
                    for &p in &ports {
                        let q = vertex.qubits[p];
                        let w = self.live[q].take().unwrap();
                        self.terminals.push((w, q));
                    }
                }
                VertexKind::Input { .. } => unreachable!(),
            }
        }
        self.terminals.sort_by_key(|t| t.1);
        let mut coords: Vec<usize> = self
            .ops
            .iter()
            .filter_map(|op| match op {
                FragOp::Prep { coord, .. } | FragOp::Measure { coord, .. } | FragOp::Half { coord, .. } => Some(*coord),
                FragOp::Gate { .. } => None,
            })
            .collect();
        coords.sort_unstable();
        coords.dedup();
        let blocks = net
            .vertices
            .iter()
            .enumerate()
            .filter_map(|(v, vx)| match vx.kind {
                VertexKind::Observable(ObservableKind::Block(b)) if self.cl.cluster_of(v) == Some(self.j) => Some(b),
                _ => None,
            })
            .collect();
        Fragment {
            cluster: self.j,
            width: self.width,
            ops: self.ops,
            terminals: self.terminals,
            coords,
            blocks,
        }
    }
}

/// Fragments of one full assignment with its weights.
#[derive(Debug, Clone)]
pub struct Instantiation<'a> {
    pub jobs: Vec<FragmentJob<'a>>,
    /// `c_s = ∏_e c^e_{s_e}`.
    pub coefficient: f64,
    /// `c_s / ∏_e (1/|alphabet-weight|)`: the Monte Carlo multiplier `8^K c_s`
    /// for pure wire cuts.
    pub weight: f64,
}

impl CutPlan {
    pub fn k(&self) -> usize {
        self.coords.len()
    }

    pub fn r(&self) -> usize {
        self.fragments.len()
    }

    /// Largest fragment width after recycling.
    pub fn recycled_width(&self) -> usize {
        self.fragments.iter().map(|f| f.width).max().unwrap_or(0)
    }

    /// Number of full assignments `∏_e |alphabet_e|`.
    pub fn assignment_count(&self) -> f64 {
        self.coords.iter().map(|c| c.alphabet() as f64).product()
    }

    /// `∏_e Σ_k |c^e_k|`; equals `2^{2K}` for wire cuts only.
    pub fn overhead(&self) -> f64 {
        self.coords.iter().map(|c| c.overhead()).product()
    }

    pub fn coefficient(&self, s: &[usize]) -> f64 {
        self.coords.iter().zip(s).map(|(c, &k)| c.coeffs()[k]).product()
    }

    fn check_assignment(&self, s: &[usize]) -> Result<()> {
        if s.len() != self.coords.len() {
            return Err(Error::IndexOutOfRange(format!("assignment has {} entries, plan has {} cuts", s.len(), self.k())));
        }
        for (e, (&k, c)) in s.iter().zip(&self.coords).enumerate() {
            if k >= c.alphabet() {
                return Err(Error::IndexOutOfRange(format!("entry {k} at cut {e} exceeds alphabet {}", c.alphabet())));
            }
        }
        Ok(())
    }

    /// Bind every fragment's slots to the entries of `s` (0-based per coordinate).
    pub fn instantiate(&self, s: &[usize]) -> Result<Instantiation<'_>> {
        self.check_assignment(s)?;
        let coefficient = self.coefficient(s);
        let jobs = self.fragments.iter().map(|f| f.job(self, &f.local(s))).collect();
        Ok(Instantiation { jobs, coefficient, weight: coefficient.signum() * self.overhead() })
    }

    /// Terminal-reading fragments of the final observable.
    pub fn general_readers(&self) -> Vec<usize> {
        if self.net.final_observable.is_none() {
            return Vec::new();
        }
        self.fragments.iter().filter(|f| !f.terminals.is_empty()).map(|f| f.cluster).collect()
    }

    /// Tensor contraction needs the final observable read by at most one cluster.
    pub fn require_separable(&self) -> Result<()> {
        if self.general_readers().len() > 1 {
            Err(Error::ClustersNotSeparable)
        } else {
            Ok(())
        }
    }

    /// JSON summary: clusters, cuts, K, d, cc bounds.
    pub fn summary(&self) -> PlanSummary {
        PlanSummary {
            clusters: self.clustering.clusters(),
            split: self.clustering.split_gates().iter().map(|(&v, s)| [v, s[0], s[1]]).collect(),
            cut_edges: self
                .coords
                .iter()
                .filter_map(|c| match c.site {
                    CutSite::Wire { edge } => {
                        let e = self.net.edges[edge];
                        Some(CutEdgeSummary { edge, src: e.src, dst: e.dst, qubit: e.qubit })
                    }
                    CutSite::Gate { .. } => None,
                })
                .collect(),
            cut_gates: self
                .coords
                .iter()
                .filter_map(|c| match c.site {
                    CutSite::Gate { vertex } => Some(vertex),
                    CutSite::Wire { .. } => None,
                })
                .collect(),
            k: self.params.k,
            d: self.params.d,
            d_recycled: self.recycled_width(),
            r: self.params.r,
            cc_upper: self.params.cc_upper,
            cc_exact: self.params.cc_exact,
            overhead: self.overhead(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CutEdgeSummary {
    pub edge: usize,
    pub src: usize,
    pub dst: usize,
    pub qubit: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct PlanSummary {
    pub clusters: Vec<Vec<usize>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub split: Vec<[usize; 3]>,
    pub cut_edges: Vec<CutEdgeSummary>,
    pub cut_gates: Vec<usize>,
    #[serde(rename = "K")]
    pub k: usize,
    pub d: usize,
    pub d_recycled: usize,
    pub r: usize,
    pub cc_upper: usize,
    pub cc_exact: Option<usize>,
    pub overhead: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::GateKind;
    use crate::linalg::{c, max_abs_diff};

    #[test]
    fn swap_identity() {
        let swap = GateKind::Swap.matrix();
        assert!(max_abs_diff(&cut_rule_table().swap_sum(), &swap) < 1e-12);
    }

    #[test]
    fn entry_four_is_minus_x() {
        let e = cut_rule_table().entries[3];
        assert_eq!((e.observable, e.state, e.coeff), (Pauli::X, PrepState::Minus, -0.5));
    }

    #[test]
    fn identity_channel_reconstructed() {
        let a = [ZERO, c(1.0, 0.0), ZERO, ZERO];
        assert!(max_abs_diff(&cut_rule_table().reconstruct(&a), &a) < 1e-12);
    }
}
