//! Tensor-network view of a QC algorithm.
//!
//! Every qubit wire segment is an edge carrying an index `α ∈ {0,1}²`, stored
//! flat as `2·α¹ + α²` and standing for the elementary matrix `|α¹⟩⟨α²|`.
//! Vertices are input states (◁), gates (□) and observables (▷):
//!
//! - `A(ρ)_α = ⟨α¹|ρ|α²⟩`
//! - `A(U)_{αβ} = Tr[U M(α) U† M(β)†] = ⟨β¹|U|α¹⟩ · conj⟨β²|U|α²⟩`
//! - `A(O)_β = ⟨β²|O|β¹⟩`
//!
//! Vertex ids follow time order: inputs `0..n`, gates `n..n+m`, observables
//! after. A general post-processing function is one final observable `O_f`
//! (never materialized for large `n`); a decomposable one gives one observable
//! per block plus an identity observable for every qubit no block reads.

pub mod graph;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::backend::statevector::StateVector;
use crate::circuit::{PostProcess, QcAlgorithm};
use crate::error::{Error, Result};
use crate::linalg::{C64, ONE, ZERO};
use crate::tensor::DenseTensor;
pub use graph::{contract_with_order, contraction_complexity, CcMode, ContractionOrder, Multigraph};

/// Default qubit limit of the brute-force oracle.
pub const DEFAULT_ORACLE_LIMIT: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservableKind {
    /// The final observable of a general post-processing function.
    General,
    /// Observable of decomposable block `j`.
    Block(usize),
    /// Identity on a qubit not read by any block.
    Trace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexKind {
    Input { qubit: usize },
    Gate { index: usize },
    Observable(ObservableKind),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub kind: VertexKind,
    /// Qubit carried by each port (in-ports and out-ports share this order).
    pub qubits: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub src: usize,
    pub src_port: usize,
    pub dst: usize,
    pub dst_port: usize,
    pub qubit: usize,
}

#[derive(Debug, Clone)]
pub struct TensorNetwork {
    pub alg: QcAlgorithm,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    pub final_observable: Option<usize>,
    in_edges: Vec<Vec<usize>>,
    out_edges: Vec<Vec<usize>>,
}

/// Build the network of a validated algorithm.
pub fn build_network(alg: &QcAlgorithm) -> TensorNetwork {
    let n = alg.circuit.n;
    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    let mut last: Vec<(usize, usize)> = (0..n).map(|q| (q, 0)).collect();
    for q in 0..n {
        vertices.push(Vertex { kind: VertexKind::Input { qubit: q }, qubits: vec![q] });
    }
    let mut attach = |vertices: &mut Vec<Vertex>, edges: &mut Vec<Edge>, kind: VertexKind, qubits: Vec<usize>| {
        let v = vertices.len();
        for (port, &q) in qubits.iter().enumerate() {
            let (src, src_port) = last[q];
            edges.push(Edge { src, src_port, dst: v, dst_port: port, qubit: q });
            last[q] = (v, port);
        }
        vertices.push(Vertex { kind, qubits });
        v
    };
    for (index, gate) in alg.circuit.gates.iter().enumerate() {
        attach(&mut vertices, &mut edges, VertexKind::Gate { index }, gate.targets().to_vec());
    }
    let mut final_observable = None;
    match &alg.post {
        PostProcess::General(_) => {
            let v = attach(&mut vertices, &mut edges, VertexKind::Observable(ObservableKind::General), (0..n).collect());
            final_observable = Some(v);
        }
        PostProcess::Decomposable(blocks) => {
            let mut covered = vec![false; n];
            for (j, b) in blocks.iter().enumerate() {
                b.qubits.iter().for_each(|&q| covered[q] = true);
                attach(&mut vertices, &mut edges, VertexKind::Observable(ObservableKind::Block(j)), b.qubits.clone());
            }
            for q in (0..n).filter(|&q| !covered[q]) {
                attach(&mut vertices, &mut edges, VertexKind::Observable(ObservableKind::Trace), vec![q]);
            }
        }
    }
    let mut in_edges: Vec<Vec<usize>> = vertices.iter().map(|v| vec![usize::MAX; v.qubits.len()]).collect();
    let mut out_edges: Vec<Vec<usize>> = vertices.iter().map(|v| vec![usize::MAX; v.qubits.len()]).collect();
    for (e, edge) in edges.iter().enumerate() {
        in_edges[edge.dst][edge.dst_port] = e;
        out_edges[edge.src][edge.src_port] = e;
    }
    TensorNetwork { alg: alg.clone(), vertices, edges, final_observable, in_edges, out_edges }
}

impl TensorNetwork {
    pub fn n(&self) -> usize {
        self.alg.circuit.n
    }

    /// Edge entering `v` at each port (none for inputs).
    pub fn in_edges(&self, v: usize) -> &[usize] {
        match self.vertices[v].kind {
            VertexKind::Input { .. } => &[],
            _ => &self.in_edges[v],
        }
    }

    /// Edge leaving `v` at each port (none for observables).
    pub fn out_edges(&self, v: usize) -> &[usize] {
        match self.vertices[v].kind {
            VertexKind::Observable(_) => &[],
            _ => &self.out_edges[v],
        }
    }

    pub fn count(&self, pred: impl Fn(&VertexKind) -> bool) -> usize {
        self.vertices.iter().filter(|v| pred(&v.kind)).count()
    }

    pub fn is_observable(&self, v: usize) -> bool {
        matches!(self.vertices[v].kind, VertexKind::Observable(_))
    }

    /// Dense tensor of vertex `v`, labeled by edge ids (in-ports, then out-ports).
    pub fn vertex_tensor(&self, v: usize) -> Result<DenseTensor<C64>> {
        let vertex = &self.vertices[v];
        let k = vertex.qubits.len();
        match vertex.kind {
            VertexKind::Input { .. } => {
                DenseTensor::new(self.out_edges(v).to_vec(), vec![4], vec![ONE, ZERO, ZERO, ZERO])
            }
            VertexKind::Gate { index } => {
                let u = self.alg.circuit.gates[index].matrix();
                let dim = 1usize << k;
                let mut labels = self.in_edges(v).to_vec();
                labels.extend_from_slice(self.out_edges(v));
                let mut data = Vec::with_capacity(1 << (4 * k));
                for idx in 0..(1usize << (4 * k)) {
                    let (alpha, beta) = (idx >> (2 * k), idx & ((1 << (2 * k)) - 1));
                    let (a1, a2) = split_pairs(alpha, k);
                    let (b1, b2) = split_pairs(beta, k);
                    data.push(u[b1 * dim + a1] * u[b2 * dim + a2].conj());
                }
                DenseTensor::new(labels, vec![4; 2 * k], data)
            }
            VertexKind::Observable(kind) => {
                if k > 6 {
                    return Err(Error::OracleTooLarge { n: k, limit: 6 });
                }
                let diag: Vec<f64> = match kind {
                    ObservableKind::Trace => vec![1.0; 1 << k],
                    ObservableKind::Block(j) => self.alg.post.blocks()[j].table.clone(),
                    ObservableKind::General => (0..1usize << k)
                        .map(|local| {
                            let y = (0..k).fold(0u64, |acc, p| acc | ((((local >> (k - 1 - p)) & 1) as u64) << p));
                            self.alg.post.eval(y)
                        })
                        .collect(),
                };
                let data = (0..1usize << (2 * k))
                    .map(|beta| {
                        let (b1, b2) = split_pairs(beta, k);
                        if b1 == b2 {
                            C64::new(diag[b1], 0.0)
                        } else {
                            ZERO
                        }
                    })
                    .collect();
                DenseTensor::new(self.in_edges(v).to_vec(), vec![4; k], data)
            }
        }
    }

    /// `T(G, A)` by direct tensor contraction in vertex order. Only for small networks.
    pub fn contract_dense(&self) -> Result<f64> {
        let mut acc = DenseTensor::scalar(ONE);
        for v in 0..self.vertices.len() {
            acc = acc.contract(&self.vertex_tensor(v)?)?;
            if acc.rank() > 12 {
                return Err(Error::OracleTooLarge { n: acc.rank(), limit: 12 });
            }
        }
        Ok(acc.value().expect("closed network").re)
    }
}

/// Split a flat multi-port index (first port most significant, each port
/// `2·a¹ + a²`) into the local first- and second-component indices.
fn split_pairs(idx: usize, k: usize) -> (usize, usize) {
    let mut first = 0;
    let mut second = 0;
    for p in 0..k {
        let pair = (idx >> (2 * (k - 1 - p))) & 3;
        first = (first << 1) | (pair >> 1);
        second = (second << 1) | (pair & 1);
    }
    (first, second)
}

/// Exact `T(G, A) = E_y f(y)` via the statevector oracle (default width limit).
pub fn exact_value(net: &TensorNetwork) -> Result<f64> {
    exact_value_with_limit(net, DEFAULT_ORACLE_LIMIT)
}

pub fn exact_value_with_limit(net: &TensorNetwork, limit: usize) -> Result<f64> {
    if net.n() > limit {
        return Err(Error::OracleTooLarge { n: net.n(), limit });
    }
    Ok(StateVector::run(&net.alg.circuit).expectation(&net.alg.post))
}

/// Assignment of network vertices to clusters `0..r`.
///
/// The final observable of a general post-processing function is unclustered.
/// A two-qubit gate may be *split*: each of its two sides belongs to a
/// different cluster and the gate is removed by a gate cut.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clustering {
    assignment: Vec<Option<usize>>,
    split: BTreeMap<usize, [usize; 2]>,
    r: usize,
}

#[derive(Serialize, Deserialize)]
struct ClusteringJson {
    clusters: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    split: Vec<[usize; 3]>,
}

impl Clustering {
    /// Clustering from explicit vertex lists. Observable vertices may be left
    /// out: identity observables follow their source cluster, block
    /// observables go to the cluster holding most of their input wires
    /// (lowest cluster on ties).
    pub fn from_clusters(net: &TensorNetwork, clusters: &[Vec<usize>]) -> Result<Clustering> {
        Self::from_parts(net, clusters, BTreeMap::new())
    }

    fn from_parts(net: &TensorNetwork, clusters: &[Vec<usize>], split: BTreeMap<usize, [usize; 2]>) -> Result<Clustering> {
        let nv = net.vertices.len();
        let r = clusters.len();
        let mut assignment = vec![None; nv];
        for (c, members) in clusters.iter().enumerate() {
            for &v in members {
                if v >= nv {
                    return Err(Error::InvalidClustering(format!("vertex {v} does not exist")));
                }
                if Some(v) == net.final_observable {
                    return Err(Error::InvalidClustering(format!("vertex {v} is the final observable")));
                }
                if assignment[v].is_some() || split.contains_key(&v) {
                    return Err(Error::InvalidClustering(format!("vertex {v} assigned twice")));
                }
                assignment[v] = Some(c);
            }
        }
        for (&v, sides) in &split {
            if v >= nv || !matches!(net.vertices[v].kind, VertexKind::Gate { .. }) || net.vertices[v].qubits.len() != 2 {
                return Err(Error::InvalidClustering(format!("vertex {v} is not a two-qubit gate")));
            }
            if sides[0] == sides[1] || sides.iter().any(|&s| s >= r) {
                return Err(Error::InvalidClustering(format!("bad split clusters {sides:?} for vertex {v}")));
            }
        }
        let mut cl = Clustering { assignment, split, r };
        for v in 0..nv {
            if cl.assignment[v].is_some() || cl.split.contains_key(&v) || Some(v) == net.final_observable {
                continue;
            }
            match net.vertices[v].kind {
                VertexKind::Observable(_) => {
                    let mut votes = vec![0usize; r];
                    for &e in net.in_edges(v) {
                        let edge = net.edges[e];
                        if let Some(c) = cl.port_cluster(edge.src, edge.src_port) {
                            votes[c] += 1;
                        }
                    }
                    let best = (0..r).max_by(|&a, &b| votes[a].cmp(&votes[b]).then(b.cmp(&a)));
                    cl.assignment[v] = best;
                }
                _ => return Err(Error::InvalidClustering(format!("vertex {v} is not assigned"))),
            }
        }
        Ok(cl)
    }

    /// Everything in one cluster.
    pub fn single(net: &TensorNetwork) -> Clustering {
        let members: Vec<usize> = (0..net.vertices.len()).filter(|&v| Some(v) != net.final_observable).collect();
        Self::from_clusters(net, &[members]).expect("single cluster is valid")
    }

    /// Clustering induced by a partition of the qubits into parties. Gates
    /// inside a party join it. A crossing CZ or Pauli-rotation gate is split
    /// between the two parties; any other crossing gate becomes its own
    /// cluster (numbered after the parties), cut out by four wire cuts.
    pub fn from_qubit_partition(net: &TensorNetwork, parts: &[Vec<usize>]) -> Result<Clustering> {
        let n = net.n();
        let mut party = vec![usize::MAX; n];
        for (p, qs) in parts.iter().enumerate() {
            for &q in qs {
                if q >= n || party[q] != usize::MAX {
                    return Err(Error::InvalidClustering(format!("qubit {q} missing or repeated in partition")));
                }
                party[q] = p;
            }
        }
        if let Some(q) = party.iter().position(|&p| p == usize::MAX) {
            return Err(Error::InvalidClustering(format!("qubit {q} not in any party")));
        }
        let mut clusters: Vec<Vec<usize>> = vec![Vec::new(); parts.len()];
        let mut split = BTreeMap::new();
        for (v, vertex) in net.vertices.iter().enumerate() {
            match vertex.kind {
                VertexKind::Input { qubit } => clusters[party[qubit]].push(v),
                VertexKind::Gate { index } => {
                    let ps: Vec<usize> = vertex.qubits.iter().map(|&q| party[q]).collect();
                    if ps.iter().all(|&p| p == ps[0]) {
                        clusters[ps[0]].push(v);
                    } else if crate::cutting::gate_cut::rule_for(&net.alg.circuit.gates[index]).is_some() {
                        split.insert(v, [ps[0], ps[1]]);
                    } else {
                        clusters.push(vec![v]);
                    }
                }
                VertexKind::Observable(_) => {}
            }
        }
        Self::from_parts(net, &clusters, split)
    }

    /// Greedy agglomeration under a width cap: starting from one cluster per
    /// vertex, repeatedly merge the pair of adjacent clusters joined by the most
    /// wires whose union still has `d(S) ≤ max_width` (ties: lowest pair of
    /// cluster ids). Stops when no merge fits.
    pub fn greedy(net: &TensorNetwork, max_width: usize) -> Result<Clustering> {
        let nv = net.vertices.len();
        let free = |v: usize| Some(v) != net.final_observable;
        let widest = (0..nv).filter(|&v| free(v)).map(|v| net.vertices[v].qubits.len()).max().unwrap_or(0);
        if max_width < widest {
            return Err(Error::InvalidClustering(format!(
                "width cap {max_width} is below the widest gate or observable block ({widest} qubits)"
            )));
        }
        let mut group: Vec<usize> = (0..nv).collect();
        let width = |group: &[usize], a: usize, b: usize| -> usize {
            let inside = |v: usize| free(v) && (group[v] == a || group[v] == b);
            let inputs =
                (0..nv).filter(|&v| inside(v) && matches!(net.vertices[v].kind, VertexKind::Input { .. })).count();
            let entering = net.edges.iter().filter(|e| inside(e.dst) && !inside(e.src)).count();
            inputs + entering
        };
        loop {
            let mut links: BTreeMap<(usize, usize), usize> = BTreeMap::new();
            for e in &net.edges {
                if !free(e.src) || !free(e.dst) {
                    continue;
                }
                let (a, b) = (group[e.src], group[e.dst]);
                if a != b {
                    *links.entry((a.min(b), a.max(b))).or_default() += 1;
                }
            }
            let mut best: Option<((usize, usize), usize)> = None;
            for (&pair, &count) in &links {
                if best.is_some_and(|(_, c)| c >= count) {
                    continue;
                }
                if width(&group, pair.0, pair.1) <= max_width {
                    best = Some((pair, count));
                }
            }
            let Some(((a, b), _)) = best else { break };
            group.iter_mut().filter(|g| **g == b).for_each(|g| *g = a);
        }
        let mut ids: BTreeMap<usize, usize> = BTreeMap::new();
        let mut clusters: Vec<Vec<usize>> = Vec::new();
        for v in (0..nv).filter(|&v| free(v)) {
            let next = ids.len();
            let c = *ids.entry(group[v]).or_insert(next);
            if c == clusters.len() {
                clusters.push(Vec::new());
            }
            clusters[c].push(v);
        }
        Clustering::from_clusters(net, &clusters)
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn cluster_of(&self, v: usize) -> Option<usize> {
        self.assignment[v]
    }

    pub fn split_gates(&self) -> &BTreeMap<usize, [usize; 2]> {
        &self.split
    }

    /// Cluster owning port `port` of vertex `v`.
    pub fn port_cluster(&self, v: usize, port: usize) -> Option<usize> {
        match self.split.get(&v) {
            Some(sides) => Some(sides[port]),
            None => self.assignment[v],
        }
    }

    /// Member lists (split gates excluded).
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.r];
        for (v, c) in self.assignment.iter().enumerate() {
            if let Some(c) = c {
                out[*c].push(v);
            }
        }
        out
    }

    /// Rename cluster `c` to `perm[c]`.
    pub fn relabeled(&self, perm: &[usize]) -> Clustering {
        Clustering {
            assignment: self.assignment.iter().map(|c| c.map(|c| perm[c])).collect(),
            split: self.split.iter().map(|(&v, s)| (v, [perm[s[0]], perm[s[1]]])).collect(),
            r: self.r,
        }
    }

    pub fn to_json(&self) -> String {
        let raw = ClusteringJson {
            clusters: self.clusters(),
            split: self.split.iter().map(|(&v, s)| [v, s[0], s[1]]).collect(),
        };
        serde_json::to_string(&raw).expect("clustering serializes")
    }

    /// Parse `{"clusters": [[vertex ids], …], "split": [[gate vertex, c0, c1], …]}`.
    pub fn from_json(net: &TensorNetwork, text: &str) -> Result<Clustering> {
        let raw: ClusteringJson = serde_json::from_str(text)
            .map_err(|e| Error::Parse(crate::circuit::describe_json_error(text, &e)))?;
        let split = raw.split.iter().map(|s| (s[0], [s[1], s[2]])).collect();
        Self::from_parts(net, &raw.clusters, split)
    }
}

/// One cut coordinate: an inter-cluster wire or a split gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CutSite {
    Wire { edge: usize },
    Gate { vertex: usize },
}

/// Cut coordinates in time order: for each vertex, its cut in-edges by port,
/// then the vertex itself if it is a split gate. Edges into the final
/// observable are never cut.
pub fn cut_sites(net: &TensorNetwork, cl: &Clustering) -> Vec<CutSite> {
    let mut sites = Vec::new();
    for v in 0..net.vertices.len() {
        if Some(v) == net.final_observable {
            continue;
        }
        for &e in net.in_edges(v) {
            let edge = net.edges[e];
            if cl.port_cluster(edge.src, edge.src_port) != cl.port_cluster(edge.dst, edge.dst_port) {
                sites.push(CutSite::Wire { edge: e });
            }
        }
        if cl.split.contains_key(&v) {
            sites.push(CutSite::Gate { vertex: v });
        }
    }
    sites
}

/// Endpoint clusters of a cut coordinate (source side first for wires).
pub fn site_clusters(net: &TensorNetwork, cl: &Clustering, site: CutSite) -> (usize, usize) {
    match site {
        CutSite::Wire { edge } => {
            let e = net.edges[edge];
            (
                cl.port_cluster(e.src, e.src_port).expect("clustered source"),
                cl.port_cluster(e.dst, e.dst_port).expect("clustered target"),
            )
        }
        CutSite::Gate { vertex } => {
            let s = cl.split[&vertex];
            (s[0], s[1])
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterParams {
    /// Number of cut coordinates (wires into the final observable excluded).
    pub k: usize,
    /// `max_i d(S_i)` with `d(S) = #inputs in S + #cut wires entering S`.
    pub d: usize,
    pub r: usize,
    /// Per-cluster `d(S_i)`.
    pub widths: Vec<usize>,
    /// Induced multigraph; edge `i` is cut coordinate `i`.
    pub g: Multigraph,
    pub cc_upper: usize,
    pub cc_exact: Option<usize>,
    /// Contraction order achieving `cc_exact` if known, else `cc_upper`.
    pub cc_order: ContractionOrder,
}

impl ClusterParams {
    /// Best known contraction complexity.
    pub fn cc(&self) -> usize {
        self.cc_exact.unwrap_or(self.cc_upper)
    }
}

pub fn cluster_params(net: &TensorNetwork, cl: &Clustering) -> ClusterParams {
    let sites = cut_sites(net, cl);
    let mut widths = vec![0usize; cl.r];
    for (v, vertex) in net.vertices.iter().enumerate() {
        if let (VertexKind::Input { .. }, Some(c)) = (vertex.kind, cl.assignment[v]) {
            widths[c] += 1;
        }
    }
    let mut edges = Vec::with_capacity(sites.len());
    for &site in &sites {
        let (a, b) = site_clusters(net, cl, site);
        if let CutSite::Wire { .. } = site {
            widths[b] += 1;
        }
        edges.push((a, b));
    }
    let g = Multigraph { n: cl.r, edges };
    let (cc_upper, greedy_order) = contraction_complexity(&g, CcMode::Greedy).expect("greedy is total");
    let exact = (g.n <= graph::EXACT_CC_LIMIT).then(|| contraction_complexity(&g, CcMode::Exact).expect("within limit"));
    let cc_exact = exact.as_ref().map(|e| e.0);
    let cc_order = exact.map(|e| e.1).unwrap_or(greedy_order);
    ClusterParams {
        k: sites.len(),
        d: widths.iter().copied().max().unwrap_or(0),
        r: cl.r,
        widths,
        g,
        cc_upper,
        cc_exact,
        cc_order,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{pauli_observable_expectation_post, Circuit, Gate, GateKind, PostProcess};

    #[test]
    fn single_h_with_z_parity() {
        let c = Circuit::with_gates(1, vec![Gate::one(GateKind::H, 0)]);
        let alg = QcAlgorithm::new(c, pauli_observable_expectation_post("Z").unwrap()).unwrap();
        let net = build_network(&alg);
        assert_eq!(net.vertices.len(), 3);
        assert!(exact_value(&net).unwrap().abs() < 1e-12);
        assert!(net.contract_dense().unwrap().abs() < 1e-12);
    }

    #[test]
    fn empty_circuit_has_unit_value() {
        let alg = QcAlgorithm::new(Circuit::new(2), PostProcess::constant_one()).unwrap();
        let net = build_network(&alg);
        assert!((exact_value(&net).unwrap() - 1.0).abs() < 1e-12);
        assert!((net.contract_dense().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn split_pairs_orders_ports() {
        // ports (a¹a²) = (10)(01) -> first = 0b10, second = 0b01
        assert_eq!(split_pairs(0b1001, 2), (0b10, 0b01));
    }

    #[test]
    fn oracle_limit_enforced() {
        let alg = QcAlgorithm::new(Circuit::new(3), PostProcess::constant_one()).unwrap();
        let net = build_network(&alg);
        assert!(matches!(exact_value_with_limit(&net, 2), Err(Error::OracleTooLarge { n: 3, limit: 2 })));
    }
}
