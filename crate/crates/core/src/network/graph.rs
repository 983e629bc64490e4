//! Induced cluster multigraphs, contraction complexity, and contraction of
//! small real tensor networks over them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::DenseTensor;

/// Largest graph handled by the exact contraction-complexity search.
pub const EXACT_CC_LIMIT: usize = 12;

/// Undirected multigraph; edge ids are positions in `edges`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Multigraph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

/// A contraction order: each step merges two current super-vertices, named by
/// their smallest original vertex; the merged vertex keeps the smaller name.
pub type ContractionOrder = Vec<(usize, usize)>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CcMode {
    Exact,
    Greedy,
}

impl Multigraph {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Multigraph> {
        if let Some(&(a, b)) = edges.iter().find(|&&(a, b)| a >= n || b >= n) {
            return Err(Error::ShapeMismatch(format!("edge ({a},{b}) outside {n} vertices")));
        }
        Ok(Multigraph { n, edges })
    }

    /// Degree counting parallel edges; self-loops do not count.
    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a != b && (a == v || b == v)).count()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    /// Edge ids incident to `v`, ascending.
    pub fn incident(&self, v: usize) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&e| self.edges[e].0 == v || self.edges[e].1 == v)
            .collect()
    }

    fn multiplicity(&self) -> Vec<Vec<usize>> {
        let mut m = vec![vec![0usize; self.n]; self.n];
        for &(a, b) in &self.edges {
            if a != b {
                m[a][b] += 1;
                m[b][a] += 1;
            }
        }
        m
    }

    /// Graphviz rendering.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph g {\n");
        for v in 0..self.n {
            out.push_str(&format!("  {v} [label=\"S{}\"];\n", v + 1));
        }
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            out.push_str(&format!("  {a} -- {b} [label=\"{e}\"];\n"));
        }
        out.push_str("}\n");
        out
    }
}

/// Contraction complexity of `g`: the smallest achievable maximum degree
/// (original vertices included) over sequences of merges of adjacent
/// super-vertices. Exact mode searches all orders (≤ [`EXACT_CC_LIMIT`]
/// vertices); greedy mode always merges the adjacent pair with the smallest
/// resulting degree, lowest ids first on ties.
pub fn contraction_complexity(g: &Multigraph, mode: CcMode) -> Result<(usize, ContractionOrder)> {
    match mode {
        CcMode::Greedy => Ok(greedy_cc(g)),
        CcMode::Exact => exact_cc(g),
    }
}

fn greedy_cc(g: &Multigraph) -> (usize, ContractionOrder) {
    let mut mult = g.multiplicity();
    let mut deg: Vec<usize> = (0..g.n).map(|v| mult[v].iter().sum()).collect();
    let mut alive: Vec<bool> = vec![true; g.n];
    let mut worst = deg.iter().copied().max().unwrap_or(0);
    let mut order = Vec::new();
    loop {
        let mut best: Option<(usize, usize, usize)> = None;
        for u in 0..g.n {
            if !alive[u] {
                continue;
            }
            for v in u + 1..g.n {
                if alive[v] && mult[u][v] > 0 {
                    let merged = deg[u] + deg[v] - 2 * mult[u][v];
                    if best.is_none_or(|(b, _, _)| merged < b) {
                        best = Some((merged, u, v));
                    }
                }
            }
        }
        let Some((merged, u, v)) = best else { break };
        worst = worst.max(merged);
        order.push((u, v));
        alive[v] = false;
        for w in 0..g.n {
            if w != u && w != v {
                let m = mult[v][w];
                mult[u][w] += m;
                mult[w][u] += m;
            }
            mult[v][w] = 0;
            mult[w][v] = 0;
        }
        mult[u][u] = 0;
        deg[u] = merged;
    }
    join_components(&alive, &mut order);
    (worst, order)
}

/// Merge the remaining (mutually disconnected) super-vertices in ascending order.
fn join_components(alive: &[bool], order: &mut ContractionOrder) {
    let reps: Vec<usize> = (0..alive.len()).filter(|&v| alive[v]).collect();
    for &r in reps.iter().skip(1) {
        order.push((reps[0], r));
    }
}

fn exact_cc(g: &Multigraph) -> Result<(usize, ContractionOrder)> {
    let n = g.n;
    if n > EXACT_CC_LIMIT {
        return Err(Error::GraphTooLarge { n, limit: EXACT_CC_LIMIT });
    }
    if n == 0 {
        return Ok((0, Vec::new()));
    }
    let full = (1usize << n) - 1;
    let mult = g.multiplicity();
    let adj: Vec<usize> = (0..n)
        .map(|v| (0..n).filter(|&w| mult[v][w] > 0).fold(0, |m, w| m | (1 << w)))
        .collect();

    // Boundary degree and connectivity of every vertex subset.
    let mut boundary = vec![0usize; 1 << n];
    let mut connected = vec![false; 1 << n];
    for mask in 1..=full {
        boundary[mask] = g
            .edges
            .iter()
            .filter(|&&(a, b)| a != b && ((mask >> a) & 1) != ((mask >> b) & 1))
            .count();
        let start = mask.trailing_zeros() as usize;
        let mut seen = 1usize << start;
        let mut frontier = seen;
        while frontier != 0 {
            let v = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let next = adj[v] & mask & !seen;
            seen |= next;
            frontier |= next;
        }
        connected[mask] = seen == mask;
    }

    // cost[S] for connected S: best max degree to contract S to a point.
    let mut cost = vec![usize::MAX; 1 << n];
    let mut split = vec![0usize; 1 << n];
    let mut masks: Vec<usize> = (1..=full).filter(|&m| connected[m]).collect();
    masks.sort_by_key(|m| m.count_ones());
    for &mask in &masks {
        if mask.count_ones() == 1 {
            cost[mask] = boundary[mask];
            continue;
        }
        let low = mask & mask.wrapping_neg();
        let rest = mask & !low;
        // Enumerate parts A containing the lowest vertex.
        let mut sub = rest;
        loop {
            let a = sub | low;
            let b = mask & !a;
            if b != 0 && connected[a] && connected[b] {
                let c = cost[a].max(cost[b]);
                if c < cost[mask] || (c == cost[mask] && a < split[mask]) {
                    cost[mask] = c;
                    split[mask] = a;
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        cost[mask] = cost[mask].max(boundary[mask]);
    }

    // Components are contracted independently and then joined at degree 0.
    let mut remaining = full;
    let mut comps = Vec::new();
    while remaining != 0 {
        let start = remaining.trailing_zeros() as usize;
        let comp = (1..=full)
            .filter(|&m| m & (1 << start) != 0 && m & !remaining == 0 && connected[m])
            .max_by_key(|m| m.count_ones())
            .expect("singleton is connected");
        comps.push(comp);
        remaining &= !comp;
    }
    let mut order = Vec::new();
    let mut worst = 0;
    for &comp in &comps {
        worst = worst.max(cost[comp]);
        emit_order(comp, &split, &mut order);
    }
    let mut alive = vec![false; n];
    for &comp in &comps {
        alive[comp.trailing_zeros() as usize] = true;
    }
    join_components(&alive, &mut order);
    Ok((worst, order))
}

fn emit_order(mask: usize, split: &[usize], order: &mut ContractionOrder) {
    if mask.count_ones() <= 1 {
        return;
    }
    let a = split[mask];
    let b = mask & !a;
    emit_order(a, split, order);
    emit_order(b, split, order);
    order.push((a.trailing_zeros() as usize, b.trailing_zeros() as usize));
}

/// `T(g, a) = Σ_s ∏_j a(j)_{s(j)}` with every edge index ranging over 8 values.
/// `tensors[j]` is indexed by the edges incident to `j` in ascending edge id,
/// first edge most significant.
pub fn contract_with_order(g: &Multigraph, tensors: &[Vec<f64>], order: &[(usize, usize)]) -> Result<f64> {
    contract_with_order_dims(g, &vec![8; g.edges.len()], tensors, order)
}

/// [`contract_with_order`] with a per-edge index range.
pub fn contract_with_order_dims(
    g: &Multigraph,
    dims: &[usize],
    tensors: &[Vec<f64>],
    order: &[(usize, usize)],
) -> Result<f64> {
    if tensors.len() != g.n {
        return Err(Error::ShapeMismatch(format!("{} tensors for {} vertices", tensors.len(), g.n)));
    }
    if dims.len() != g.edges.len() {
        return Err(Error::ShapeMismatch(format!("{} dims for {} edges", dims.len(), g.edges.len())));
    }
    let mut live: BTreeMap<usize, DenseTensor<f64>> = BTreeMap::new();
    for (v, data) in tensors.iter().enumerate() {
        let labels = g.incident(v);
        if labels.iter().any(|&e| g.edges[e].0 == g.edges[e].1) {
            return Err(Error::ShapeMismatch(format!("self-loop at vertex {v}")));
        }
        let d = labels.iter().map(|&e| dims[e]).collect();
        live.insert(v, DenseTensor::new(labels, d, data.clone())?);
    }
    let mut steps: Vec<(usize, usize)> = order.to_vec();
    for &(a, b) in order {
        if a == b || !live.contains_key(&a) || !live.contains_key(&b) {
            return Err(Error::ShapeMismatch(format!("invalid contraction step ({a},{b})")));
        }
        merge(&mut live, a, b)?;
    }
    // Finish any order that stops early.
    while live.len() > 1 {
        let mut keys = live.keys().copied();
        let (a, b) = (keys.next().unwrap(), keys.next().unwrap());
        steps.push((a, b));
        merge(&mut live, a, b)?;
    }
    Ok(match live.into_values().next() {
        Some(t) => t.value().ok_or_else(|| Error::ShapeMismatch("dangling edge labels".into()))?,
        None => 1.0,
    })
}

fn merge(live: &mut BTreeMap<usize, DenseTensor<f64>>, a: usize, b: usize) -> Result<()> {
    let ta = live.remove(&a).unwrap();
    let tb = live.remove(&b).unwrap();
    live.insert(a.min(b), ta.contract(&tb)?);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cc(n: usize, edges: &[(usize, usize)], mode: CcMode) -> usize {
        contraction_complexity(&Multigraph::new(n, edges.to_vec()).unwrap(), mode).unwrap().0
    }

    #[test]
    fn small_graph_values() {
        let tri = [(0, 1), (1, 2), (0, 2)];
        let path = [(0, 1), (1, 2), (2, 3), (3, 4)];
        assert_eq!(cc(3, &tri, CcMode::Exact), 2);
        assert_eq!(cc(5, &path, CcMode::Exact), 2);
        assert_eq!(cc(2, &[(0, 1)], CcMode::Exact), 1);
        assert_eq!(cc(3, &tri, CcMode::Greedy), 2);
        assert_eq!(cc(1, &[], CcMode::Exact), 0);
        assert_eq!(cc(3, &[], CcMode::Exact), 0);
    }

    #[test]
    fn star_contracts_from_the_hub() {
        // Hub with 4 leaves: every order starts at degree 4.
        let star = [(0, 1), (0, 2), (0, 3), (0, 4)];
        assert_eq!(cc(5, &star, CcMode::Exact), 4);
        assert_eq!(cc(5, &star, CcMode::Greedy), 4);
    }

    #[test]
    fn exact_order_is_a_full_contraction() {
        let g = Multigraph::new(4, vec![(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]).unwrap();
        let (_, order) = contraction_complexity(&g, CcMode::Exact).unwrap();
        assert_eq!(order.len(), 3);
    }

    #[test]
    fn two_vertex_contractions() {
        let g = Multigraph::new(2, vec![(0, 1)]).unwrap();
        let one_hot = |k: usize| (0..8).map(|i| if i == k { 1.0 } else { 0.0 }).collect::<Vec<_>>();
        assert_eq!(contract_with_order(&g, &[one_hot(1), one_hot(1)], &[(0, 1)]).unwrap(), 1.0);
        let uniform = vec![1.0 / 8.0; 8];
        // Setting k (1-based) carries value k.
        let ramp: Vec<f64> = (1..=8).map(|k| k as f64).collect();
        let v = contract_with_order(&g, &[uniform, ramp], &[(0, 1)]).unwrap();
        assert!((v - 4.5).abs() < 1e-12);
        assert!(contract_with_order(&g, &[vec![1.0; 7], vec![1.0; 8]], &[]).is_err());
    }

    #[test]
    fn too_large_for_exact() {
        let g = Multigraph::new(13, vec![]).unwrap();
        assert!(matches!(contraction_complexity(&g, CcMode::Exact), Err(Error::GraphTooLarge { .. })));
    }
}
