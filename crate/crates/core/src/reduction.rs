//! Max-Shapley-Group instances built from Densest-k-Subgraph inputs.
//!
//! For an undirected graph `G = (V, E)` (made connected first) and budget `k`, the instance
//! has `t = 6|E|` layer nodes `u^v_1..u^v_t` per source node and `ℓ = (2t+1)t|V| + 1` edge
//! nodes `u^e_1..u^e_ℓ` per edge. Every layer node of both endpoints of `e` has an arc of
//! value 1 to every edge node of `e`. Layer nodes are numbered `v·t + p`, edge nodes
//! `t|V| + e·ℓ + p` (0-based `p`).
//!
//! Every RR set is deterministic given its root: a singleton for a layer node, and
//! `{u^e_p} ∪ layers(v) ∪ layers(v')` for an edge node of `e = {v, v'}`. All values below
//! are computed from per-node counts without materializing those sets.

use std::collections::{HashMap, HashSet};
use std::io::Write;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::CompensatedSum;
use crate::graph::{Arc, InfluenceGraph, Model, NodeId};

/// Node of a reduction instance (instances outgrow `u32` quickly).
pub type ReducedNode = u64;

/// Default cap on arcs when materializing an instance.
pub const DEFAULT_MAX_ARCS: u64 = 50_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UndirectedGraph {
    labels: Vec<String>,
    /// Normalized `(a, b)` with `a < b`, in input order.
    edges: Vec<(u32, u32)>,
}

impl UndirectedGraph {
    /// Nodes are named by their decimal ids.
    pub fn new(n: usize, edges: &[(u32, u32)]) -> Result<Self> {
        Self::build((0..n).map(|v| v.to_string()).collect(), edges.iter().copied(), |_| None)
    }

    fn build<I>(labels: Vec<String>, edges: I, line_of: impl Fn(usize) -> Option<usize>) -> Result<Self>
    where
        I: IntoIterator<Item = (u32, u32)>,
    {
        let n = labels.len();
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (i, (a, b)) in edges.into_iter().enumerate() {
            let fail = |msg: String| match line_of(i) {
                Some(line) => Error::input(line, msg),
                None => Error::param(msg),
            };
            if a as usize >= n || b as usize >= n {
                return Err(fail(format!("edge {a}-{b} out of range 0..{n}")));
            }
            if a == b {
                return Err(fail(format!("self-loop at node {}", labels[a as usize])));
            }
            let e = (a.min(b), a.max(b));
            if !seen.insert(e) {
                return Err(fail(format!("duplicate edge {} {}", labels[a as usize], labels[b as usize])));
            }
            out.push(e);
        }
        Ok(UndirectedGraph { labels, edges: out })
    }

    /// Parses `<a> <b>` lines; labels get dense ids in order of first appearance. A third
    /// column (a weight) is accepted and ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut labels: Vec<String> = Vec::new();
        let mut index: HashMap<String, u32> = HashMap::new();
        let mut edges = Vec::new();
        let mut lines = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if !(2..=3).contains(&fields.len()) {
                return Err(Error::input(i + 1, format!("expected '<a> <b>', got {} fields", fields.len())));
            }
            let mut id = |s: &str| {
                *index.entry(s.to_string()).or_insert_with(|| {
                    labels.push(s.to_string());
                    labels.len() as u32 - 1
                })
            };
            let (a, b) = (id(fields[0]), id(fields[1]));
            edges.push((a, b));
            lines.push(i + 1);
        }
        Self::build(labels, edges, |i| Some(lines[i]))
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn label(&self, v: u32) -> &str {
        &self.labels[v as usize]
    }

    pub fn node_id(&self, label: &str) -> Option<u32> {
        self.labels.iter().position(|l| l == label).map(|v| v as u32)
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<u32>> {
        let n = self.node_count();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &(a, b) in &self.edges {
            let (ra, rb) = (find(&mut parent, a as usize), find(&mut parent, b as usize));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        let mut groups: Vec<Vec<u32>> = Vec::new();
        let mut slot: HashMap<usize, usize> = HashMap::new();
        for v in 0..n {
            let root = find(&mut parent, v);
            let i = *slot.entry(root).or_insert_with(|| {
                groups.push(Vec::new());
                groups.len() - 1
            });
            groups[i].push(v as u32);
        }
        groups
    }

    /// Number of edges with both endpoints in `nodes`.
    pub fn induced_edge_count(&self, nodes: &[u32]) -> usize {
        let set: HashSet<u32> = nodes.iter().copied().collect();
        self.edges.iter().filter(|(a, b)| set.contains(a) && set.contains(b)).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionInstance {
    source: UndirectedGraph,
    /// Source edges followed by `added_edges`.
    edges: Vec<(u32, u32)>,
    added_edges: Vec<(u32, u32)>,
    k: usize,
    t: u64,
    ell: u64,
}

/// Builds the instance for `(graph, k)`, linking components by their smallest ids first.
pub fn build_reduction(graph: &UndirectedGraph, k: usize) -> Result<ReductionInstance> {
    let n = graph.node_count();
    if graph.edges().is_empty() {
        return Err(Error::param("reduction needs at least one edge"));
    }
    if k < 1 || k > n {
        return Err(Error::param(format!("k must be in [1, {n}]")));
    }
    let components = graph.components();
    let added_edges: Vec<(u32, u32)> = components.windows(2).map(|w| (w[0][0], w[1][0])).collect();
    let mut edges = graph.edges().to_vec();
    edges.extend_from_slice(&added_edges);

    let m = edges.len();
    let too_large = || Error::TooLarge(format!("reduction of {n} nodes and {m} edges overflows"));
    let t = 6 * m as u64;
    let ell = (2 * t + 1)
        .checked_mul(t)
        .and_then(|x| x.checked_mul(n as u64))
        .and_then(|x| x.checked_add(1))
        .ok_or_else(too_large)?;
    let instance = ReductionInstance { source: graph.clone(), edges, added_edges, k, t, ell };
    instance.checked_node_count().ok_or_else(too_large)?;
    Ok(instance)
}

/// Position of a reduced node in the layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeRole {
    /// `u^v_{p+1}`
    Layer { v: u32, p: u64 },
    /// `u^e_{p+1}`
    Edge { e: usize, p: u64 },
}

impl ReductionInstance {
    pub fn source(&self) -> &UndirectedGraph {
        &self.source
    }

    /// Edges of the connected graph the instance is built on.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn added_edges(&self) -> &[(u32, u32)] {
        &self.added_edges
    }

    pub fn source_node_count(&self) -> usize {
        self.source.node_count()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn ell(&self) -> u64 {
        self.ell
    }

    pub fn k_bar(&self) -> u64 {
        self.k as u64 * self.t
    }

    fn checked_node_count(&self) -> Option<u64> {
        let layers = self.t.checked_mul(self.source_node_count() as u64)?;
        layers.checked_add(self.ell.checked_mul(self.edges.len() as u64)?)
    }

    /// `|V̄| = t|V| + ℓ|E|`.
    pub fn node_count(&self) -> u64 {
        self.layer_node_count() + self.ell * self.edges.len() as u64
    }

    pub fn layer_node_count(&self) -> u64 {
        self.t * self.source_node_count() as u64
    }

    pub fn arc_count(&self) -> u64 {
        2 * self.t * self.ell * self.edges.len() as u64
    }

    pub fn layer_node(&self, v: u32, p: u64) -> ReducedNode {
        debug_assert!(p < self.t);
        v as u64 * self.t + p
    }

    pub fn edge_node(&self, e: usize, p: u64) -> ReducedNode {
        debug_assert!(p < self.ell);
        self.layer_node_count() + e as u64 * self.ell + p
    }

    pub fn role(&self, u: ReducedNode) -> Result<NodeRole> {
        let layers = self.layer_node_count();
        if u < layers {
            Ok(NodeRole::Layer { v: (u / self.t) as u32, p: u % self.t })
        } else if u < self.node_count() {
            let rel = u - layers;
            Ok(NodeRole::Edge { e: (rel / self.ell) as usize, p: rel % self.ell })
        } else {
            Err(Error::param(format!("node {u} outside 0..{}", self.node_count())))
        }
    }

    /// `L:{label}:{p}` or `E:{a}-{b}:{p}` with 1-based `p`.
    pub fn node_label(&self, u: ReducedNode) -> Result<String> {
        Ok(match self.role(u)? {
            NodeRole::Layer { v, p } => format!("L:{}:{}", self.source.label(v), p + 1),
            NodeRole::Edge { e, p } => {
                let (a, b) = self.edges[e];
                format!("E:{}-{}:{}", self.source.label(a), self.source.label(b), p + 1)
            }
        })
    }

    fn layer_range(&self, v: u32) -> std::ops::Range<ReducedNode> {
        self.layer_node(v, 0)..self.layer_node(v, 0) + self.t
    }

    fn adjacency(&self) -> Vec<Vec<(u32, usize)>> {
        let mut adj = vec![Vec::new(); self.source_node_count()];
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            adj[a as usize].push((b, e));
            adj[b as usize].push((a, e));
        }
        adj
    }

    pub fn metadata(&self) -> ReductionMetadata {
        ReductionMetadata {
            source_nodes: self.source.labels.clone(),
            source_edges: self.source.edges.clone(),
            added_edges: self.added_edges.clone(),
            k: self.k,
            t: self.t,
            ell: self.ell,
            k_bar: self.k_bar(),
            node_count: self.node_count(),
            arc_count: self.arc_count(),
            layer_offset: 0,
            edge_offset: self.layer_node_count(),
        }
    }
}

/// JSON sidecar describing the node layout of an emitted instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionMetadata {
    pub source_nodes: Vec<String>,
    pub source_edges: Vec<(u32, u32)>,
    pub added_edges: Vec<(u32, u32)>,
    pub k: usize,
    pub t: u64,
    pub ell: u64,
    pub k_bar: u64,
    pub node_count: u64,
    pub arc_count: u64,
    pub layer_offset: u64,
    pub edge_offset: u64,
}

/// RR family of an instance, as counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalyticFamily {
    /// Singleton Node-RR sets, one per layer node.
    pub node_sets: u64,
    /// Edge-RR sets per edge (`ℓ`).
    pub edge_sets_per_edge: u64,
    pub edge_count: usize,
    /// `2t + 1`.
    pub edge_set_size: u64,
    /// Equals `|V̄|`; every root has probability `1/|V̄|`.
    pub total_sets: u64,
}

pub fn enumerate_rr_analytic(instance: &ReductionInstance) -> AnalyticFamily {
    AnalyticFamily {
        node_sets: instance.layer_node_count(),
        edge_sets_per_edge: instance.ell,
        edge_count: instance.edges.len(),
        edge_set_size: 2 * instance.t + 1,
        total_sets: instance.node_count(),
    }
}

/// The unique RR set rooted at `root`, sorted.
pub fn analytic_rr_set(instance: &ReductionInstance, root: ReducedNode) -> Result<Vec<ReducedNode>> {
    Ok(match instance.role(root)? {
        NodeRole::Layer { .. } => vec![root],
        NodeRole::Edge { e, .. } => {
            let (a, b) = instance.edges[e];
            let mut set: Vec<ReducedNode> = instance.layer_range(a).chain(instance.layer_range(b)).collect();
            set.push(root);
            set.sort_unstable();
            set
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RrShape {
    Node { v: u32, p: u64 },
    Edge { e: usize, p: u64 },
}

/// Shape of an RR set with the given root, or `None` if it matches neither analytic shape.
pub fn classify_rr_set(instance: &ReductionInstance, root: ReducedNode, members: &[ReducedNode]) -> Option<RrShape> {
    let mut sorted = members.to_vec();
    sorted.sort_unstable();
    if analytic_rr_set(instance, root).ok()? != sorted {
        return None;
    }
    Some(match instance.role(root).ok()? {
        NodeRole::Layer { v, p } => RrShape::Node { v, p },
        NodeRole::Edge { e, p } => RrShape::Edge { e, p },
    })
}

/// Per-source-node layer membership of a set of reduced nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerAssignment {
    t: u64,
    /// Sorted 0-based layer positions held, per source node.
    layers: Vec<Vec<u64>>,
    /// Number of edge nodes held, per edge.
    edge_nodes: Vec<u64>,
    /// Edge nodes held, sorted.
    edge_members: Vec<ReducedNode>,
}

impl LayerAssignment {
    pub fn new(instance: &ReductionInstance, set: &[ReducedNode]) -> Result<Self> {
        let mut layers = vec![Vec::new(); instance.source_node_count()];
        let mut edge_nodes = vec![0u64; instance.edges.len()];
        let mut edge_members = Vec::new();
        let mut set = set.to_vec();
        set.sort_unstable();
        set.dedup();
        for u in set {
            match instance.role(u)? {
                NodeRole::Layer { v, p } => layers[v as usize].push(p),
                NodeRole::Edge { e, .. } => {
                    edge_nodes[e] += 1;
                    edge_members.push(u);
                }
            }
        }
        Ok(LayerAssignment { t: instance.t, layers, edge_nodes, edge_members })
    }

    /// `n_S(v)`.
    pub fn count(&self, v: u32) -> u64 {
        self.layers[v as usize].len() as u64
    }

    pub fn counts(&self) -> Vec<u64> {
        self.layers.iter().map(|l| l.len() as u64).collect()
    }

    /// Edge nodes held for edge `e`.
    pub fn edge_node_count(&self, e: usize) -> u64 {
        self.edge_nodes[e]
    }

    pub fn layers_only(&self) -> bool {
        self.edge_members.is_empty()
    }

    /// `U_S`.
    pub fn support(&self) -> Vec<u32> {
        (0..self.layers.len() as u32).filter(|&v| self.count(v) >= 1).collect()
    }

    /// `U_S^{(1,t)}`.
    pub fn partial(&self) -> Vec<u32> {
        (0..self.layers.len() as u32).filter(|&v| self.count(v) > 1 && self.count(v) < self.t).collect()
    }

    pub fn len(&self) -> u64 {
        self.layers.iter().map(|l| l.len() as u64).sum::<u64>() + self.edge_members.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_set(&self, instance: &ReductionInstance) -> Vec<ReducedNode> {
        let mut out: Vec<ReducedNode> = self
            .layers
            .iter()
            .enumerate()
            .flat_map(|(v, ps)| ps.iter().map(move |&p| instance.layer_node(v as u32, p)))
            .collect();
        out.extend_from_slice(&self.edge_members);
        out.sort_unstable();
        out
    }

    /// Drops the largest held position of `from` and adds the smallest free one of `to`.
    fn move_unit(&mut self, from: u32, to: u32) {
        self.layers[from as usize].pop();
        let held = &mut self.layers[to as usize];
        let free = (0..self.t).zip(held.iter().copied().chain(std::iter::repeat(u64::MAX)))
            .find(|&(p, h)| p != h)
            .map(|(p, _)| p)
            .expect("target layer not full");
        let at = held.partition_point(|&h| h < free);
        held.insert(at, free);
    }

    fn fill(&mut self, v: u32) {
        self.layers[v as usize] = (0..self.t).collect();
    }

    fn clear(&mut self, v: u32) {
        self.layers[v as usize].clear();
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiParts {
    /// `φ_V`: contribution of Node-RR sets.
    pub node: f64,
    /// `φ_E`: contribution of Edge-RR sets.
    pub edge: f64,
    pub total: f64,
}

/// Contribution of the `ℓ` Edge-RR sets of one edge whose endpoints hold `a` layer nodes
/// in total while `b` of its edge nodes are held.
fn edge_term(t: u64, ell: u64, a: u64, b: u64) -> f64 {
    let x = (2 * t - a) as f64;
    let mut v = b as f64 / (x + 1.0);
    if a > 0 {
        v += (ell - b) as f64 / (x + 2.0);
    }
    v
}

fn phi_edge(instance: &ReductionInstance, la: &LayerAssignment) -> f64 {
    let mut acc = CompensatedSum::default();
    for (e, &(a, b)) in instance.edges.iter().enumerate() {
        acc.add(edge_term(instance.t, instance.ell, la.count(a) + la.count(b), la.edge_node_count(e)));
    }
    acc.value()
}

/// Exact `φ` of `set` split into Node-RR and Edge-RR parts, from the analytic family.
pub fn phi_exact_reduction(instance: &ReductionInstance, set: &[ReducedNode]) -> Result<PhiParts> {
    let la = LayerAssignment::new(instance, set)?;
    let node = la.counts().iter().sum::<u64>() as f64;
    let edge = phi_edge(instance, &la);
    Ok(PhiParts { node, edge, total: node + edge })
}

/// `I_E(v, S)`: change of `φ_E` when `n_S(v)` grows by one. Requires `n_S(v) < t`.
fn edge_increase(instance: &ReductionInstance, adj: &[Vec<(u32, usize)>], la: &LayerAssignment, v: u32) -> f64 {
    let d = |x: f64| 1.0 / (x * (x + 1.0));
    let (t, ell) = (instance.t, instance.ell);
    let mut acc = CompensatedSum::default();
    for &(w, e) in &adj[v as usize] {
        let a = la.count(v) + la.count(w);
        let b = la.edge_node_count(e);
        let x = (2 * t - a) as f64;
        if a == 0 {
            acc.add(b as f64 * d(x) + (ell - b) as f64 / (x + 1.0));
        } else {
            acc.add(b as f64 * d(x) + (ell - b) as f64 * d(x + 1.0));
        }
    }
    acc.value()
}

fn layer_assignment_of(instance: &ReductionInstance, set: &[ReducedNode]) -> Result<LayerAssignment> {
    let la = LayerAssignment::new(instance, set)?;
    if !la.layers_only() {
        return Err(Error::Precondition("set contains edge-gadget nodes".into()));
    }
    Ok(la)
}

/// Moves layer mass between partially filled source nodes until at most one remains.
///
/// Each round takes `v_h` with the largest `I_E` in `U^{(1,t)}` and `v_l` with the smallest
/// among the rest (smallest id on ties), then moves units from `v_l` to `v_h` until `v_h` is
/// full or `v_l` is down to one.
pub fn iterative_rebalance(instance: &ReductionInstance, set: &[ReducedNode]) -> Result<Vec<ReducedNode>> {
    let mut la = layer_assignment_of(instance, set)?;
    let adj = instance.adjacency();
    loop {
        let partial = la.partial();
        if partial.len() < 2 {
            break;
        }
        let gains: Vec<f64> = partial.iter().map(|&v| edge_increase(instance, &adj, &la, v)).collect();
        let mut h = 0;
        for i in 1..partial.len() {
            if gains[i] > gains[h] {
                h = i;
            }
        }
        let mut l = usize::from(h == 0);
        for i in 0..partial.len() {
            if i != h && gains[i] < gains[l] {
                l = i;
            }
        }
        let (v_h, v_l) = (partial[h], partial[l]);
        while la.count(v_h) < instance.t && la.count(v_l) > 1 {
            la.move_unit(v_l, v_h);
        }
    }
    Ok(la.to_set(instance))
}

fn full_nodes(instance: &ReductionInstance, la: &LayerAssignment) -> Vec<u32> {
    la.support().into_iter().filter(|&v| la.count(v) == instance.t).collect()
}

/// `S ⊆ V̄_V`, every touched source node full, and at least one induced edge.
pub fn is_thorough(instance: &ReductionInstance, set: &[ReducedNode]) -> Result<bool> {
    let la = LayerAssignment::new(instance, set)?;
    if !la.layers_only() {
        return Ok(false);
    }
    let support = la.support();
    if support.iter().any(|&v| la.count(v) != instance.t) {
        return Ok(false);
    }
    let held: HashSet<u32> = support.into_iter().collect();
    Ok(instance.edges.iter().any(|(a, b)| held.contains(a) && held.contains(b)))
}

/// Turns the output of [`iterative_rebalance`] into a thorough set that is no larger.
///
/// Degenerate inputs (no full node, or only full nodes with no edge among them) become the
/// full layers of the first edge. Otherwise the leftover mass is consolidated onto `v_r`
/// (the partial node if any, else a count-one node, preferring one adjacent to a full node),
/// or onto the smallest-id non-full neighbour `v_q` of the full nodes.
pub fn make_thorough(instance: &ReductionInstance, set: &[ReducedNode]) -> Result<Vec<ReducedNode>> {
    let mut la = layer_assignment_of(instance, set)?;
    let t = instance.t;
    if la.partial().len() >= 2 {
        return Err(Error::Precondition("more than one partially filled source node".into()));
    }
    if la.len() % t != 0 {
        return Err(Error::Precondition(format!("set size {} is not a multiple of t = {t}", la.len())));
    }
    if is_thorough(instance, set)? {
        return Ok(la.to_set(instance));
    }
    let full = full_nodes(instance, &la);
    let rest: Vec<u32> = la.support().into_iter().filter(|&v| la.count(v) < t).collect();
    if full.is_empty() || rest.is_empty() {
        if 2 * t > la.len() {
            return Err(Error::Precondition(format!(
                "a thorough set needs 2t = {} layer nodes, set has {}",
                2 * t,
                la.len()
            )));
        }
        let (a, b) = instance.edges[0];
        let mut out = LayerAssignment::new(instance, &[])?;
        out.fill(a);
        out.fill(b);
        return Ok(out.to_set(instance));
    }

    let adj = instance.adjacency();
    let is_full: Vec<bool> = (0..instance.source_node_count() as u32).map(|v| la.count(v) == t).collect();
    let touches_full = |v: u32| adj[v as usize].iter().any(|&(w, _)| is_full[w as usize]);
    let v_r = la
        .partial()
        .first()
        .copied()
        .or_else(|| rest.iter().copied().find(|&v| touches_full(v)))
        .unwrap_or(rest[0]);
    if touches_full(v_r) {
        for &v in &rest {
            la.clear(v);
        }
        la.fill(v_r);
    } else {
        let v_q = (0..instance.source_node_count() as u32)
            .find(|&v| !is_full[v as usize] && touches_full(v))
            .ok_or_else(|| Error::Precondition("full nodes have no non-full neighbour".into()))?;
        for &v in &rest {
            la.clear(v);
        }
        la.fill(v_q);
    }
    Ok(la.to_set(instance))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DksSolution {
    /// Exactly `k` source nodes, sorted.
    pub nodes: Vec<u32>,
    pub labels: Vec<String>,
    /// Edges of the source graph (added edges excluded) inside `nodes`.
    pub induced_edges: usize,
}

/// `U_S` padded with the smallest unused ids up to `k` nodes.
pub fn extract_dks_solution(instance: &ReductionInstance, set: &[ReducedNode]) -> Result<DksSolution> {
    let la = LayerAssignment::new(instance, set)?;
    let mut nodes = la.support();
    if nodes.len() > instance.k {
        return Err(Error::Precondition(format!("set touches {} source nodes, k = {}", nodes.len(), instance.k)));
    }
    let mut next = 0u32;
    while nodes.len() < instance.k {
        if nodes.binary_search(&next).is_err() {
            let at = nodes.partition_point(|&v| v < next);
            nodes.insert(at, next);
        }
        next += 1;
    }
    let labels = nodes.iter().map(|&v| instance.source.label(v).to_string()).collect();
    let induced_edges = instance.source.induced_edge_count(&nodes);
    Ok(DksSolution { nodes, labels, induced_edges })
}

/// `size` distinct layer nodes drawn uniformly (all of them if `size` is larger).
pub fn random_layer_set<R: Rng + ?Sized>(instance: &ReductionInstance, size: usize, rng: &mut R) -> Vec<ReducedNode> {
    let layers = instance.layer_node_count() as usize;
    let mut set: Vec<ReducedNode> = index::sample(rng, layers, size.min(layers))
        .into_iter()
        .map(|u| u as ReducedNode)
        .collect();
    set.sort_unstable();
    set
}

/// Errors when the instance has more than `max_arcs` arcs or outgrows 32-bit node ids.
pub fn check_materializable(instance: &ReductionInstance, max_arcs: u64) -> Result<()> {
    if instance.arc_count() > max_arcs {
        return Err(Error::ResourceCap(format!("{} arcs exceed the cap of {max_arcs}", instance.arc_count())));
    }
    if instance.node_count() > NodeId::MAX as u64 {
        return Err(Error::TooLarge(format!("{} nodes exceed the id range", instance.node_count())));
    }
    Ok(())
}

fn for_each_arc(instance: &ReductionInstance, mut f: impl FnMut(ReducedNode, ReducedNode) -> Result<()>) -> Result<()> {
    for (e, &(a, b)) in instance.edges.iter().enumerate() {
        for src in instance.layer_range(a).chain(instance.layer_range(b)) {
            for p in 0..instance.ell {
                f(src, instance.edge_node(e, p))?;
            }
        }
    }
    Ok(())
}

/// Materializes the instance as a labeled IC graph with all arc values 1.
pub fn to_influence_graph(instance: &ReductionInstance, max_arcs: u64) -> Result<InfluenceGraph> {
    check_materializable(instance, max_arcs)?;
    let mut arcs = Vec::with_capacity(instance.arc_count() as usize);
    for_each_arc(instance, |s, d| {
        arcs.push(Arc::new(s as NodeId, d as NodeId, 1.0));
        Ok(())
    })?;
    let labels = (0..instance.node_count()).map(|u| instance.node_label(u)).collect::<Result<Vec<_>>>()?;
    InfluenceGraph::new(instance.node_count() as usize, Model::Ic, arcs)?.with_labels(labels)
}

/// Streams the instance as an IC edge list with labeled nodes.
pub fn write_edge_list<W: Write>(instance: &ReductionInstance, max_arcs: u64, mut w: W) -> Result<()> {
    check_materializable(instance, max_arcs)?;
    writeln!(w, "# model ic")?;
    let edge_labels: Vec<String> = instance
        .edges
        .iter()
        .map(|&(a, b)| format!("{}-{}", instance.source.label(a), instance.source.label(b)))
        .collect();
    for (e, &(a, b)) in instance.edges.iter().enumerate() {
        for v in [a, b] {
            for q in 0..instance.t {
                for p in 0..instance.ell {
                    writeln!(w, "L:{}:{} E:{}:{} 1", instance.source.label(v), q + 1, edge_labels[e], p + 1)?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<Check>,
}

/// Structural and analytic self-checks on an instance; `trials` random layer sets of size
/// `k̄` feed the value checks.
pub fn verify_instance<R: Rng + ?Sized>(
    instance: &ReductionInstance,
    trials: usize,
    max_arcs: u64,
    rng: &mut R,
) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    let mut push = |name: &str, passed: bool, detail: String| {
        checks.push(Check { name: name.to_string(), passed, detail })
    };
    let (t, ell, nv, ne) = (instance.t, instance.ell, instance.source_node_count() as u64, instance.edges.len() as u64);
    push(
        "constants",
        t == 6 * ne && ell == (2 * t + 1) * t * nv + 1 && instance.node_count() == t * nv + ell * ne,
        format!("t={t} ell={ell} nodes={}", instance.node_count()),
    );
    let components = UndirectedGraph { labels: instance.source.labels.clone(), edges: instance.edges.clone() }
        .components()
        .len();
    push("connected", components == 1, format!("{components} component(s) after adding {} edge(s)", instance.added_edges.len()));

    let fam = enumerate_rr_analytic(instance);
    push(
        "rr_counts",
        fam.node_sets + fam.edge_sets_per_edge * fam.edge_count as u64 == fam.total_sets,
        format!("{} node sets + {}x{} edge sets of size {}", fam.node_sets, fam.edge_count, fam.edge_sets_per_edge, fam.edge_set_size),
    );

    if instance.arc_count() <= max_arcs && instance.node_count() <= NodeId::MAX as u64 {
        let graph = to_influence_graph(instance, max_arcs)?;
        let mut bad = 0u64;
        for root in 0..instance.node_count() {
            let mut members: Vec<ReducedNode> = vec![root];
            members.extend(graph.in_arcs(root as NodeId).map(|(u, _)| u as ReducedNode));
            if graph.in_arcs(root as NodeId).any(|(u, _)| graph.in_degree(u) > 0) || classify_rr_set(instance, root, &members).is_none() {
                bad += 1;
            }
        }
        push("rr_shapes", bad == 0, format!("{bad} root(s) with an unexpected RR set"));
    } else {
        push("rr_shapes", true, "skipped: instance exceeds the arc cap".into());
    }

    let everything: Vec<ReducedNode> = (0..instance.node_count()).collect();
    let all = if instance.node_count() <= 10_000_000 {
        phi_exact_reduction(instance, &everything)?.total
    } else {
        instance.node_count() as f64
    };
    push("phi_of_all", all == instance.node_count() as f64, format!("phi(all) = {all}"));

    let size = instance.k_bar().min(instance.layer_node_count()) as usize;
    let (mut lemma7, mut thorough, mut monotone, mut observation) = (0, 0, 0, 0);
    for _ in 0..trials {
        let s = random_layer_set(instance, size, rng);
        let phi = phi_exact_reduction(instance, &s)?;
        if phi.edge < phi.total / 2.0 {
            lemma7 += 1;
        }
        let rebalanced = iterative_rebalance(instance, &s)?;
        let before = phi.edge;
        let mid = phi_exact_reduction(instance, &rebalanced)?.edge;
        match make_thorough(instance, &rebalanced) {
            Ok(out) => {
                let after = phi_exact_reduction(instance, &out)?.edge;
                if !is_thorough(instance, &out)? || out.len() > s.len() {
                    thorough += 1;
                }
                if mid < before * (1.0 - 1e-12) || after < mid * (1.0 - 1e-12) {
                    monotone += 1;
                }
            }
            Err(Error::Precondition(_)) if instance.k < 2 => {}
            Err(e) => return Err(e),
        }
        if let Some(u) = (0..instance.layer_node_count()).find(|u| s.binary_search(u).is_err()) {
            let mut with = s.clone();
            with.push(u);
            if phi_exact_reduction(instance, &with)?.total - phi.total < 1.0 - 1e-9 {
                observation += 1;
            }
        }
        let edge_u = instance.edge_node(0, 0);
        if s.binary_search(&edge_u).is_err() {
            let mut with = s.clone();
            with.push(edge_u);
            if phi_exact_reduction(instance, &with)?.total - phi.total > 0.5 + 1e-9 {
                observation += 1;
            }
        }
    }
    push("lemma7_edge_share", lemma7 == 0, format!("{lemma7} violation(s) in {trials} set(s)"));
    push("thorough_output", thorough == 0, format!("{thorough} violation(s) in {trials} set(s)"));
    push("phi_e_monotone", monotone == 0, format!("{monotone} violation(s) in {trials} set(s)"));
    push("single_node_increase", observation == 0, format!("{observation} violation(s) in {trials} set(s)"));

    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport { passed, checks })
}
