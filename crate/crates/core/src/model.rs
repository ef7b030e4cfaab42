//! Domain types: the resource network, the dataflow pipeline, partial and
//! complete placements, and structural validation of instances.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// External identifier of a resource node.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub String);

impl NodeId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId(s.to_string())
    }
}

impl From<String> for NodeId {
    fn from(s: String) -> Self {
        NodeId(s)
    }
}

pub(crate) fn non_negative(x: f64) -> bool {
    x.is_finite() && x >= 0.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub capacity: f64,
}

/// An undirected link as it appears in the instance document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub u: NodeId,
    pub v: NodeId,
    pub bandwidth: f64,
    pub latency: f64,
}

/// Internal undirected edge between dense node indices, `a < b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub bandwidth: f64,
    pub latency: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Neighbor {
    pub node: usize,
    pub edge: usize,
}

#[derive(Serialize, Deserialize)]
struct GraphDoc {
    nodes: Vec<Node>,
    edges: Vec<Link>,
}

/// Capacitated resource network with undirected links carrying bandwidth
/// and an additive latency.
///
/// Nodes are addressed internally by their position in the declaration
/// order; `index_of` and `id` translate between the two.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "GraphDoc", into = "GraphDoc")]
pub struct ResourceGraph {
    nodes: Vec<Node>,
    links: Vec<Link>,
    edges: Vec<Edge>,
    index: HashMap<NodeId, usize>,
    adjacency: Vec<Vec<Neighbor>>,
}

impl PartialEq for ResourceGraph {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.links == other.links
    }
}

impl TryFrom<GraphDoc> for ResourceGraph {
    type Error = Error;

    fn try_from(doc: GraphDoc) -> Result<Self, Error> {
        ResourceGraph::new(doc.nodes, doc.edges)
    }
}

impl From<ResourceGraph> for GraphDoc {
    fn from(g: ResourceGraph) -> Self {
        GraphDoc {
            nodes: g.nodes,
            edges: g.links,
        }
    }
}

impl ResourceGraph {
    pub fn new(nodes: Vec<Node>, links: Vec<Link>) -> Result<Self, Error> {
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, node) in nodes.iter().enumerate() {
            if !non_negative(node.capacity) {
                return Err(Error::Graph(format!(
                    "nodes[{i}].capacity of {} must be finite and >= 0, got {}",
                    node.id, node.capacity
                )));
            }
            if index.insert(node.id.clone(), i).is_some() {
                return Err(Error::Graph(format!("nodes[{i}].id {} is declared twice", node.id)));
            }
        }

        let mut edges = Vec::with_capacity(links.len());
        let mut adjacency = vec![Vec::new(); nodes.len()];
        let mut seen = BTreeSet::new();
        for (i, link) in links.iter().enumerate() {
            let a = *index
                .get(&link.u)
                .ok_or_else(|| Error::Graph(format!("edges[{i}].u {} is not a declared node", link.u)))?;
            let b = *index
                .get(&link.v)
                .ok_or_else(|| Error::Graph(format!("edges[{i}].v {} is not a declared node", link.v)))?;
            if a == b {
                return Err(Error::Graph(format!("edges[{i}] is a self-loop on {}", link.u)));
            }
            if !non_negative(link.bandwidth) {
                return Err(Error::Graph(format!(
                    "edges[{i}].bandwidth must be finite and >= 0, got {}",
                    link.bandwidth
                )));
            }
            if !non_negative(link.latency) {
                return Err(Error::Graph(format!(
                    "edges[{i}].latency must be finite and >= 0, got {}",
                    link.latency
                )));
            }
            let (a, b) = (a.min(b), a.max(b));
            if !seen.insert((a, b)) {
                return Err(Error::Graph(format!(
                    "edges[{i}] duplicates the link {}-{}",
                    link.u, link.v
                )));
            }
            adjacency[a].push(Neighbor { node: b, edge: i });
            adjacency[b].push(Neighbor { node: a, edge: i });
            edges.push(Edge {
                a,
                b,
                bandwidth: link.bandwidth,
                latency: link.latency,
            });
        }
        for list in &mut adjacency {
            list.sort_by_key(|n| n.node);
        }

        Ok(ResourceGraph {
            nodes,
            links,
            edges,
            index,
            adjacency,
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn index_of(&self, id: &NodeId) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn id(&self, node: usize) -> &NodeId {
        &self.nodes[node].id
    }

    pub fn capacity(&self, node: usize) -> f64 {
        self.nodes[node].capacity
    }

    /// Neighbors of `node`, sorted by index.
    pub fn neighbors(&self, node: usize) -> &[Neighbor] {
        &self.adjacency[node]
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<&Edge> {
        let list = self.adjacency.get(a)?;
        list.binary_search_by_key(&b, |n| n.node)
            .ok()
            .map(|i| &self.edges[list[i].edge])
    }

    /// Average number of incident links per node.
    pub fn avg_degree(&self) -> f64 {
        if self.nodes.is_empty() {
            0.0
        } else {
            2.0 * self.edges.len() as f64 / self.nodes.len() as f64
        }
    }

    pub fn total_latency(&self) -> f64 {
        self.edges.iter().map(|e| e.latency).sum()
    }

    pub fn mean_latency(&self) -> f64 {
        if self.edges.is_empty() {
            0.0
        } else {
            self.total_latency() / self.edges.len() as f64
        }
    }
}

/// A linear pipeline: source, computations, sink. `bw_reqs[i]` belongs to
/// the dataflow edge `(i, i + 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataflowPath {
    pub comp_reqs: Vec<f64>,
    pub bw_reqs: Vec<f64>,
    pub source_pin: NodeId,
    pub sink_pin: NodeId,
}

impl DataflowPath {
    pub fn len(&self) -> usize {
        self.comp_reqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comp_reqs.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Pin,
    Capacity,
    Bandwidth,
    Continuity,
    Structure,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub location: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn from_violations(violations: Vec<Violation>) -> Self {
        FeasibilityReport {
            feasible: violations.is_empty(),
            violations,
        }
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.feasible {
            return f.write_str("feasible");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{:?}: {}", v.kind, v.location)?;
        }
        Ok(())
    }
}

pub(crate) fn violation(kind: ViolationKind, location: impl Into<String>) -> Violation {
    Violation {
        kind,
        location: location.into(),
    }
}

/// Structural checks on an instance. Does not decide solvability.
pub fn validate_instance(graph: &ResourceGraph, path: &DataflowPath) -> FeasibilityReport {
    use ViolationKind::*;
    let mut out = Vec::new();
    let p = path.comp_reqs.len();
    if p < 2 {
        out.push(violation(Structure, format!("path has {p} nodes, at least 2 required")));
    }
    if path.bw_reqs.len() + 1 != p.max(1) {
        out.push(violation(
            Structure,
            format!("path has {} nodes but {} bandwidth requirements", p, path.bw_reqs.len()),
        ));
    }
    for (i, c) in path.comp_reqs.iter().enumerate() {
        if !non_negative(*c) {
            out.push(violation(
                Structure,
                format!("comp_reqs[{i}] = {c} is negative or not finite"),
            ));
        }
    }
    for (i, b) in path.bw_reqs.iter().enumerate() {
        if !non_negative(*b) {
            out.push(violation(
                Structure,
                format!("bw_reqs[{i}] = {b} is negative or not finite"),
            ));
        }
    }
    if graph.index_of(&path.source_pin).is_none() {
        out.push(violation(
            Pin,
            format!("source_pin {} is not in the graph", path.source_pin),
        ));
    }
    if graph.index_of(&path.sink_pin).is_none() {
        out.push(violation(
            Pin,
            format!("sink_pin {} is not in the graph", path.sink_pin),
        ));
    }
    if path.source_pin == path.sink_pin {
        out.push(violation(
            Pin,
            format!("source_pin and sink_pin are both {}", path.source_pin),
        ));
    }
    FeasibilityReport::from_violations(out)
}

/// The on-disk instance document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceDoc {
    pub graph: ResourceGraph,
    pub path: DataflowPath,
}

/// A validated instance with resolved pins.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceDoc", into = "InstanceDoc")]
pub struct Instance {
    pub graph: ResourceGraph,
    pub path: DataflowPath,
    source: usize,
    sink: usize,
}

impl TryFrom<InstanceDoc> for Instance {
    type Error = Error;

    fn try_from(doc: InstanceDoc) -> Result<Self, Error> {
        Instance::new(doc.graph, doc.path)
    }
}

impl From<Instance> for InstanceDoc {
    fn from(inst: Instance) -> Self {
        InstanceDoc {
            graph: inst.graph,
            path: inst.path,
        }
    }
}

impl Instance {
    pub fn new(graph: ResourceGraph, path: DataflowPath) -> Result<Self, Error> {
        let report = validate_instance(&graph, &path);
        if !report.feasible {
            return Err(Error::InvalidInstance(report));
        }
        let source = graph.index_of(&path.source_pin).expect("validated");
        let sink = graph.index_of(&path.sink_pin).expect("validated");
        Ok(Instance {
            graph,
            path,
            source,
            sink,
        })
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    /// Number of dataflow nodes.
    pub fn p(&self) -> usize {
        self.path.comp_reqs.len()
    }

    /// Converts a complete partial map to the vertex/edge mapping form.
    pub fn complete(&self, m: &PartialMap) -> CompleteMapping {
        assert_eq!(m.prefix_len, self.p(), "map is not complete");
        let mut vertex_map = Vec::with_capacity(self.p());
        let mut block_of = Vec::with_capacity(self.p());
        for (bi, block) in m.blocks.iter().enumerate() {
            for _ in 0..block.count {
                vertex_map.push(self.graph.id(block.node).clone());
                block_of.push(bi);
            }
        }
        let edge_map = (0..self.p() - 1)
            .map(|e| {
                m.blocks[block_of[e]..=block_of[e + 1]]
                    .iter()
                    .map(|b| self.graph.id(b.node).clone())
                    .collect()
            })
            .collect();
        CompleteMapping {
            vertex_map,
            edge_map,
            cost: m.cost,
        }
    }

    /// Recovers the block sequence of a mapping laid out along a single
    /// resource walk. Returns `None` when the mapping does not have that shape.
    pub fn blocks_of(&self, m: &CompleteMapping) -> Option<Vec<Block>> {
        if m.vertex_map.len() != self.p() || m.edge_map.len() + 1 != self.p() {
            return None;
        }
        let mut blocks = vec![Block {
            node: self.graph.index_of(&m.vertex_map[0])?,
            count: 1,
        }];
        for (e, hops) in m.edge_map.iter().enumerate() {
            if hops.first() != Some(&m.vertex_map[e]) || hops.last() != Some(&m.vertex_map[e + 1]) {
                return None;
            }
            for id in &hops[1..] {
                blocks.push(Block {
                    node: self.graph.index_of(id)?,
                    count: 0,
                });
            }
            blocks.last_mut().expect("non-empty").count += 1;
        }
        Some(blocks)
    }
}

/// A run of consecutive dataflow nodes placed on one resource node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Block {
    pub node: usize,
    pub count: usize,
}

/// A prefix of the pipeline placed along a simple resource path starting at
/// the source pin. The last block sits on the node that currently holds it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartialMap {
    pub blocks: Vec<Block>,
    pub prefix_len: usize,
    pub cost: f64,
}

impl PartialMap {
    pub fn at_source(source: usize, count: usize) -> Self {
        PartialMap {
            blocks: vec![Block { node: source, count }],
            prefix_len: count,
            cost: 0.0,
        }
    }

    pub fn last_node(&self) -> usize {
        self.blocks.last().expect("partial map has at least one block").node
    }

    pub fn contains(&self, node: usize) -> bool {
        self.blocks.iter().any(|b| b.node == node)
    }

    pub fn hops(&self) -> usize {
        self.blocks.len() - 1
    }

    /// Index of the dataflow edge whose tail is placed and head is not.
    pub fn in_flight_edge(&self) -> Option<usize> {
        self.prefix_len.checked_sub(1)
    }

    /// Checks every structural invariant of a partial map against `inst`.
    pub fn check(&self, inst: &Instance) -> Result<(), String> {
        let g = &inst.graph;
        let path = &inst.path;
        if self.blocks.is_empty() {
            return Err("no blocks".into());
        }
        if self.blocks[0].node != inst.source() {
            return Err("first block is not on the source pin".into());
        }
        if self.prefix_len >= 1 && self.blocks[0].count == 0 {
            return Err("source block is empty".into());
        }
        let total: usize = self.blocks.iter().map(|b| b.count).sum();
        if total != self.prefix_len || total > inst.p() {
            return Err(format!(
                "block counts sum to {total}, prefix_len is {}",
                self.prefix_len
            ));
        }
        let distinct: BTreeSet<usize> = self.blocks.iter().map(|b| b.node).collect();
        if distinct.len() != self.blocks.len() {
            return Err("resource path revisits a node".into());
        }
        let mut placed = 0;
        let mut cost = 0.0;
        for (i, block) in self.blocks.iter().enumerate() {
            let load: f64 = path.comp_reqs[placed..placed + block.count].iter().sum();
            if load > g.capacity(block.node) {
                return Err(format!("block {i} exceeds capacity"));
            }
            placed += block.count;
            if let Some(next) = self.blocks.get(i + 1) {
                let edge = g
                    .edge_between(block.node, next.node)
                    .ok_or_else(|| format!("blocks {i} and {} are not adjacent", i + 1))?;
                let e = placed
                    .checked_sub(1)
                    .filter(|e| *e < path.bw_reqs.len())
                    .ok_or_else(|| format!("no dataflow edge in flight after block {i}"))?;
                if path.bw_reqs[e] > edge.bandwidth {
                    return Err(format!("hop {i} lacks bandwidth for dataflow edge {e}"));
                }
                cost += edge.latency;
            }
        }
        if cost != self.cost {
            return Err(format!("cost {} does not match hop latencies {cost}", self.cost));
        }
        Ok(())
    }
}

/// Full vertex map plus the resource path of every dataflow edge. A
/// singleton path is a zero-length (co-located) edge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompleteMapping {
    pub vertex_map: Vec<NodeId>,
    pub edge_map: Vec<Vec<NodeId>>,
    /// Claimed total latency; defaults to 0 when absent from input.
    #[serde(default)]
    pub cost: f64,
}

/// Directed edge of a dataflow DAG.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DagEdge {
    pub from: String,
    pub to: String,
    pub bandwidth: f64,
}

/// General dataflow DAG; only verified, never solved.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataflowDag {
    pub nodes: BTreeMap<String, f64>,
    pub edges: Vec<DagEdge>,
    pub source_pins: BTreeMap<String, NodeId>,
    pub sink_pins: BTreeMap<String, NodeId>,
}

impl DataflowDag {
    pub fn validate(&self) -> Vec<Violation> {
        use ViolationKind::*;
        let mut out = Vec::new();
        for (id, c) in &self.nodes {
            if !non_negative(*c) {
                out.push(violation(
                    Structure,
                    format!("dag node {id} requirement {c} is invalid"),
                ));
            }
        }
        for e in &self.edges {
            for end in [&e.from, &e.to] {
                if !self.nodes.contains_key(end) {
                    out.push(violation(
                        Structure,
                        format!("dag edge {}->{} names unknown node {end}", e.from, e.to),
                    ));
                }
            }
            if !non_negative(e.bandwidth) {
                out.push(violation(
                    Structure,
                    format!("dag edge {}->{} bandwidth is invalid", e.from, e.to),
                ));
            }
        }
        if self.source_pins.is_empty() || self.sink_pins.is_empty() {
            out.push(violation(Structure, "dag needs at least one source and one sink"));
        }
        for s in self.source_pins.keys() {
            if self.sink_pins.contains_key(s) {
                out.push(violation(Structure, format!("dag node {s} is both source and sink")));
            }
        }
        for s in self.source_pins.keys().chain(self.sink_pins.keys()) {
            if !self.nodes.contains_key(s) {
                out.push(violation(Structure, format!("pinned dag node {s} is not declared")));
            }
        }
        if !self.is_acyclic() {
            out.push(violation(Structure, "dag edges contain a cycle"));
        }
        out
    }

    fn is_acyclic(&self) -> bool {
        let mut indegree: BTreeMap<&str, usize> = self.nodes.keys().map(|k| (k.as_str(), 0)).collect();
        for e in &self.edges {
            *indegree.entry(e.to.as_str()).or_default() += 1;
            indegree.entry(e.from.as_str()).or_default();
        }
        let mut ready: Vec<&str> = indegree.iter().filter(|(_, d)| **d == 0).map(|(k, _)| *k).collect();
        let mut visited = 0;
        while let Some(n) = ready.pop() {
            visited += 1;
            for e in self.edges.iter().filter(|e| e.from == n) {
                let d = indegree.get_mut(e.to.as_str()).expect("inserted");
                *d -= 1;
                if *d == 0 {
                    ready.push(e.to.as_str());
                }
            }
        }
        visited == indegree.len()
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn graph(nodes: &[(&str, f64)], links: &[(&str, &str, f64, f64)]) -> ResourceGraph {
        ResourceGraph::new(
            nodes
                .iter()
                .map(|(id, c)| Node {
                    id: (*id).into(),
                    capacity: *c,
                })
                .collect(),
            links
                .iter()
                .map(|(u, v, b, l)| Link {
                    u: (*u).into(),
                    v: (*v).into(),
                    bandwidth: *b,
                    latency: *l,
                })
                .collect(),
        )
        .unwrap()
    }

    pub fn path(comp: &[f64], bw: &[f64], s: &str, t: &str) -> DataflowPath {
        DataflowPath {
            comp_reqs: comp.to_vec(),
            bw_reqs: bw.to_vec(),
            source_pin: s.into(),
            sink_pin: t.into(),
        }
    }

    pub fn k3_graph() -> ResourceGraph {
        graph(
            &[("A", 2.0), ("B", 1.0), ("C", 2.0)],
            &[("A", "B", 5.0, 1.0), ("B", "C", 5.0, 1.0), ("A", "C", 2.0, 5.0)],
        )
    }

    pub fn k3() -> Instance {
        Instance::new(k3_graph(), path(&[1.0, 1.0, 1.0], &[3.0, 3.0], "A", "C")).unwrap()
    }
}
