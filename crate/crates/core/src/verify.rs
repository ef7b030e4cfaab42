//! Feasibility checks for path and DAG mappings, cost evaluation, and the
//! bandwidth-filtered shortest path used to complete vertex-only mappings.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use ordered_float::OrderedFloat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    violation, CompleteMapping, DataflowDag, DataflowPath, FeasibilityReport, NodeId, ResourceGraph, Violation,
    ViolationKind,
};

fn resolve(graph: &ResourceGraph, id: &NodeId, what: &str, out: &mut Vec<Violation>) -> Option<usize> {
    let ix = graph.index_of(id);
    if ix.is_none() {
        out.push(violation(
            ViolationKind::Structure,
            format!("{what} names unknown node {id}"),
        ));
    }
    ix
}

/// Continuity and bandwidth of one mapped dataflow edge. Repeated
/// consecutive nodes are zero-length hops.
fn check_edge_path(
    graph: &ResourceGraph,
    label: &str,
    tail: Option<usize>,
    head: Option<usize>,
    hops: &[NodeId],
    bw_req: f64,
    out: &mut Vec<Violation>,
) {
    use ViolationKind::*;
    if hops.is_empty() {
        out.push(violation(Continuity, format!("{label} is mapped to an empty path")));
        return;
    }
    let nodes: Vec<Option<usize>> = hops.iter().map(|h| resolve(graph, h, label, out)).collect();
    if nodes.iter().any(Option::is_none) {
        return;
    }
    let nodes: Vec<usize> = nodes.into_iter().flatten().collect();
    if tail.is_some() && Some(nodes[0]) != tail {
        out.push(violation(
            Continuity,
            format!("{label} path starts at {} instead of its tail", hops[0]),
        ));
    }
    if head.is_some() && nodes.last().copied() != head {
        out.push(violation(
            Continuity,
            format!("{label} path ends at {} instead of its head", hops[hops.len() - 1]),
        ));
    }
    for w in nodes.windows(2) {
        if w[0] == w[1] {
            continue;
        }
        match graph.edge_between(w[0], w[1]) {
            None => out.push(violation(
                Continuity,
                format!(
                    "{label} hops {}-{}, which is not a link",
                    graph.id(w[0]),
                    graph.id(w[1])
                ),
            )),
            Some(edge) if bw_req > edge.bandwidth => out.push(violation(
                Bandwidth,
                format!(
                    "{label} needs bandwidth {bw_req} but {}-{} offers {}",
                    graph.id(w[0]),
                    graph.id(w[1]),
                    edge.bandwidth
                ),
            )),
            Some(_) => {}
        }
    }
}

fn check_capacity(graph: &ResourceGraph, placements: impl Iterator<Item = (usize, f64)>, out: &mut Vec<Violation>) {
    let mut load: BTreeMap<usize, f64> = BTreeMap::new();
    for (node, req) in placements {
        *load.entry(node).or_default() += req;
    }
    for (node, used) in load {
        if used > graph.capacity(node) {
            out.push(violation(
                ViolationKind::Capacity,
                format!(
                    "node {} hosts {used} but offers {}",
                    graph.id(node),
                    graph.capacity(node)
                ),
            ));
        }
    }
}

/// Checks pins, per-node capacity, per-edge bandwidth and walk continuity of
/// a complete path mapping.
pub fn verify_path_mapping(graph: &ResourceGraph, path: &DataflowPath, m: &CompleteMapping) -> FeasibilityReport {
    use ViolationKind::*;
    let p = path.comp_reqs.len();
    let mut out = Vec::new();
    if m.vertex_map.len() != p {
        out.push(violation(
            Structure,
            format!("vertex_map has {} entries, path has {p} nodes", m.vertex_map.len()),
        ));
    }
    if m.edge_map.len() + 1 != p {
        out.push(violation(
            Structure,
            format!(
                "edge_map has {} entries, path has {} edges",
                m.edge_map.len(),
                p.saturating_sub(1)
            ),
        ));
    }
    if !out.is_empty() {
        return FeasibilityReport::from_violations(out);
    }

    if m.vertex_map[0] != path.source_pin {
        out.push(violation(
            Pin,
            format!("source mapped to {}, pinned to {}", m.vertex_map[0], path.source_pin),
        ));
    }
    if m.vertex_map[p - 1] != path.sink_pin {
        out.push(violation(
            Pin,
            format!("sink mapped to {}, pinned to {}", m.vertex_map[p - 1], path.sink_pin),
        ));
    }

    let nodes: Vec<Option<usize>> = m
        .vertex_map
        .iter()
        .enumerate()
        .map(|(i, id)| resolve(graph, id, &format!("vertex_map[{i}]"), &mut out))
        .collect();
    check_capacity(
        graph,
        nodes
            .iter()
            .zip(&path.comp_reqs)
            .filter_map(|(n, c)| n.map(|n| (n, *c))),
        &mut out,
    );
    for (e, hops) in m.edge_map.iter().enumerate() {
        check_edge_path(
            graph,
            &format!("dataflow edge {e}"),
            nodes[e],
            nodes[e + 1],
            hops,
            path.bw_reqs[e],
            &mut out,
        );
    }
    FeasibilityReport::from_violations(out)
}

/// Adds the hop latencies of `hops` to `total` one at a time, the same
/// order the solvers accumulate them in, so costs agree bit for bit.
fn add_path_latency(graph: &ResourceGraph, hops: &[NodeId], total: &mut f64) -> Result<()> {
    for w in hops.windows(2) {
        if w[0] == w[1] {
            continue;
        }
        let a = graph.index_of(&w[0]).ok_or_else(|| Error::UnknownNode(w[0].clone()))?;
        let b = graph.index_of(&w[1]).ok_or_else(|| Error::UnknownNode(w[1].clone()))?;
        let edge = graph
            .edge_between(a, b)
            .ok_or_else(|| Error::UnknownEdge(w[0].clone(), w[1].clone()))?;
        *total += edge.latency;
    }
    Ok(())
}

fn total_latency<'a>(graph: &ResourceGraph, paths: impl IntoIterator<Item = &'a [NodeId]>) -> Result<f64> {
    let mut total = 0.0;
    for hops in paths {
        add_path_latency(graph, hops, &mut total)?;
    }
    Ok(total)
}

/// Total latency: every resource link counted once per dataflow edge routed
/// over it. Zero-length paths contribute nothing.
pub fn mapping_cost(graph: &ResourceGraph, m: &CompleteMapping) -> Result<f64> {
    total_latency(graph, m.edge_map.iter().map(Vec::as_slice))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstrainedPath {
    pub nodes: Vec<NodeId>,
    pub latency: f64,
}

/// Minimum-latency path from `a` to `b` over links with bandwidth >= `bw`,
/// by node index.
pub fn constrained_shortest_path(graph: &ResourceGraph, a: usize, b: usize, bw: f64) -> Option<(Vec<usize>, f64)> {
    let n = graph.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    dist[a] = 0.0;
    heap.push(Reverse((OrderedFloat(0.0), a)));
    while let Some(Reverse((OrderedFloat(d), u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        if u == b {
            break;
        }
        for nb in graph.neighbors(u) {
            let edge = &graph.edges()[nb.edge];
            if edge.bandwidth < bw {
                continue;
            }
            let nd = d + edge.latency;
            if nd < dist[nb.node] {
                dist[nb.node] = nd;
                prev[nb.node] = u;
                heap.push(Reverse((OrderedFloat(nd), nb.node)));
            }
        }
    }
    if !dist[b].is_finite() {
        return None;
    }
    let mut nodes = vec![b];
    let mut cur = b;
    while cur != a {
        cur = prev[cur];
        nodes.push(cur);
    }
    nodes.reverse();
    Some((nodes, dist[b]))
}

/// Among paths using only links with `B_av >= bw`, one of minimum latency.
/// `a == b` yields the zero-length path.
pub fn widest_constrained_path(graph: &ResourceGraph, a: &NodeId, b: &NodeId, bw: f64) -> Option<ConstrainedPath> {
    let ai = graph.index_of(a)?;
    let bi = graph.index_of(b)?;
    constrained_shortest_path(graph, ai, bi, bw).map(|(nodes, latency)| ConstrainedPath {
        nodes: nodes.into_iter().map(|n| graph.id(n).clone()).collect(),
        latency,
    })
}

/// Verifies a vertex-only mapping by routing each dataflow edge along the
/// cheapest path that satisfies its bandwidth requirement.
pub fn verify_vertex_mapping(
    graph: &ResourceGraph,
    path: &DataflowPath,
    vertex_map: &[NodeId],
) -> (FeasibilityReport, Option<CompleteMapping>) {
    let p = path.comp_reqs.len();
    if vertex_map.len() != p {
        let v = violation(
            ViolationKind::Structure,
            format!("vertex_map has {} entries, path has {p} nodes", vertex_map.len()),
        );
        return (FeasibilityReport::from_violations(vec![v]), None);
    }
    let mut edge_map = Vec::with_capacity(p.saturating_sub(1));
    let mut missing = Vec::new();
    for e in 0..p.saturating_sub(1) {
        match widest_constrained_path(graph, &vertex_map[e], &vertex_map[e + 1], path.bw_reqs[e]) {
            Some(route) => edge_map.push(route.nodes),
            None => {
                missing.push(violation(
                    ViolationKind::Bandwidth,
                    format!(
                        "no path {}~>{} carries bandwidth {} for dataflow edge {e}",
                        vertex_map[e],
                        vertex_map[e + 1],
                        path.bw_reqs[e]
                    ),
                ));
                edge_map.push(vec![vertex_map[e].clone(), vertex_map[e + 1].clone()]);
            }
        }
    }
    let mut m = CompleteMapping {
        vertex_map: vertex_map.to_vec(),
        edge_map,
        cost: 0.0,
    };
    let mut report = verify_path_mapping(graph, path, &m);
    if !missing.is_empty() {
        // Placeholder hops for unroutable edges would only repeat the finding.
        report
            .violations
            .retain(|v| v.kind != ViolationKind::Continuity && v.kind != ViolationKind::Bandwidth);
        report.violations.extend(missing);
        report.feasible = false;
        return (report, None);
    }
    m.cost = mapping_cost(graph, &m).unwrap_or(f64::NAN);
    let feasible = report.feasible;
    (report, feasible.then_some(m))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DagEdgePath {
    pub from: String,
    pub to: String,
    pub path: Vec<NodeId>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DagMapping {
    pub vertex_map: BTreeMap<String, NodeId>,
    pub edge_map: Vec<DagEdgePath>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DagReport {
    #[serde(flatten)]
    pub report: FeasibilityReport,
    /// Latency with each link counted once per DAG edge routed over it.
    pub cost_per_edge: Option<f64>,
    /// Latency with each used link counted once in total.
    pub cost_shared_once: Option<f64>,
}

/// Checks a DAG mapping: pins of every source and sink, aggregated capacity
/// per resource node, and bandwidth per DAG edge (shared links are checked
/// for each DAG edge independently).
pub fn verify_dag_mapping(graph: &ResourceGraph, dag: &DataflowDag, m: &DagMapping) -> DagReport {
    use ViolationKind::*;
    let mut out = dag.validate();

    for (job, pin) in dag.source_pins.iter().chain(&dag.sink_pins) {
        match m.vertex_map.get(job) {
            Some(r) if r == pin => {}
            Some(r) => out.push(violation(Pin, format!("{job} mapped to {r}, pinned to {pin}"))),
            None => {}
        }
    }

    let mut nodes: BTreeMap<&str, Option<usize>> = BTreeMap::new();
    for job in dag.nodes.keys() {
        match m.vertex_map.get(job) {
            None => out.push(violation(Structure, format!("dag node {job} has no vertex mapping"))),
            Some(r) => {
                nodes.insert(job, resolve(graph, r, &format!("vertex_map[{job}]"), &mut out));
            }
        }
    }
    check_capacity(
        graph,
        nodes.iter().filter_map(|(job, n)| n.map(|n| (n, dag.nodes[*job]))),
        &mut out,
    );

    let mut routed: Vec<&[NodeId]> = Vec::new();
    for e in &dag.edges {
        let label = format!("dag edge {}->{}", e.from, e.to);
        let Some(mapped) = m.edge_map.iter().find(|d| d.from == e.from && d.to == e.to) else {
            out.push(violation(Structure, format!("{label} has no edge mapping")));
            continue;
        };
        let tail = nodes.get(e.from.as_str()).copied().flatten();
        let head = nodes.get(e.to.as_str()).copied().flatten();
        check_edge_path(graph, &label, tail, head, &mapped.path, e.bandwidth, &mut out);
        routed.push(&mapped.path);
    }

    let walkable = !out.iter().any(|v| v.kind == Structure || v.kind == Continuity);
    let (cost_per_edge, cost_shared_once) = if walkable {
        let per_edge = total_latency(graph, routed.iter().copied()).ok();
        let mut used = BTreeSet::new();
        for hops in &routed {
            for w in hops.windows(2) {
                if w[0] != w[1] {
                    let (a, b) = (graph.index_of(&w[0]), graph.index_of(&w[1]));
                    if let (Some(a), Some(b)) = (a, b) {
                        used.insert((a.min(b), a.max(b)));
                    }
                }
            }
        }
        let shared = used
            .into_iter()
            .map(|(a, b)| graph.edge_between(a, b).map(|e| e.latency).unwrap_or(0.0))
            .sum();
        (per_edge, Some(shared))
    } else {
        (None, None)
    };

    DagReport {
        report: FeasibilityReport::from_violations(out),
        cost_per_edge,
        cost_shared_once,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::*;
    use crate::model::DagEdge;
    use proptest::prelude::*;

    fn ids(v: &[&str]) -> Vec<NodeId> {
        v.iter().map(|s| NodeId::from(*s)).collect()
    }

    fn cm(vertex: &[&str], edges: &[&[&str]]) -> CompleteMapping {
        CompleteMapping {
            vertex_map: ids(vertex),
            edge_map: edges.iter().map(|e| ids(e)).collect(),
            cost: 0.0,
        }
    }

    #[test]
    fn k3_route_via_b_is_feasible_with_cost_two() {
        let inst = k3();
        let m = cm(&["A", "B", "C"], &[&["A", "B"], &["B", "C"]]);
        assert!(verify_path_mapping(&inst.graph, &inst.path, &m).feasible);
        assert_eq!(mapping_cost(&inst.graph, &m).unwrap(), 2.0);
    }

    #[test]
    fn k3_direct_link_lacks_bandwidth() {
        let inst = k3();
        let m = cm(&["A", "A", "C"], &[&["A"], &["A", "C"]]);
        let r = verify_path_mapping(&inst.graph, &inst.path, &m);
        assert!(!r.feasible);
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].kind, ViolationKind::Bandwidth);
        assert!(r.violations[0].location.contains("dataflow edge 1"));
    }

    #[test]
    fn wrong_source_is_pin_violation() {
        let inst = k3();
        let m = cm(&["B", "B", "C"], &[&["B"], &["B", "C"]]);
        assert!(verify_path_mapping(&inst.graph, &inst.path, &m).has(ViolationKind::Pin));
    }

    #[test]
    fn costs() {
        let inst = k3();
        let colocated = cm(&["A", "A", "A"], &[&["A"], &["A"]]);
        assert_eq!(mapping_cost(&inst.graph, &colocated).unwrap(), 0.0);
        let long_hop = cm(&["A", "A", "C"], &[&["A"], &["A", "B", "C"]]);
        assert_eq!(mapping_cost(&inst.graph, &long_hop).unwrap(), 2.0);
        assert!(verify_path_mapping(&inst.graph, &inst.path, &long_hop).feasible);
        let bogus = cm(&["A", "A", "C"], &[&["A"], &["A", "Q"]]);
        assert!(matches!(mapping_cost(&inst.graph, &bogus), Err(Error::UnknownNode(_))));
    }

    #[test]
    fn repeated_node_is_zero_length_hop() {
        let inst = k3();
        let m = cm(&["A", "B", "C"], &[&["A", "B", "B"], &["B", "B", "C"]]);
        assert!(verify_path_mapping(&inst.graph, &inst.path, &m).feasible);
        assert_eq!(mapping_cost(&inst.graph, &m).unwrap(), 2.0);
    }

    #[test]
    fn broken_walk_is_continuity_violation() {
        let inst = k3();
        let m = cm(&["A", "B", "C"], &[&["A", "B"], &["A", "C"]]);
        assert!(verify_path_mapping(&inst.graph, &inst.path, &m).has(ViolationKind::Continuity));
    }

    #[test]
    fn capacity_aggregated_over_colocated_nodes() {
        let inst = k3();
        let m = cm(&["A", "B", "C"], &[&["A", "B"], &["B", "C"]]);
        let mut heavy = inst.path.clone();
        heavy.comp_reqs[1] = 1.5;
        assert!(verify_path_mapping(&inst.graph, &heavy, &m).has(ViolationKind::Capacity));
    }

    #[test]
    fn constrained_paths_on_k3() {
        let g = k3_graph();
        let r = widest_constrained_path(&g, &"A".into(), &"C".into(), 3.0).unwrap();
        assert_eq!(r.nodes, ids(&["A", "B", "C"]));
        assert_eq!(r.latency, 2.0);
        assert!(widest_constrained_path(&g, &"A".into(), &"C".into(), 6.0).is_none());
        let same = widest_constrained_path(&g, &"B".into(), &"B".into(), 1e9).unwrap();
        assert_eq!(same.nodes, ids(&["B"]));
        assert_eq!(same.latency, 0.0);
    }

    #[test]
    fn vertex_only_mapping_synthesizes_routes() {
        let inst = k3();
        let (report, m) = verify_vertex_mapping(&inst.graph, &inst.path, &ids(&["A", "A", "C"]));
        assert!(report.feasible);
        let m = m.unwrap();
        assert_eq!(m.edge_map[1], ids(&["A", "B", "C"]));
        assert_eq!(m.cost, 2.0);

        let mut wide = inst.path.clone();
        wide.bw_reqs = vec![6.0, 6.0];
        let (report, m) = verify_vertex_mapping(&inst.graph, &wide, &ids(&["A", "A", "C"]));
        assert!(m.is_none());
        assert!(report.has(ViolationKind::Bandwidth));
    }

    /// Eight-node network on which the two-source example layout
    /// (s1, s2 -> x1 -> x2 -> t, with s1 -> x2) fits.
    fn dag_fixture() -> (ResourceGraph, DataflowDag, DagMapping) {
        let g = graph(
            &[
                ("A", 1.0),
                ("B", 1.0),
                ("C", 1.0),
                ("D", 1.0),
                ("E", 2.0),
                ("F", 1.0),
                ("G", 3.0),
                ("H", 1.0),
            ],
            &[
                ("A", "C", 10.0, 1.0),
                ("C", "E", 6.0, 2.0),
                ("B", "D", 5.0, 1.0),
                ("D", "E", 5.0, 3.0),
                ("E", "G", 4.0, 1.0),
                ("C", "G", 6.0, 2.0),
                ("G", "H", 4.0, 1.0),
                ("H", "F", 4.0, 1.0),
                ("A", "B", 1.0, 1.0),
                ("D", "F", 1.0, 1.0),
            ],
        );
        let n = |s: &str| s.to_string();
        let dag = DataflowDag {
            nodes: [
                (n("s1"), 1.0),
                (n("s2"), 1.0),
                (n("x1"), 2.0),
                (n("x2"), 3.0),
                (n("t"), 1.0),
            ]
            .into_iter()
            .collect(),
            edges: vec![
                DagEdge {
                    from: n("s1"),
                    to: n("x1"),
                    bandwidth: 5.0,
                },
                DagEdge {
                    from: n("s2"),
                    to: n("x1"),
                    bandwidth: 4.0,
                },
                DagEdge {
                    from: n("x1"),
                    to: n("x2"),
                    bandwidth: 3.0,
                },
                DagEdge {
                    from: n("s1"),
                    to: n("x2"),
                    bandwidth: 4.0,
                },
                DagEdge {
                    from: n("x2"),
                    to: n("t"),
                    bandwidth: 2.0,
                },
            ],
            source_pins: [(n("s1"), "A".into()), (n("s2"), "B".into())].into_iter().collect(),
            sink_pins: [(n("t"), "F".into())].into_iter().collect(),
        };
        let path = |from: &str, to: &str, hops: &[&str]| DagEdgePath {
            from: n(from),
            to: n(to),
            path: ids(hops),
        };
        let m = DagMapping {
            vertex_map: [
                (n("s1"), "A".into()),
                (n("s2"), "B".into()),
                (n("x1"), "E".into()),
                (n("x2"), "G".into()),
                (n("t"), "F".into()),
            ]
            .into_iter()
            .collect(),
            edge_map: vec![
                path("s1", "x1", &["A", "C", "E"]),
                path("s2", "x1", &["B", "D", "E"]),
                path("x1", "x2", &["E", "G"]),
                path("s1", "x2", &["A", "C", "G"]),
                path("x2", "t", &["G", "H", "F"]),
            ],
        };
        (g, dag, m)
    }

    #[test]
    fn dag_example_layout_is_feasible() {
        let (g, dag, m) = dag_fixture();
        let r = verify_dag_mapping(&g, &dag, &m);
        assert!(r.report.feasible, "{}", r.report);
        // A-C carries both edges out of s1.
        assert_eq!(r.cost_per_edge, Some(3.0 + 4.0 + 1.0 + 3.0 + 2.0));
        assert_eq!(r.cost_shared_once, Some(12.0));
    }

    #[test]
    fn dag_capacity_and_continuity_violations() {
        let (mut_g, dag, m) = dag_fixture();
        let mut nodes = mut_g.nodes().to_vec();
        nodes[4].capacity = 0.0;
        let g = ResourceGraph::new(nodes, mut_g.links().to_vec()).unwrap();
        let mut dag1 = dag.clone();
        dag1.nodes.insert("x1".into(), 1.0);
        assert!(verify_dag_mapping(&g, &dag1, &m).report.has(ViolationKind::Capacity));

        let mut m2 = m.clone();
        m2.edge_map[2].path = ids(&["E", "G", "H"]);
        let r = verify_dag_mapping(&mut_g, &dag, &m2);
        assert!(r.report.has(ViolationKind::Continuity));
        assert_eq!(r.cost_per_edge, None);

        let mut m3 = m;
        m3.edge_map.pop();
        assert!(verify_dag_mapping(&mut_g, &dag, &m3)
            .report
            .has(ViolationKind::Structure));
    }

    fn random_graph() -> impl Strategy<Value = ResourceGraph> {
        (3usize..7).prop_flat_map(|n| {
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
            let m = pairs.len();
            (
                Just(n),
                Just(pairs),
                prop::collection::vec((any::<bool>(), 0u8..10, 1u8..10), m),
            )
                .prop_map(|(n, pairs, attrs)| {
                    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
                    let nodes: Vec<(&str, f64)> = names.iter().map(|s| (s.as_str(), 1.0)).collect();
                    let links: Vec<(&str, &str, f64, f64)> = pairs
                        .iter()
                        .zip(&attrs)
                        .filter(|(_, a)| a.0)
                        .map(|((a, b), (_, bw, lat))| (names[*a].as_str(), names[*b].as_str(), *bw as f64, *lat as f64))
                        .collect();
                    graph(&nodes, &links)
                })
        })
    }

    proptest! {
        #[test]
        fn zero_bandwidth_equals_plain_shortest_path(g in random_graph(), a in 0usize..3, b in 0usize..3) {
            let constrained = constrained_shortest_path(&g, a, b, 0.0).map(|r| r.1);
            // Floyd-Warshall over all links as the unconstrained reference.
            let n = g.node_count();
            let mut d = vec![vec![f64::INFINITY; n]; n];
            for (i, row) in d.iter_mut().enumerate() { row[i] = 0.0; }
            for e in g.edges() {
                d[e.a][e.b] = d[e.a][e.b].min(e.latency);
                d[e.b][e.a] = d[e.b][e.a].min(e.latency);
            }
            for k in 0..n { for i in 0..n { for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] { d[i][j] = d[i][k] + d[k][j]; }
            }}}
            let reference = d[a][b].is_finite().then_some(d[a][b]);
            prop_assert_eq!(constrained, reference);
        }

        #[test]
        fn raising_bandwidth_never_lowers_latency(g in random_graph(), a in 0usize..3, b in 0usize..3, lo in 0u8..10, step in 0u8..10) {
            let low = constrained_shortest_path(&g, a, b, lo as f64);
            let high = constrained_shortest_path(&g, a, b, (lo + step) as f64);
            match (low, high) {
                (None, Some(_)) => prop_assert!(false, "higher requirement found a path the lower one did not"),
                (Some((_, l)), Some((_, h))) => prop_assert!(h >= l),
                _ => {}
            }
        }
    }
}
