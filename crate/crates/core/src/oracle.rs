//! Exhaustive ground truth for small instances and the Longest-Path
//! reduction used to build adversarial ones.
//!
//! Nothing here shares code with the solvers: feasibility of every
//! candidate is decided by `verify_path_mapping`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Block, CompleteMapping, DataflowPath, Instance, Link, Node, NodeId, ResourceGraph};
use crate::verify::{mapping_cost, verify_path_mapping};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleLimits {
    pub max_nodes: usize,
    /// Enumerate regardless of `max_nodes`.
    pub force: bool,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_nodes: 10,
            force: false,
        }
    }
}

impl OracleLimits {
    fn check(&self, graph: &ResourceGraph) -> Result<()> {
        if !self.force && graph.node_count() > self.max_nodes {
            return Err(Error::OracleLimit {
                nodes: graph.node_count(),
                limit: self.max_nodes,
            });
        }
        Ok(())
    }
}

/// Every simple path `from -> to`, depth first, neighbors in index order.
pub fn simple_paths(graph: &ResourceGraph, from: usize, to: usize) -> Vec<Vec<usize>> {
    fn walk(g: &ResourceGraph, to: usize, stack: &mut Vec<usize>, on: &mut [bool], out: &mut Vec<Vec<usize>>) {
        let u = *stack.last().expect("non-empty");
        if u == to {
            out.push(stack.clone());
            return;
        }
        for nb in g.neighbors(u) {
            if !on[nb.node] {
                on[nb.node] = true;
                stack.push(nb.node);
                walk(g, to, stack, on, out);
                stack.pop();
                on[nb.node] = false;
            }
        }
    }
    let mut on = vec![false; graph.node_count()];
    on[from] = true;
    let mut out = Vec::new();
    walk(graph, to, &mut vec![from], &mut on, &mut out);
    out
}

/// All count vectors of length `k` summing to `total` where position 0 and
/// (when `last_positive`) position `k - 1` are at least 1.
fn compositions(k: usize, total: usize, last_positive: bool) -> Vec<Vec<usize>> {
    fn go(i: usize, k: usize, left: usize, last_positive: bool, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == k - 1 {
            let min = if last_positive || k == 1 { 1 } else { 0 };
            if left >= min {
                cur.push(left);
                out.push(cur.clone());
                cur.pop();
            }
            return;
        }
        let min = usize::from(i == 0);
        for c in min..=left {
            cur.push(c);
            go(i + 1, k, left - c, last_positive, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k > 0 {
        go(0, k, total, last_positive, &mut Vec::new(), &mut out);
    }
    out
}

/// Lays out `counts` along `route` as a vertex/edge mapping (cost unset).
fn layout(graph: &ResourceGraph, route: &[usize], counts: &[usize]) -> CompleteMapping {
    let mut position = Vec::new();
    for (i, &c) in counts.iter().enumerate() {
        position.extend(std::iter::repeat_n(i, c));
    }
    let vertex_map = position.iter().map(|&i| graph.id(route[i]).clone()).collect();
    let edge_map = position
        .windows(2)
        .map(|w| route[w[0]..=w[1]].iter().map(|&n| graph.id(n).clone()).collect())
        .collect();
    CompleteMapping {
        vertex_map,
        edge_map,
        cost: 0.0,
    }
}

fn enumerate_with_blocks(inst: &Instance, limits: &OracleLimits) -> Result<Vec<(Vec<Block>, CompleteMapping)>> {
    limits.check(&inst.graph)?;
    let g = &inst.graph;
    let p = inst.p();
    let mut out = Vec::new();
    for route in simple_paths(g, inst.source(), inst.sink()) {
        for counts in compositions(route.len(), p, true) {
            let mut m = layout(g, &route, &counts);
            if verify_path_mapping(g, &inst.path, &m).feasible {
                m.cost = mapping_cost(g, &m)?;
                let blocks: Vec<Block> = route
                    .iter()
                    .zip(&counts)
                    .map(|(&node, &count)| Block { node, count })
                    .collect();
                out.push((blocks, m));
            }
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

/// Every feasible mapping along a simple source-to-sink resource path,
/// ordered by block sequence.
pub fn enumerate_feasible(inst: &Instance, limits: &OracleLimits) -> Result<Vec<CompleteMapping>> {
    Ok(enumerate_with_blocks(inst, limits)?
        .into_iter()
        .map(|(_, m)| m)
        .collect())
}

/// Cheapest feasible mapping; ties go to the smallest block sequence.
pub fn brute_force_optimal(inst: &Instance, limits: &OracleLimits) -> Result<Option<CompleteMapping>> {
    let all = enumerate_with_blocks(inst, limits)?;
    let mut best: Option<&(Vec<Block>, CompleteMapping)> = None;
    for cand in &all {
        // `all` is sorted by blocks, so a strict improvement keeps the tie rule.
        if best.is_none_or(|b| cand.1.cost < b.1.cost) {
            best = Some(cand);
        }
    }
    Ok(best.map(|b| b.1.clone()))
}

/// Feasible prefix placements along `route` (which starts at the source):
/// the last node's block may be empty. Unless the route ends at the sink,
/// only proper prefixes (`1..p`) are produced; at the sink only complete
/// ones.
pub fn enumerate_prefix_maps(inst: &Instance, route: &[usize]) -> Vec<(Vec<Block>, f64)> {
    let g = &inst.graph;
    let path = &inst.path;
    let p = inst.p();
    let at_sink = route.last() == Some(&inst.sink());
    let totals: Vec<usize> = if at_sink { vec![p] } else { (1..p).collect() };
    let mut out = Vec::new();
    for total in totals {
        for counts in compositions(route.len(), total, at_sink) {
            let mut placed = 0;
            let mut cost = 0.0;
            let mut ok = true;
            for (i, &c) in counts.iter().enumerate() {
                let load: f64 = path.comp_reqs[placed..placed + c].iter().sum();
                placed += c;
                if load > g.capacity(route[i]) {
                    ok = false;
                    break;
                }
                if i + 1 < route.len() {
                    let Some(edge) = g.edge_between(route[i], route[i + 1]) else {
                        ok = false;
                        break;
                    };
                    // Dataflow node `placed` is still ahead; edge `placed - 1` crosses.
                    if placed >= p || path.bw_reqs[placed - 1] > edge.bandwidth {
                        ok = false;
                        break;
                    }
                    cost += edge.latency;
                }
            }
            if ok {
                let blocks: Vec<Block> = route
                    .iter()
                    .zip(&counts)
                    .map(|(&node, &count)| Block { node, count })
                    .collect();
                out.push((blocks, cost));
            }
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

/// An unweighted simple graph for the reduction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimpleGraph {
    pub nodes: Vec<NodeId>,
    pub edges: Vec<(NodeId, NodeId)>,
}

/// Builds the BCPM instance asking whether `g` has a simple `s ~> t` path
/// with at least `k` nodes: unit capacities, bandwidths, latencies and
/// requirements, with a `k`-node pipeline pinned to `s` and `t`.
pub fn longest_path_to_bcpm(g: &SimpleGraph, s: &NodeId, t: &NodeId, k: usize) -> Result<Instance> {
    if k < 2 {
        return Err(Error::InvalidParams(format!("K must be at least 2, got {k}")));
    }
    let graph = ResourceGraph::new(
        g.nodes
            .iter()
            .map(|id| Node {
                id: id.clone(),
                capacity: 1.0,
            })
            .collect(),
        g.edges
            .iter()
            .map(|(u, v)| Link {
                u: u.clone(),
                v: v.clone(),
                bandwidth: 1.0,
                latency: 1.0,
            })
            .collect(),
    )?;
    let path = DataflowPath {
        comp_reqs: vec![1.0; k],
        bw_reqs: vec![1.0; k - 1],
        source_pin: s.clone(),
        sink_pin: t.clone(),
    };
    Instance::new(graph, path)
}

/// Node count of the longest simple `s ~> t` path, by exhaustive search.
pub fn longest_simple_path_nodes(g: &SimpleGraph, s: &NodeId, t: &NodeId) -> Option<usize> {
    let n = g.nodes.len();
    let ix = |id: &NodeId| g.nodes.iter().position(|x| x == id);
    let (si, ti) = (ix(s)?, ix(t)?);
    let mut adj = vec![vec![false; n]; n];
    for (u, v) in &g.edges {
        let (a, b) = (ix(u)?, ix(v)?);
        adj[a][b] = true;
        adj[b][a] = true;
    }
    fn dfs(adj: &[Vec<bool>], u: usize, t: usize, depth: usize, seen: &mut [bool], best: &mut Option<usize>) {
        if u == t {
            *best = Some(best.map_or(depth, |b| b.max(depth)));
            return;
        }
        for v in 0..adj.len() {
            if adj[u][v] && !seen[v] {
                seen[v] = true;
                dfs(adj, v, t, depth + 1, seen, best);
                seen[v] = false;
            }
        }
    }
    let mut seen = vec![false; n];
    seen[si] = true;
    let mut best = None;
    dfs(&adj, si, ti, 1, &mut seen, &mut best);
    best
}
