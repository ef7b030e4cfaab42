//! Seeded Waxman topologies and random dataflow paths.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DataflowPath, Instance, Link, Node, NodeId, ResourceGraph};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenParams {
    pub n: usize,
    pub waxman_alpha: f64,
    pub waxman_beta: f64,
    pub capacity_range: [f64; 2],
    pub bandwidth_range: [f64; 2],
    pub latency_range: [f64; 2],
    pub p: usize,
    pub req_scale: f64,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            n: 10,
            waxman_alpha: 0.15,
            waxman_beta: 0.2,
            capacity_range: [1.0, 10.0],
            bandwidth_range: [10.0, 100.0],
            latency_range: [1.0, 10.0],
            p: 4,
            req_scale: 0.5,
            seed: 0,
        }
    }
}

impl GenParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if self.n < 2 {
            return bad(format!("n must be at least 2, got {}", self.n));
        }
        if self.p < 2 {
            return bad(format!("p must be at least 2, got {}", self.p));
        }
        for (name, x) in [
            ("waxman_alpha", self.waxman_alpha),
            ("waxman_beta", self.waxman_beta),
            ("req_scale", self.req_scale),
        ] {
            if !(x > 0.0 && x.is_finite()) {
                return bad(format!("{name} must be positive, got {x}"));
            }
        }
        if self.waxman_beta > 1.0 {
            return bad(format!("waxman_beta must be at most 1, got {}", self.waxman_beta));
        }
        if self.req_scale > 1.0 {
            return bad(format!("req_scale must be at most 1, got {}", self.req_scale));
        }
        for (name, [lo, hi]) in [
            ("capacity_range", self.capacity_range),
            ("bandwidth_range", self.bandwidth_range),
            ("latency_range", self.latency_range),
        ] {
            if !(lo >= 0.0 && lo <= hi && hi.is_finite()) {
                return bad(format!("{name} must satisfy 0 <= lo <= hi, got [{lo}, {hi}]"));
            }
        }
        Ok(())
    }
}

/// Intermediate generation state, exposed for distributional tests.
#[derive(Clone, Debug)]
pub struct WaxmanLayout {
    pub positions: Vec<(f64, f64)>,
    /// Pair probabilities `q_ij` for `i < j`, in row-major order.
    pub probabilities: Vec<f64>,
    pub waxman_edges: usize,
    pub tree_edges_added: usize,
    pub graph: ResourceGraph,
}

fn uniform(rng: &mut ChaCha8Rng, [lo, hi]: [f64; 2]) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

/// Decodes a Prüfer sequence into the edges of a labelled tree on `n` nodes.
fn prufer_tree(seq: &[usize], n: usize) -> Vec<(usize, usize)> {
    let mut degree = vec![1usize; n];
    for &x in seq {
        degree[x] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &x in seq {
        let leaf = (0..n).find(|&i| degree[i] == 1).expect("a leaf exists");
        edges.push((leaf.min(x), leaf.max(x)));
        degree[leaf] -= 1;
        degree[x] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&i| degree[i] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

#[allow(clippy::needless_range_loop)]
pub fn waxman_layout(params: &GenParams) -> Result<WaxmanLayout> {
    params.validate()?;
    let n = params.n;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let positions: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())).collect();
    let dist = |i: usize, j: usize| {
        let (a, b) = (positions[i], positions[j]);
        ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
    };
    let mut l = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            l = l.max(dist(i, j));
        }
    }
    let mut adj = vec![vec![false; n]; n];
    let mut probabilities = Vec::with_capacity(n * (n - 1) / 2);
    let mut waxman_edges = 0;
    for i in 0..n {
        for j in i + 1..n {
            let q = if l > 0.0 {
                params.waxman_beta * (-dist(i, j) / (params.waxman_alpha * l)).exp()
            } else {
                params.waxman_beta
            };
            probabilities.push(q);
            if rng.gen::<f64>() < q {
                adj[i][j] = true;
                waxman_edges += 1;
            }
        }
    }
    let seq: Vec<usize> = (0..n.saturating_sub(2)).map(|_| rng.gen_range(0..n)).collect();
    let mut tree_edges_added = 0;
    for (a, b) in prufer_tree(&seq, n) {
        if !adj[a][b] {
            adj[a][b] = true;
            tree_edges_added += 1;
        }
    }

    let nodes = (0..n)
        .map(|i| Node {
            id: NodeId(format!("n{i}")),
            capacity: uniform(&mut rng, params.capacity_range),
        })
        .collect();
    let mut links = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if adj[i][j] {
                links.push(Link {
                    u: NodeId(format!("n{i}")),
                    v: NodeId(format!("n{j}")),
                    bandwidth: uniform(&mut rng, params.bandwidth_range),
                    latency: uniform(&mut rng, params.latency_range),
                });
            }
        }
    }
    Ok(WaxmanLayout {
        positions,
        probabilities,
        waxman_edges,
        tree_edges_added,
        graph: ResourceGraph::new(nodes, links)?,
    })
}

pub fn waxman_topology(params: &GenParams) -> Result<ResourceGraph> {
    Ok(waxman_layout(params)?.graph)
}

fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.sort_by(f64::total_cmp);
    let k = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[k]
    } else {
        (xs[k - 1] + xs[k]) / 2.0
    }
}

pub fn random_dataflow_path(graph: &ResourceGraph, params: &GenParams) -> Result<DataflowPath> {
    params.validate()?;
    let n = graph.node_count();
    if n < 2 {
        return Err(Error::InvalidParams(format!("graph needs at least 2 nodes, has {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(1);
    let s = rng.gen_range(0..n);
    let mut t = rng.gen_range(0..n - 1);
    if t >= s {
        t += 1;
    }
    let c_hi = params.req_scale * median(graph.nodes().iter().map(|n| n.capacity).collect());
    let b_hi = params.req_scale * median(graph.edges().iter().map(|e| e.bandwidth).collect());
    let comp_reqs = (0..params.p).map(|_| uniform(&mut rng, [0.0, c_hi])).collect();
    let bw_reqs = (0..params.p - 1).map(|_| uniform(&mut rng, [0.0, b_hi])).collect();
    Ok(DataflowPath {
        comp_reqs,
        bw_reqs,
        source_pin: graph.id(s).clone(),
        sink_pin: graph.id(t).clone(),
    })
}

pub fn random_instance(params: &GenParams) -> Result<Instance> {
    let graph = waxman_topology(params)?;
    let path = random_dataflow_path(&graph, params)?;
    Instance::new(graph, path)
}
