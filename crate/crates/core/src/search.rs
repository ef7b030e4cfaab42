//! Exact optimum by best-first search over partial maps with dominance
//! pruning.
//!
//! Uses the same moves as `Relax`, but the future of a partial map depends
//! only on its last node, its prefix length and the set of nodes it has
//! visited. A map is dropped when a settled map in the same slot is no more
//! expensive and visited a subset of its nodes. Maps are settled in cost
//! order, so the first complete map settled is optimal. Among equal-cost
//! optima the one returned is not canonical.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::time::Instant;

use ordered_float::OrderedFloat;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exact::{extend, init_source_maps, slot_index};
use crate::model::{CompleteMapping, Instance, PartialMap};
use crate::stats::RunStats;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub best: Option<CompleteMapping>,
    pub stats: RunStats,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Visited(Vec<u64>);

impl Visited {
    fn of(m: &PartialMap, n: usize) -> Self {
        let mut bits = vec![0u64; n.div_ceil(64)];
        for b in &m.blocks {
            bits[b.node / 64] |= 1 << (b.node % 64);
        }
        Visited(bits)
    }

    fn subset_of(&self, other: &Visited) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }
}

struct Label {
    map: PartialMap,
    visited: Visited,
}

pub fn optimal_by_search(inst: &Instance) -> Result<SearchResult> {
    let started = Instant::now();
    let n = inst.graph.node_count();
    let p = inst.p();
    let sink = inst.sink();
    let mut stats = RunStats {
        avg_indegree: inst.graph.avg_degree(),
        ..Default::default()
    };
    let mut labels: Vec<Label> = Vec::new();
    let mut heap = BinaryHeap::new();
    // Settled, non-dominated visited sets with their costs, per slot.
    let mut settled: Vec<Vec<(f64, Visited)>> = vec![Vec::new(); n * (p + 1)];

    let push = |map: PartialMap, labels: &mut Vec<Label>, heap: &mut BinaryHeap<_>| {
        let visited = Visited::of(&map, n);
        heap.push(Reverse((OrderedFloat(map.cost), labels.len())));
        labels.push(Label { map, visited });
    };
    for m in init_source_maps(inst) {
        push(m, &mut labels, &mut heap);
    }

    let mut best = None;
    while let Some(Reverse((_, id))) = heap.pop() {
        let Label { map: m, visited } = std::mem::replace(
            &mut labels[id],
            Label {
                map: PartialMap::at_source(0, 0),
                visited: Visited(Vec::new()),
            },
        );
        let u = m.last_node();
        let len = m.prefix_len;
        let idx = slot_index(p, u, len);
        if settled[idx].iter().any(|(c, s)| *c <= m.cost && s.subset_of(&visited)) {
            stats.maps_discarded += 1;
            continue;
        }
        settled[idx].push((m.cost, visited));
        stats.maps_admitted += 1;
        stats.iterations_used += 1;
        stats.max_slot_size = stats.max_slot_size.max(settled[idx].len());
        if len == p {
            best = Some(m);
            break;
        }
        for nb in inst.graph.neighbors(u) {
            let v = nb.node;
            stats.relax_calls += 1;
            if m.contains(v) || inst.path.bw_reqs[len - 1] > inst.graph.edges()[nb.edge].bandwidth {
                continue;
            }
            let range = if v == sink { p - len..p - len + 1 } else { 0..p - len };
            for x in range {
                stats.extension_attempts += 1;
                let Some(next) = extend(inst, &m, x, v) else {
                    break;
                };
                stats.extensions_succeeded += 1;
                push(next, &mut labels, &mut heap);
            }
        }
    }
    stats.total_maps = settled.iter().map(Vec::len).sum();
    stats.wall_ms = started.elapsed().as_secs_f64() * 1e3;
    Ok(SearchResult {
        best: best.map(|m| inst.complete(&m)),
        stats,
    })
}
