//! Centralized Bellman-Ford style path mapping.
//!
//! Every resource node keeps, per prefix length, the set of partial maps
//! whose last block sits on it. A sweep relaxes every directed orientation of
//! every link; a relaxation extends each map that became resident during the
//! previous sweep across the link in every capacity-feasible way. Maps born
//! in sweep `r` span exactly `r` hops, so `|V| - 1` sweeps cover every simple
//! path.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{Block, CompleteMapping, Instance, PartialMap};
use crate::policy::{admit, select_neighbors, AdmissionPolicy, NeighborPolicy, Slot};
use crate::stats::RunStats;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    FirstFeasible,
    Optimal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub mode: Mode,
    pub admission: AdmissionPolicy,
    pub neighbors: NeighborPolicy,
    /// Keep relaxed maps resident (duplicate suppression) instead of
    /// dropping them after their sweep.
    pub retain_old: bool,
    /// Sweep limit; `None` means `|V| - 1`.
    pub max_iterations: Option<usize>,
    /// Stop once this many maps have been admitted; the result is then
    /// marked truncated.
    pub max_maps: Option<u64>,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            mode: Mode::Optimal,
            admission: AdmissionPolicy::KeepAll,
            neighbors: NeighborPolicy::All,
            retain_old: true,
            max_iterations: None,
            max_maps: None,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn with_admission(admission: AdmissionPolicy) -> Self {
        SolverConfig {
            admission,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.admission.validate()?;
        self.neighbors.validate()?;
        if self.max_iterations == Some(0) {
            return Err(crate::Error::InvalidParams("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// Maps that place the first `l` dataflow nodes on the source, for every `l`
/// up to `p - 1` whose cumulative requirement fits.
pub fn init_source_maps(inst: &Instance) -> Vec<PartialMap> {
    let cap = inst.graph.capacity(inst.source());
    let mut load = 0.0;
    let mut out = Vec::new();
    for l in 1..inst.p() {
        load += inst.path.comp_reqs[l - 1];
        if load > cap {
            break;
        }
        out.push(PartialMap::at_source(inst.source(), l));
    }
    out
}

/// Places the next `x` dataflow nodes on `v`. `v` is either adjacent to the
/// last block (a new block is appended) or the last block's own node (the
/// block is filled in place). Returns `None` when capacity is exceeded.
pub fn extend(inst: &Instance, m: &PartialMap, x: usize, v: usize) -> Option<PartialMap> {
    let start = m.prefix_len;
    if start + x > inst.p() {
        return None;
    }
    let last = m.last_node();
    let (resident, base) = if v == last {
        let b = m.blocks.last().expect("non-empty").count;
        (b, start - b)
    } else {
        (0, start)
    };
    let mut load = 0.0;
    for k in base..start + x {
        load += inst.path.comp_reqs[k];
    }
    if load > inst.graph.capacity(v) {
        return None;
    }
    let mut out = m.clone();
    if v == last {
        out.blocks.last_mut().expect("non-empty").count = resident + x;
    } else {
        let edge = inst.graph.edge_between(last, v)?;
        out.blocks.push(Block { node: v, count: x });
        out.cost += edge.latency;
    }
    out.prefix_len = start + x;
    Some(out)
}

/// Smallest cost first, then lexicographically smallest block sequence.
pub(crate) fn better(a: &PartialMap, b: &PartialMap) -> bool {
    a.cost < b.cost || (a.cost == b.cost && a.blocks < b.blocks)
}

pub(crate) fn slot_index(p: usize, node: usize, len: usize) -> usize {
    node * (p + 1) + len
}

/// Per-node map sets plus the frontier of maps to relax in the current sweep.
pub struct SolverState<'a> {
    inst: &'a Instance,
    config: SolverConfig,
    slots: Vec<Slot>,
    /// Maps relaxed during the current sweep, by slot.
    frontier: Vec<Vec<PartialMap>>,
    /// Maps admitted during the current sweep, by slot.
    next: Vec<Vec<PartialMap>>,
    complete: Vec<PartialMap>,
    round: u32,
    rng: ChaCha8Rng,
    found: bool,
    pub stats: RunStats,
}

impl<'a> SolverState<'a> {
    pub fn new(inst: &'a Instance, config: SolverConfig) -> Self {
        let cells = inst.graph.node_count() * (inst.p() + 1);
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        SolverState {
            inst,
            config,
            slots: vec![Slot::default(); cells],
            frontier: vec![Vec::new(); cells],
            next: vec![Vec::new(); cells],
            complete: Vec::new(),
            round: 0,
            rng,
            found: false,
            stats: RunStats {
                avg_indegree: inst.graph.avg_degree(),
                ..Default::default()
            },
        }
    }

    pub fn slot(&self, node: usize, len: usize) -> &Slot {
        &self.slots[slot_index(self.inst.p(), node, len)]
    }

    /// Current sweep number; maps admitted now are relaxed in the next one.
    pub fn round(&self) -> u32 {
        self.round
    }

    /// Offers `map` to its slot. Admitted maps join the next frontier.
    pub fn offer(&mut self, map: PartialMap) -> bool {
        debug_assert!(
            map.check(self.inst).is_ok(),
            "unsound map {:?}: {:?}",
            map,
            map.check(self.inst)
        );
        let p = self.inst.p();
        let idx = slot_index(p, map.last_node(), map.prefix_len);
        let decision = admit(
            &self.slots[idx],
            &map,
            &self.config.admission,
            self.round,
            &mut self.rng,
        );
        let evicted = self.slots[idx].apply(&decision, &map);
        self.stats.maps_discarded += evicted as u64;
        if !decision.admitted() {
            self.stats.maps_discarded += 1;
            return false;
        }
        self.stats.maps_admitted += 1;
        self.stats.max_slot_size = self.stats.max_slot_size.max(self.slots[idx].len());
        if map.prefix_len == p {
            self.found = true;
            self.complete.push(map);
        } else {
            self.next[idx].push(map);
        }
        true
    }

    /// Makes the maps admitted so far the frontier of the next sweep.
    pub fn advance(&mut self) -> bool {
        if !self.config.retain_old {
            for (idx, maps) in self.frontier.iter().enumerate() {
                for m in maps {
                    self.slots[idx].remove(&m.blocks);
                }
            }
        }
        std::mem::swap(&mut self.frontier, &mut self.next);
        for v in &mut self.next {
            v.clear();
        }
        self.round += 1;
        self.frontier.iter().any(|v| !v.is_empty())
    }

    /// Relaxes the directed link `u -> v`. Returns the number of admissions.
    pub fn relax(&mut self, u: usize, v: usize) -> usize {
        self.stats.relax_calls += 1;
        let inst = self.inst;
        let p = inst.p();
        let Some(edge) = inst.graph.edge_between(u, v) else {
            return 0;
        };
        let bandwidth = edge.bandwidth;
        let sink = inst.sink();
        let mut admitted = 0;
        for len in 1..p {
            if inst.path.bw_reqs[len - 1] > bandwidth {
                continue;
            }
            let idx = slot_index(p, u, len);
            let maps = std::mem::take(&mut self.frontier[idx]);
            for m in &maps {
                if m.contains(v) || !self.slots[idx].contains(&m.blocks) {
                    continue;
                }
                if v == sink {
                    self.stats.extension_attempts += 1;
                    if let Some(full) = extend(inst, m, p - len, v) {
                        self.stats.extensions_succeeded += 1;
                        if self.offer(full) {
                            admitted += 1;
                        }
                    }
                } else {
                    for x in 0..p - len {
                        self.stats.extension_attempts += 1;
                        let Some(mx) = extend(inst, m, x, v) else {
                            break;
                        };
                        self.stats.extensions_succeeded += 1;
                        if self.offer(mx) {
                            admitted += 1;
                        }
                    }
                }
                if self.found && self.config.mode == Mode::FirstFeasible {
                    break;
                }
            }
            self.frontier[idx] = maps;
            if self.found && self.config.mode == Mode::FirstFeasible {
                break;
            }
        }
        admitted
    }

    pub fn found(&self) -> bool {
        self.found
    }

    pub fn complete_maps(&self) -> &[PartialMap] {
        &self.complete
    }

    fn resident_total(&self) -> usize {
        self.slots.iter().map(Slot::len).sum()
    }

    /// Complete maps still resident in the sink slot.
    fn sink_maps(&self) -> Vec<PartialMap> {
        let slot = self.slot(self.inst.sink(), self.inst.p());
        let mut out: Vec<PartialMap> = self
            .complete
            .iter()
            .filter(|m| slot.contains(&m.blocks))
            .cloned()
            .collect();
        out.sort_by(|a, b| a.blocks.cmp(&b.blocks));
        out.dedup_by(|a, b| a.blocks == b.blocks);
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathmapResult {
    pub best: Option<CompleteMapping>,
    /// Complete mappings held at the sink, ordered by block sequence.
    pub all_at_sink: Vec<CompleteMapping>,
    pub stats: RunStats,
    /// The map budget ran out before the sweeps finished.
    pub truncated: bool,
}

/// Runs the centralized solver.
pub fn pathmap(inst: &Instance, config: &SolverConfig) -> Result<PathmapResult> {
    config.validate()?;
    let started = Instant::now();
    let n = inst.graph.node_count();
    let mut state = SolverState::new(inst, config.clone());
    for m in init_source_maps(inst) {
        state.offer(m);
    }
    let limit = config.max_iterations.unwrap_or(n.saturating_sub(1).max(1));
    let mut live = state.advance();
    let mut orientations: Vec<(usize, usize)> = Vec::new();
    let budget = config.max_maps.unwrap_or(u64::MAX);
    let mut truncated = false;
    while live && state.stats.iterations_used < limit && !truncated {
        state.stats.iterations_used += 1;
        orientations.clear();
        for u in 0..n {
            let targets: Vec<usize> = inst.graph.neighbors(u).iter().map(|nb| nb.node).collect();
            let chosen = select_neighbors(&targets, &config.neighbors, &mut state.rng);
            orientations.extend(chosen.into_iter().map(|v| (u, v)));
        }
        for &(u, v) in &orientations {
            state.relax(u, v);
            if state.found && config.mode == Mode::FirstFeasible {
                break;
            }
            if state.stats.maps_admitted > budget {
                truncated = true;
                break;
            }
        }
        if state.found && config.mode == Mode::FirstFeasible {
            break;
        }
        live = state.advance();
    }

    let sink_maps = state.sink_maps();
    let best = match config.mode {
        Mode::FirstFeasible => state.complete.first().cloned(),
        Mode::Optimal => sink_maps
            .iter()
            .fold(None::<&PartialMap>, |acc, m| match acc {
                Some(b) if !better(m, b) => Some(b),
                _ => Some(m),
            })
            .cloned(),
    };
    let mut stats = state.stats.clone();
    stats.total_maps = state.resident_total();
    stats.wall_ms = started.elapsed().as_secs_f64() * 1e3;
    Ok(PathmapResult {
        best: best.map(|m| inst.complete(&m)),
        all_at_sink: sink_maps.iter().map(|m| inst.complete(m)).collect(),
        stats,
        truncated,
    })
}
