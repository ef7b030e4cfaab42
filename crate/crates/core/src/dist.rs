//! Deterministic discrete-event simulation of the distributed mapping
//! protocol. Each resource node is an actor holding its own map sets; a
//! node extends every map it admits and forwards the extensions to its
//! neighbors as messages delivered after the link latency.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::time::Instant;

use ordered_float::OrderedFloat;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{better, extend, init_source_maps, Mode};
use crate::model::{Block, CompleteMapping, Instance, NodeId, PartialMap};
use crate::policy::{admit, select_neighbors, AdmissionPolicy, NeighborPolicy, Slot};
use crate::stats::RunStats;

/// A partial map in transit. Its last block is the receiver with zero
/// computations placed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapMessage {
    pub seq: u64,
    pub from: usize,
    pub to: usize,
    pub map: PartialMap,
    /// Whether the pipeline requirement definition rides along.
    pub carries_spec: bool,
    pub send_time: f64,
    pub deliver_time: f64,
}

/// One line of a message trace, with node ids resolved.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub seq: u64,
    pub from: NodeId,
    pub to: NodeId,
    pub blocks: Vec<(NodeId, usize)>,
    pub prefix_len: usize,
    pub cost: f64,
    pub carries_spec: bool,
    pub send_time: f64,
    pub deliver_time: f64,
}

impl MapMessage {
    pub fn to_record(&self, inst: &Instance) -> TraceRecord {
        TraceRecord {
            seq: self.seq,
            from: inst.graph.id(self.from).clone(),
            to: inst.graph.id(self.to).clone(),
            blocks: self
                .map
                .blocks
                .iter()
                .map(|b| (inst.graph.id(b.node).clone(), b.count))
                .collect(),
            prefix_len: self.map.prefix_len,
            cost: self.map.cost,
            carries_spec: self.carries_spec,
            send_time: self.send_time,
            deliver_time: self.deliver_time,
        }
    }
}

#[derive(Clone, Debug)]
pub struct NodeState {
    pub node: usize,
    /// Indexed by prefix length.
    pub slots: Vec<Slot>,
    pub seen_spec: bool,
    pub received: u64,
    pub sent: u64,
}

impl NodeState {
    pub fn new(node: usize, p: usize) -> Self {
        NodeState {
            node,
            slots: vec![Slot::default(); p + 1],
            seen_spec: false,
            received: 0,
            sent: 0,
        }
    }

    pub fn resident(&self) -> usize {
        self.slots.iter().map(Slot::len).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeSummary {
    pub node: NodeId,
    pub maps: usize,
    pub received: u64,
    pub sent: u64,
    pub seen_spec: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub mode: Mode,
    pub admission: AdmissionPolicy,
    pub neighbors: NeighborPolicy,
    pub seed: u64,
    /// Events due after this simulated time are not processed. `None`
    /// derives a bound no simple-path message can exceed.
    pub max_simulated_time: Option<f64>,
    /// Stop once this many messages have been sent; the result is then
    /// marked truncated.
    pub max_messages: Option<u64>,
    pub record_trace: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            mode: Mode::Optimal,
            admission: AdmissionPolicy::KeepAll,
            neighbors: NeighborPolicy::All,
            seed: 0,
            max_simulated_time: None,
            max_messages: None,
            record_trace: false,
        }
    }
}

impl SimConfig {
    pub fn with_admission(admission: AdmissionPolicy) -> Self {
        SimConfig {
            admission,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.admission.validate()?;
        self.neighbors.validate()?;
        if let Some(cap) = self.max_simulated_time {
            if cap.is_nan() || cap <= 0.0 {
                return Err(Error::InvalidParams(format!(
                    "max_simulated_time must be positive, got {cap}"
                )));
            }
        }
        Ok(())
    }
}

/// Result of handling one delivered message.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ProcessOutcome {
    pub messages: Vec<MapMessage>,
    pub completion: Option<PartialMap>,
}

/// Shared simulation context: policies, randomness, counters.
pub struct Context<'a> {
    pub inst: &'a Instance,
    pub admission: AdmissionPolicy,
    pub neighbors: NeighborPolicy,
    pub rng: ChaCha8Rng,
    pub stats: RunStats,
    next_seq: u64,
    spec_sent: Vec<bool>,
}

impl<'a> Context<'a> {
    pub fn new(inst: &'a Instance, admission: AdmissionPolicy, neighbors: NeighborPolicy, seed: u64) -> Self {
        Context {
            inst,
            admission,
            neighbors,
            rng: ChaCha8Rng::seed_from_u64(seed),
            stats: RunStats {
                avg_indegree: inst.graph.avg_degree(),
                ..Default::default()
            },
            next_seq: 0,
            spec_sent: vec![false; inst.graph.node_count()],
        }
    }

    fn offer(&mut self, node: &mut NodeState, map: &PartialMap) -> bool {
        let round = map.hops() as u32;
        let slot = &mut node.slots[map.prefix_len];
        let decision = admit(slot, map, &self.admission, round, &mut self.rng);
        let evicted = slot.apply(&decision, map);
        self.stats.maps_discarded += evicted as u64;
        if decision.admitted() {
            self.stats.maps_admitted += 1;
            self.stats.max_slot_size = self.stats.max_slot_size.max(slot.len());
            true
        } else {
            self.stats.maps_discarded += 1;
            false
        }
    }

    /// Sends `map` (held at `node`) to every selected eligible neighbor.
    fn fan_out(&mut self, node: &mut NodeState, map: &PartialMap, now: f64, out: &mut Vec<MapMessage>) {
        let g = &self.inst.graph;
        let u = node.node;
        let Some(edge_ix) = map.in_flight_edge().filter(|e| *e < self.inst.path.bw_reqs.len()) else {
            return;
        };
        let req = self.inst.path.bw_reqs[edge_ix];
        let eligible: Vec<usize> = g
            .neighbors(u)
            .iter()
            .filter(|nb| !map.contains(nb.node) && req <= g.edges()[nb.edge].bandwidth)
            .map(|nb| nb.node)
            .collect();
        for v in select_neighbors(&eligible, &self.neighbors, &mut self.rng) {
            let latency = g.edge_between(u, v).expect("neighbor").latency;
            let mut next = map.clone();
            next.blocks.push(Block { node: v, count: 0 });
            next.cost += latency;
            let carries_spec = !self.spec_sent[v];
            self.spec_sent[v] = true;
            if carries_spec {
                self.stats.spec_messages += 1;
            }
            let seq = self.next_seq;
            self.next_seq += 1;
            self.stats.messages_sent += 1;
            node.sent += 1;
            out.push(MapMessage {
                seq,
                from: u,
                to: v,
                map: next,
                carries_spec,
                send_time: now,
                deliver_time: now + latency,
            });
        }
    }

    /// Starts the protocol at the source: places every feasible prefix there
    /// and forwards each one.
    pub fn bootstrap(&mut self, source: &mut NodeState) -> Vec<MapMessage> {
        source.seen_spec = true;
        let mut out = Vec::new();
        for m in init_source_maps(self.inst) {
            if self.offer(source, &m) {
                self.fan_out(source, &m, 0.0, &mut out);
            }
        }
        out
    }

    /// Handles one map message delivered to `node` at time `now`.
    pub fn process_map(&mut self, node: &mut NodeState, msg: &MapMessage, now: f64) -> ProcessOutcome {
        debug_assert_eq!(msg.to, node.node);
        debug_assert_eq!(msg.map.last_node(), node.node);
        node.received += 1;
        if msg.carries_spec {
            node.seen_spec = true;
        }
        let inst = self.inst;
        let p = inst.p();
        let m = &msg.map;
        let len = m.prefix_len;
        let mut outcome = ProcessOutcome::default();

        if node.node == inst.sink() {
            self.stats.extension_attempts += 1;
            if let Some(full) = extend(inst, m, p - len, node.node) {
                self.stats.extensions_succeeded += 1;
                if self.offer(node, &full) {
                    outcome.completion = Some(full);
                }
            }
            return outcome;
        }

        if !self.offer(node, m) {
            return outcome;
        }
        for x in 0..p - len {
            self.stats.extension_attempts += 1;
            let filled = if x == 0 {
                m.clone()
            } else {
                match extend(inst, m, x, node.node) {
                    Some(filled) => filled,
                    None => break,
                }
            };
            self.stats.extensions_succeeded += 1;
            // the arriving map itself was admitted above
            if x > 0 && !self.offer(node, &filled) {
                continue;
            }
            self.fan_out(node, &filled, now, &mut outcome.messages);
        }
        outcome
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub best: Option<CompleteMapping>,
    /// Every complete mapping admitted at the sink, in arrival order.
    pub solutions: Vec<CompleteMapping>,
    /// Cost of the first complete mapping to arrive.
    pub first_arrival_cost: Option<f64>,
    pub stats: RunStats,
    pub per_node: Vec<NodeSummary>,
    /// The time cap or the message budget stopped the run.
    pub truncated: bool,
    /// Messages still queued when the run stopped.
    pub pending_at_stop: usize,
    #[serde(skip)]
    pub trace: Vec<MapMessage>,
}

/// Runs the event loop until quiescence, a first-feasible stop, or the cap.
pub fn run_simulation(inst: &Instance, config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let started = Instant::now();
    let n = inst.graph.node_count();
    let p = inst.p();
    // No simple path is longer than the sum of all link latencies.
    let cap = config.max_simulated_time.unwrap_or(inst.graph.total_latency() + 1.0);
    let mut ctx = Context::new(inst, config.admission.clone(), config.neighbors.clone(), config.seed);
    let mut nodes: Vec<NodeState> = (0..n).map(|u| NodeState::new(u, p)).collect();

    let mut queue = BinaryHeap::new();
    let mut in_flight = HashMap::new();
    let mut trace = Vec::new();
    type Queue = BinaryHeap<Reverse<(OrderedFloat<f64>, u64)>>;
    let enqueue = |msgs: Vec<MapMessage>,
                   queue: &mut Queue,
                   in_flight: &mut HashMap<u64, MapMessage>,
                   trace: &mut Vec<MapMessage>| {
        for msg in msgs {
            if config.record_trace {
                trace.push(msg.clone());
            }
            queue.push(Reverse((OrderedFloat(msg.deliver_time), msg.seq)));
            in_flight.insert(msg.seq, msg);
        }
    };

    let boot = ctx.bootstrap(&mut nodes[inst.source()]);
    enqueue(boot, &mut queue, &mut in_flight, &mut trace);

    let mut solutions: Vec<PartialMap> = Vec::new();
    let mut truncated = false;
    let mut events = 0usize;
    while let Some(Reverse((OrderedFloat(t), seq))) = queue.pop() {
        if t > cap {
            truncated = true;
            queue.push(Reverse((OrderedFloat(t), seq)));
            break;
        }
        events += 1;
        let msg = in_flight.remove(&seq).expect("queued message");
        let outcome = ctx.process_map(&mut nodes[msg.to], &msg, t);
        enqueue(outcome.messages, &mut queue, &mut in_flight, &mut trace);
        if let Some(done) = outcome.completion {
            solutions.push(done);
            if config.mode == Mode::FirstFeasible {
                break;
            }
        }
        if ctx.stats.messages_sent > config.max_messages.unwrap_or(u64::MAX) {
            truncated = true;
            break;
        }
    }
    log::debug!(
        "simulation processed {events} events, {} messages",
        ctx.stats.messages_sent
    );

    let sink_slot = &nodes[inst.sink()].slots[p];
    let resident: Vec<&PartialMap> = solutions.iter().filter(|m| sink_slot.contains(&m.blocks)).collect();
    let pool: Vec<&PartialMap> = if config.mode == Mode::FirstFeasible {
        solutions.iter().take(1).collect()
    } else {
        resident
    };
    let best = pool.iter().fold(None::<&PartialMap>, |acc, m| match acc {
        Some(b) if !better(m, b) => Some(b),
        _ => Some(*m),
    });

    let mut stats = ctx.stats;
    stats.total_maps = nodes.iter().map(NodeState::resident).sum();
    stats.iterations_used = events;
    stats.wall_ms = started.elapsed().as_secs_f64() * 1e3;
    Ok(SimResult {
        best: best.map(|m| inst.complete(m)),
        first_arrival_cost: solutions.first().map(|m| m.cost),
        solutions: solutions.iter().map(|m| inst.complete(m)).collect(),
        stats,
        per_node: nodes
            .iter()
            .map(|s| NodeSummary {
                node: inst.graph.id(s.node).clone(),
                maps: s.resident(),
                received: s.received,
                sent: s.sent,
                seen_spec: s.seen_spec,
            })
            .collect(),
        truncated,
        pending_at_stop: queue.len(),
        trace,
    })
}
