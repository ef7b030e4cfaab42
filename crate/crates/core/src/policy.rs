//! Admission (map-set pruning) and neighbor-selection policies shared by the
//! centralized solver and the simulator.

use indexmap::IndexMap;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Block, Instance, PartialMap};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AdmissionPolicy {
    KeepAll,
    LeastCost,
    /// Metropolis acceptance of non-minimal maps with geometric cooling,
    /// `T(round) = t0 * alpha^round`.
    Annealed {
        t0: f64,
        alpha: f64,
        max_slot: usize,
    },
}

impl AdmissionPolicy {
    /// Annealing with `t0 = mean link latency * p`, `alpha = 0.9`, `max_slot = 4`.
    pub fn annealed_default(inst: &Instance) -> Self {
        AdmissionPolicy::Annealed {
            t0: inst.graph.mean_latency() * inst.p() as f64,
            alpha: 0.9,
            max_slot: 4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let AdmissionPolicy::Annealed { t0, alpha, max_slot } = *self {
            if !(t0.is_finite() && t0 > 0.0) {
                return Err(Error::InvalidParams(format!("t0 must be positive, got {t0}")));
            }
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(Error::InvalidParams(format!("alpha must lie in (0, 1), got {alpha}")));
            }
            if max_slot < 1 {
                return Err(Error::InvalidParams("max_slot must be at least 1".into()));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            AdmissionPolicy::KeepAll => "keepall",
            AdmissionPolicy::LeastCost => "leastcost",
            AdmissionPolicy::Annealed { .. } => "annealed",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NeighborPolicy {
    All,
    RandomK { k: usize },
}

impl NeighborPolicy {
    pub fn validate(&self) -> Result<()> {
        match self {
            NeighborPolicy::RandomK { k: 0 } => Err(Error::InvalidParams("k must be at least 1".into())),
            _ => Ok(()),
        }
    }
}

/// The maps retained for one `(node, prefix length)` pair, keyed by block
/// sequence, in insertion order.
#[derive(Clone, Debug, Default)]
pub struct Slot {
    entries: IndexMap<Vec<Block>, f64>,
}

impl Slot {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, blocks: &[Block]) -> bool {
        self.entries.contains_key(blocks)
    }

    pub fn remove(&mut self, blocks: &[Block]) -> bool {
        self.entries.swap_remove(blocks).is_some()
    }

    /// Position and cost of the cheapest map; the earliest one on ties.
    pub fn min(&self) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, (_, &c)) in self.entries.iter().enumerate() {
            if best.is_none_or(|(_, b)| c < b) {
                best = Some((i, c));
            }
        }
        best
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[Block], f64)> {
        self.entries.iter().map(|(b, c)| (b.as_slice(), *c))
    }

    /// Applies `decision` for `candidate`. Returns the number of maps removed.
    pub fn apply(&mut self, decision: &Admission, candidate: &PartialMap) -> usize {
        match decision {
            Admission::Reject => 0,
            Admission::Admit { evict } => {
                let removed = match evict {
                    Some(i) => {
                        self.entries.shift_remove_index(*i);
                        1
                    }
                    None => 0,
                };
                self.entries.insert(candidate.blocks.clone(), candidate.cost);
                removed
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Admission {
    /// Admit, evicting the entry at the given slot position first.
    Admit {
        evict: Option<usize>,
    },
    Reject,
}

impl Admission {
    pub fn admitted(&self) -> bool {
        matches!(self, Admission::Admit { .. })
    }
}

/// Temperature after `round` cooling steps.
pub fn temperature(t0: f64, alpha: f64, round: u32) -> f64 {
    t0 * alpha.powi(round as i32)
}

/// Decides whether `candidate` enters `slot`.
pub fn admit<R: Rng + ?Sized>(
    slot: &Slot,
    candidate: &PartialMap,
    policy: &AdmissionPolicy,
    round: u32,
    rng: &mut R,
) -> Admission {
    if slot.contains(&candidate.blocks) {
        return Admission::Reject;
    }
    match *policy {
        AdmissionPolicy::KeepAll => Admission::Admit { evict: None },
        AdmissionPolicy::LeastCost => match slot.min() {
            None => Admission::Admit { evict: None },
            Some((i, cost)) if candidate.cost < cost => Admission::Admit { evict: Some(i) },
            Some(_) => Admission::Reject,
        },
        AdmissionPolicy::Annealed { t0, alpha, max_slot } => {
            let Some((min_at, min_cost)) = slot.min() else {
                return Admission::Admit { evict: None };
            };
            let delta = candidate.cost - min_cost;
            if delta >= 0.0 {
                let t = temperature(t0, alpha, round);
                let keep = if t > 0.0 { (-delta / t).exp() } else { 0.0 };
                let draw: f64 = rng.gen();
                if delta > 0.0 && draw >= keep {
                    return Admission::Reject;
                }
            }
            if slot.len() < max_slot {
                return Admission::Admit { evict: None };
            }
            // Overflow: drop the most expensive map other than the minimum.
            let worst = slot
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != min_at)
                .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1).then(b.0.cmp(&a.0)));
            let new_min = delta < 0.0;
            match worst {
                Some((i, (_, cost))) if new_min || candidate.cost < cost => Admission::Admit { evict: Some(i) },
                // max_slot == 1 and the candidate is cheaper than the lone minimum
                None if new_min => Admission::Admit { evict: Some(min_at) },
                _ => Admission::Reject,
            }
        }
    }
}

/// Picks the neighbors a map is extended towards.
pub fn select_neighbors<T: Clone, R: Rng + ?Sized>(neighbors: &[T], policy: &NeighborPolicy, rng: &mut R) -> Vec<T> {
    match *policy {
        NeighborPolicy::All => neighbors.to_vec(),
        NeighborPolicy::RandomK { k } if k >= neighbors.len() => neighbors.to_vec(),
        NeighborPolicy::RandomK { k } => {
            let mut picked: Vec<usize> = rand::seq::index::sample(rng, neighbors.len(), k).into_vec();
            picked.sort_unstable();
            picked.into_iter().map(|i| neighbors[i].clone()).collect()
        }
    }
}
