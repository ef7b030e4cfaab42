use serde::{Deserialize, Serialize};

/// Counters collected during one solver or simulator run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub relax_calls: u64,
    pub extension_attempts: u64,
    pub extensions_succeeded: u64,
    pub maps_admitted: u64,
    pub maps_discarded: u64,
    /// Largest number of maps ever held by a single slot (`S`).
    pub max_slot_size: usize,
    /// Maps resident in all slots when the run ended.
    pub total_maps: usize,
    pub iterations_used: usize,
    pub messages_sent: u64,
    /// Messages that carried the pipeline requirement definition.
    pub spec_messages: u64,
    pub avg_indegree: f64,
    pub wall_ms: f64,
}
