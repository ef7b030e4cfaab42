//! Bandwidth-constrained placement of dataflow pipelines onto resource
//! graphs: exact and heuristic solvers, a distributed simulator, and the
//! verification and generation tools around them.

pub mod dist;
pub mod error;
pub mod exact;
pub mod experiment;
pub mod gen;
pub mod model;
pub mod oracle;
pub mod policy;
pub mod search;
pub mod stats;
pub mod verify;

pub use dist::{run_simulation, SimConfig, SimResult};
pub use error::{Error, Result};
pub use exact::{pathmap, Mode, PathmapResult, SolverConfig};
pub use gen::{random_instance, GenParams};
pub use model::{
    validate_instance, Block, CompleteMapping, DataflowDag, DataflowPath, FeasibilityReport, Instance, Link, Node,
    NodeId, PartialMap, ResourceGraph, Violation, ViolationKind,
};
pub use oracle::{brute_force_optimal, enumerate_feasible, OracleLimits};
pub use policy::{AdmissionPolicy, NeighborPolicy};
pub use search::optimal_by_search;
pub use stats::RunStats;
pub use verify::{mapping_cost, verify_path_mapping};
