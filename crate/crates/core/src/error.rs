use thiserror::Error;

use crate::model::{FeasibilityReport, NodeId};

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    Graph(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(FeasibilityReport),
    #[error("mapping uses {0}-{1}, which is not a resource link")]
    UnknownEdge(NodeId, NodeId),
    #[error("mapping names unknown resource node {0}")]
    UnknownNode(NodeId),
    #[error("instance has {nodes} resource nodes; the oracle refuses more than {limit}")]
    OracleLimit { nodes: usize, limit: usize },
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
