use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the algebra, network, timing and CLI layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("{op} requires a square matrix, got {rows}x{cols}")]
    NotSquare {
        op: &'static str,
        rows: usize,
        cols: usize,
    },

    #[error("{0} of an empty vector or matrix")]
    Empty(&'static str),

    #[error("invalid max-plus scalar {0}: finite values must not be NaN or +inf")]
    InvalidScalar(f64),

    #[error("network has no nodes")]
    EmptyNetwork,

    #[error("node id {id} is outside 1..={count}")]
    NodeIdOutOfRange { id: usize, count: usize },

    #[error("node id {0} appears more than once")]
    DuplicateNodeId(usize),

    #[error("arc ({from}, {to}) refers to a node that does not exist")]
    DanglingArc { from: usize, to: usize },

    #[error("self-loop on node {0}")]
    SelfLoop(usize),

    #[error("arc ({from}, {to}) is listed more than once")]
    DuplicateArc { from: usize, to: usize },

    #[error("cycle detected: {}", format_cycle(.0))]
    Cycle(Vec<usize>),

    #[error("invalid {family} distribution: {reason}")]
    InvalidDistribution {
        family: &'static str,
        reason: String,
    },

    #[error("common-shock weight {0} is outside [0, 1]")]
    InvalidCouplingWeight(f64),

    #[error("node index {index} is outside 1..={count}")]
    BadNodeIndex { index: usize, count: usize },

    #[error("service-time table has {found} entries in cycle {cycle}, expected {expected}")]
    ServiceTableShape {
        cycle: usize,
        expected: usize,
        found: usize,
    },

    #[error("service time {value} at node {node} is negative or not finite")]
    InvalidServiceTime { node: usize, value: f64 },

    #[error("{0} must be at least 1")]
    ZeroCount(&'static str),

    #[error("order is not a topological order of the network: {0}")]
    BadOrder(String),

    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}:{line}:{column}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    InvalidNetworkFile {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error("failed to write report: {0}")]
    Output(String),
}

fn format_cycle(ids: &[usize]) -> String {
    ids.iter()
        .map(|id| id.to_string())
        .collect::<Vec<_>>()
        .join(" -> ")
}

pub type Result<T> = std::result::Result<T, Error>;
