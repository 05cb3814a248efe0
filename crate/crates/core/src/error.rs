use std::path::PathBuf;

use thiserror::Error;

use crate::graph::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("node {0} is out of range for a graph with {1} nodes")]
    UnknownNode(NodeId, usize),

    #[error("self-loop on node {0} is not allowed")]
    SelfLoop(NodeId),

    #[error("edge {0} -> {1} already present")]
    DuplicateEdge(NodeId, NodeId),

    #[error("edge {0} -> {1} does not exist")]
    MissingEdge(NodeId, NodeId),

    #[error("closure of edge {0} -> {1} cannot be determined from the available lists")]
    Undeterminable(NodeId, NodeId),

    #[error("graph carries no community labels")]
    NoCommunities,

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("exact baseline enumeration supports k <= {max}, got k = {k}; use the Monte Carlo estimate instead")]
    EnumerationTooLarge { k: usize, max: usize },

    #[error("no edges in snapshot")]
    EmptySnapshot,

    #[error("{0}")]
    Correlation(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: u64,
        msg: String,
    },

    #[error("invalid experiment configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn parse(path: &std::path::Path, line: u64, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.to_path_buf(),
            line,
            msg: msg.into(),
        }
    }
}
