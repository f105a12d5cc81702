use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("node id {node} out of range (graph has {num_nodes} nodes)")]
    NodeRange { node: u64, num_nodes: usize },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("bad file format: {0}")]
    Format(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    /// The requested sharding / blocking does not fit the on-chip buffers.
    #[error("capacity: {0}")]
    Capacity(String),

    /// Scratchpad or pipeline hand-off violated; always a scheduler bug.
    #[error("protocol violation: {0}")]
    Protocol(String),

    #[error("deadlock at cycle {cycle}: {detail}")]
    Deadlock { cycle: u64, detail: String },

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    /// Process exit status for the command-line tool: 3 when the workload
    /// does not fit on chip, 2 for bad input or configuration, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Capacity(_) => 3,
            Error::Parse { .. }
            | Error::NodeRange { .. }
            | Error::Validation(_)
            | Error::Format(_)
            | Error::Parameter(_)
            | Error::Shape(_)
            | Error::Config(_) => 2,
            Error::Io { .. } | Error::Protocol(_) | Error::Deadlock { .. } => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
