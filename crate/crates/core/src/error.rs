use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

/// Errors raised anywhere in the preprocessing, storage, and execution layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid-partition: {0}")]
    InvalidPartition(String),

    #[error("vertex {vertex} out of range for a graph of {n} vertices")]
    VertexOutOfRange { vertex: u64, n: u64 },

    #[error("empty-graph: the edge list contains no edges")]
    EmptyGraph,

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("corrupt {kind} file {}: {reason}", path.display())]
    Corrupt {
        kind: &'static str,
        path: PathBuf,
        reason: String,
    },

    #[error("invariant violation: {0}")]
    Invariant(String),

    #[error("infeasible memory budget: {budget} bytes given, at least {required} bytes required")]
    InfeasibleBudget { budget: u64, required: u64 },

    #[error("missing shard set `{0}`; re-run preprocessing with the matching flag")]
    MissingShardSet(&'static str),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("graph too large for the in-memory oracle: {edges} edges (limit {limit})")]
    Oversize { edges: u64, limit: u64 },

    #[error("bad manifest {}: {source}", path.display())]
    Manifest {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: impl AsRef<Path>, source: io::Error) -> Self {
        Error::Io {
            path: path.as_ref().to_path_buf(),
            source,
        }
    }

    pub(crate) fn corrupt(kind: &'static str, path: impl AsRef<Path>, reason: impl Into<String>) -> Self {
        Error::Corrupt {
            kind,
            path: path.as_ref().to_path_buf(),
            reason: reason.into(),
        }
    }
}

/// Attaches a path to a bare `io::Result`.
pub(crate) trait IoContext<T> {
    fn at(self, path: impl AsRef<Path>) -> Result<T>;
}

impl<T> IoContext<T> for io::Result<T> {
    fn at(self, path: impl AsRef<Path>) -> Result<T> {
        self.map_err(|e| Error::io(path, e))
    }
}
