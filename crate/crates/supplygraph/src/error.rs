use std::path::PathBuf;

use supplygraph_core::{DeltaError, GraphError, IngestError, NodeId};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    UnreadableInput {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Delta(#[from] DeltaError),
    #[error("no anonymization salt given (use --salt or SUPPLY_GRAPH_SALT)")]
    SaltMissing,
    #[error("digest collision between `{first}` and `{second}` ({digest})")]
    CollisionDetected {
        first: NodeId,
        second: NodeId,
        digest: String,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("platform adapter: {0}")]
    Adapter(String),
}

impl Error {
    pub(crate) fn format(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Format {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
