use alloc::string::String;

use crate::ids::{EdgeKind, NodeId, NodeKind};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("invalid node id {0:?}")]
    InvalidNodeId(String),
    #[error("unknown {what} `{token}`")]
    UnknownToken { what: &'static str, token: String },
    #[error("node `{id}` already exists as {existing}, cannot re-add as {attempted}")]
    KindConflict {
        id: NodeId,
        existing: NodeKind,
        attempted: NodeKind,
    },
    #[error("{kind} edge `{src}` -> `{dst}` does not fit endpoint kinds {src_kind} -> {dst_kind}")]
    EndpointKindMismatch {
        src: NodeId,
        dst: NodeId,
        kind: EdgeKind,
        src_kind: NodeKind,
        dst_kind: NodeKind,
    },
    #[error("edge endpoint `{0}` is not in the graph")]
    DanglingEndpoint(NodeId),
    #[error("self-loop on `{0}`")]
    SelfLoop(NodeId),
    #[error("unknown node `{0}`")]
    UnknownNode(NodeId),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgoError {
    #[error("empty input")]
    EmptyInput,
    #[error("node `{0}` has no community assignment")]
    UnassignedNode(NodeId),
    #[error("operation requires weakly connected components")]
    NotWeak,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IngestError {
    #[error("snapshot contains no records")]
    EmptySnapshot,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DeltaError {
    #[error("snapshots out of order: {from} is not before {to}")]
    OutOfOrderSnapshots { from: String, to: String },
    #[error("snapshot date missing")]
    MissingDate,
    #[error("inconsistent delta: {0}")]
    InconsistentDelta(String),
    #[error("empty input")]
    EmptyInput,
}
