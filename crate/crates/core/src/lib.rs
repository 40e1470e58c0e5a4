//! Supply-chain graph of machine-learning models and datasets.
//!
//! Nodes are models (base, fine-tune, adapter, quantization, merge) and
//! datasets; edges record how one artifact was produced from another. The
//! crate builds the graph from snapshots of model and dataset cards, answers
//! lineage queries, runs structural analyses and keeps the graph current
//! across snapshots. It needs only `alloc`.

#![no_std]

extern crate alloc;

pub mod algo;
mod error;
mod graph;
mod ids;
pub mod ingest;
mod traverse;

/// Calendar date of a snapshot or of an artifact's first appearance.
pub type Date = chrono::NaiveDate;

pub use error::{AlgoError, DeltaError, GraphError, IngestError};
pub use graph::{Adj, Edge, GraphBuilder, Node, StubPolicy, SupplyChainGraph};
pub use ids::{ArtifactClass, DegreeDirection, Direction, EdgeKind, NodeId, NodeKind, Relation};
pub use traverse::{backward_subgraph, forward_subgraph, BfsWorkspace, Chain, KindCounts, TraversalResult};
pub mod delta;
pub mod report;
pub mod synth;
