//! The heterogeneous supply-chain graph.
//!
//! Graphs are assembled through a [`GraphBuilder`] (single writer) and then
//! frozen into a [`SupplyChainGraph`], a compressed adjacency structure with
//! both out- and in-lists that is immutable and freely shareable between
//! threads.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::error::GraphError;
use crate::ids::{ArtifactClass, DegreeDirection, EdgeKind, NodeId, NodeKind};
use crate::ingest::Evidence;
use crate::Date;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub id: NodeId,
    pub kind: NodeKind,
    pub first_seen: Option<Date>,
    /// Whether any structured card data existed beyond the name.
    pub metadata_present: bool,
}

impl Node {
    pub fn new(id: NodeId, kind: NodeKind) -> Self {
        Node {
            id,
            kind,
            first_seen: None,
            metadata_present: true,
        }
    }

    pub fn stub(id: NodeId, kind: NodeKind) -> Self {
        Node {
            id,
            kind,
            first_seen: None,
            metadata_present: false,
        }
    }
}

/// Directed dependency: `src` is upstream, `dst` is the derived or consuming artifact.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub src: NodeId,
    pub dst: NodeId,
    pub kind: EdgeKind,
}

impl Edge {
    pub fn new(src: NodeId, dst: NodeId, kind: EdgeKind) -> Self {
        Edge { src, dst, kind }
    }
}

/// One adjacency entry: the neighbour's dense index and the edge kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Adj {
    pub node: u32,
    pub kind: EdgeKind,
}

/// What to do when an edge names a node that was never added.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum StubPolicy {
    /// Reject with [`GraphError::DanglingEndpoint`].
    Reject,
    /// Create a metadata-less stub whose kind is inferred from the edge.
    #[default]
    Create,
}

#[derive(Debug, Default)]
pub struct GraphBuilder {
    nodes: BTreeMap<NodeId, Node>,
    edges: BTreeSet<(NodeId, NodeId, EdgeKind)>,
    stubs: BTreeSet<NodeId>,
    policy: StubPolicy,
    snapshot_date: Option<Date>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_stub_policy(policy: StubPolicy) -> Self {
        GraphBuilder {
            policy,
            ..Self::default()
        }
    }

    pub fn set_snapshot_date(&mut self, date: Option<Date>) {
        self.snapshot_date = date;
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.nodes.contains_key(id)
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.get(id)
    }

    /// Inserts a node. Re-adding an id with the same kind is a no-op; a
    /// different kind is a [`GraphError::KindConflict`].
    pub fn add_node(&mut self, node: Node) -> Result<(), GraphError> {
        if let Some(existing) = self.nodes.get(&node.id) {
            if existing.kind != node.kind {
                return Err(GraphError::KindConflict {
                    id: node.id,
                    existing: existing.kind,
                    attempted: node.kind,
                });
            }
            return Ok(());
        }
        self.nodes.insert(node.id.clone(), node);
        Ok(())
    }

    /// Inserts an edge. Returns `Ok(false)` when the triple was already present.
    pub fn add_edge(&mut self, edge: Edge) -> Result<bool, GraphError> {
        if edge.src == edge.dst {
            return Err(GraphError::SelfLoop(edge.src));
        }
        let (src_class, dst_class) = edge.kind.endpoint_classes();
        // Resolve both endpoints before mutating anything.
        let src_kind = self.endpoint_kind(&edge.src, src_class)?;
        let dst_kind = self.endpoint_kind(&edge.dst, dst_class)?;
        if src_kind.class() != src_class || dst_kind.class() != dst_class {
            return Err(GraphError::EndpointKindMismatch {
                src: edge.src,
                dst: edge.dst,
                kind: edge.kind,
                src_kind,
                dst_kind,
            });
        }
        for (id, kind) in [(&edge.src, src_kind), (&edge.dst, dst_kind)] {
            if !self.nodes.contains_key(id) {
                self.nodes.insert(id.clone(), Node::stub(id.clone(), kind));
                self.stubs.insert(id.clone());
            }
        }
        Ok(self.edges.insert((edge.src, edge.dst, edge.kind)))
    }

    fn endpoint_kind(&self, id: &NodeId, class: ArtifactClass) -> Result<NodeKind, GraphError> {
        match self.nodes.get(id) {
            Some(node) => Ok(node.kind),
            None => match self.policy {
                StubPolicy::Reject => Err(GraphError::DanglingEndpoint(id.clone())),
                StubPolicy::Create => Ok(match class {
                    ArtifactClass::Dataset => NodeKind::Dataset,
                    ArtifactClass::Model => NodeKind::BaseModel,
                }),
            },
        }
    }

    /// Finishes construction. Model stubs created by [`add_edge`](Self::add_edge)
    /// are re-classified from their incoming model-model edges.
    pub fn freeze(mut self) -> SupplyChainGraph {
        if !self.stubs.is_empty() {
            let mut best: BTreeMap<&NodeId, EdgeKind> = BTreeMap::new();
            for (_, dst, kind) in &self.edges {
                if let Some(rank) = kind.production_rank() {
                    if self.stubs.contains(dst) {
                        let entry = best.entry(dst).or_insert(*kind);
                        if rank < entry.production_rank().unwrap_or(u8::MAX) {
                            *entry = *kind;
                        }
                    }
                }
            }
            let updates: Vec<(NodeId, NodeKind)> = best
                .into_iter()
                .filter_map(|(id, kind)| Some((id.clone(), kind.produced_kind()?)))
                .collect();
            for (id, kind) in updates {
                if let Some(node) = self.nodes.get_mut(&id) {
                    node.kind = kind;
                }
            }
        }
        let nodes: Vec<Node> = self.nodes.into_values().collect();
        let edges: Vec<(NodeId, NodeId, EdgeKind)> = self.edges.into_iter().collect();
        SupplyChainGraph::from_sorted_parts(nodes, &edges, self.snapshot_date)
    }
}

/// Frozen graph with compressed out- and in-adjacency.
///
/// Nodes are stored in ascending id order, so a node's dense index also
/// orders nodes by id.
#[derive(Clone, Debug)]
pub struct SupplyChainGraph {
    nodes: Vec<Node>,
    index: BTreeMap<NodeId, u32>,
    out_offsets: Vec<u32>,
    out_adj: Vec<Adj>,
    in_offsets: Vec<u32>,
    in_adj: Vec<Adj>,
    node_counts: [usize; 6],
    edge_counts: [usize; 8],
    snapshot_date: Option<Date>,
    pub(crate) evidence: Option<Evidence>,
}

impl Default for SupplyChainGraph {
    fn default() -> Self {
        SupplyChainGraph::from_sorted_parts(Vec::new(), &[], None)
    }
}

impl PartialEq for SupplyChainGraph {
    /// Structural equality: nodes (with attributes) and edges.
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.out_offsets == other.out_offsets && self.out_adj == other.out_adj
    }
}

impl SupplyChainGraph {
    /// `nodes` sorted by id, `edges` sorted and deduplicated, every endpoint present.
    pub(crate) fn from_sorted_parts(
        nodes: Vec<Node>,
        edges: &[(NodeId, NodeId, EdgeKind)],
        snapshot_date: Option<Date>,
    ) -> Self {
        let index: BTreeMap<NodeId, u32> = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.clone(), i as u32))
            .collect();
        let mut node_counts = [0usize; 6];
        for n in &nodes {
            node_counts[n.kind.index()] += 1;
        }
        let mut edge_counts = [0usize; 8];
        let pairs: Vec<(u32, u32, EdgeKind)> = edges
            .iter()
            .map(|(s, d, k)| {
                edge_counts[k.index()] += 1;
                (index[s], index[d], *k)
            })
            .collect();
        let n = nodes.len();
        let (out_offsets, out_adj) = csr(n, pairs.iter().map(|&(s, d, k)| (s, d, k)));
        let (in_offsets, in_adj) = csr(n, pairs.iter().map(|&(s, d, k)| (d, s, k)));
        SupplyChainGraph {
            nodes,
            index,
            out_offsets,
            out_adj,
            in_offsets,
            in_adj,
            node_counts,
            edge_counts,
            snapshot_date,
            evidence: None,
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out_adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.index_of(id).map(|i| &self.nodes[i as usize])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn index_of(&self, id: &str) -> Option<u32> {
        self.index.get(id).copied()
    }

    pub fn node_at(&self, idx: u32) -> &Node {
        &self.nodes[idx as usize]
    }

    pub fn out_adj(&self, idx: u32) -> &[Adj] {
        let i = idx as usize;
        &self.out_adj[self.out_offsets[i] as usize..self.out_offsets[i + 1] as usize]
    }

    pub fn in_adj(&self, idx: u32) -> &[Adj] {
        let i = idx as usize;
        &self.in_adj[self.in_offsets[i] as usize..self.in_offsets[i + 1] as usize]
    }

    /// All edges in (src, dst, kind) order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        (0..self.nodes.len() as u32).flat_map(move |s| {
            self.out_adj(s).iter().map(move |a| Edge {
                src: self.nodes[s as usize].id.clone(),
                dst: self.nodes[a.node as usize].id.clone(),
                kind: a.kind,
            })
        })
    }

    pub fn kind_count(&self, kind: NodeKind) -> usize {
        self.node_counts[kind.index()]
    }

    pub fn edge_kind_count(&self, kind: EdgeKind) -> usize {
        self.edge_counts[kind.index()]
    }

    pub fn snapshot_date(&self) -> Option<Date> {
        self.snapshot_date
    }

    pub fn set_snapshot_date(&mut self, date: Option<Date>) {
        self.snapshot_date = date;
    }

    pub fn degree(&self, id: &str, direction: DegreeDirection) -> Result<usize, GraphError> {
        let idx = self.index_of(id).ok_or_else(|| GraphError::UnknownNode(unknown(id)))?;
        Ok(self.degree_at(idx, direction))
    }

    pub fn degree_at(&self, idx: u32, direction: DegreeDirection) -> usize {
        match direction {
            DegreeDirection::In => self.in_adj(idx).len(),
            DegreeDirection::Out => self.out_adj(idx).len(),
        }
    }

    /// The same nodes with every edge reversed. Endpoint kind rules are not
    /// re-checked, so the result is only meant for structural analysis.
    pub fn reversed(&self) -> SupplyChainGraph {
        SupplyChainGraph {
            nodes: self.nodes.clone(),
            index: self.index.clone(),
            out_offsets: self.in_offsets.clone(),
            out_adj: self.in_adj.clone(),
            in_offsets: self.out_offsets.clone(),
            in_adj: self.out_adj.clone(),
            node_counts: self.node_counts,
            edge_counts: self.edge_counts,
            snapshot_date: self.snapshot_date,
            evidence: None,
        }
    }

    /// Rebuilds a builder holding the same nodes and edges.
    pub fn to_builder(&self, policy: StubPolicy) -> GraphBuilder {
        let mut b = GraphBuilder::with_stub_policy(policy);
        b.snapshot_date = self.snapshot_date;
        b.nodes = self.nodes.iter().map(|n| (n.id.clone(), n.clone())).collect();
        b.edges = self.edges().map(|e| (e.src, e.dst, e.kind)).collect();
        b
    }

    /// Retained extraction evidence, present for graphs built from snapshots.
    pub fn evidence(&self) -> Option<&Evidence> {
        self.evidence.as_ref()
    }

    pub fn set_evidence(&mut self, evidence: Option<Evidence>) {
        self.evidence = evidence;
    }
}

fn unknown(id: &str) -> NodeId {
    NodeId::new(id).unwrap_or_else(|_| NodeId::raw(id))
}

// Counting sort into compressed rows; entries within a row keep (neighbour, kind) order.
fn csr(n: usize, entries: impl Iterator<Item = (u32, u32, EdgeKind)> + Clone) -> (Vec<u32>, Vec<Adj>) {
    let mut offsets = alloc::vec![0u32; n + 1];
    for (a, _, _) in entries.clone() {
        offsets[a as usize + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let total = offsets[n] as usize;
    let mut fill = offsets.clone();
    let mut adj = alloc::vec![Adj { node: 0, kind: EdgeKind::FineTune }; total];
    for (a, b, k) in entries {
        let slot = &mut fill[a as usize];
        adj[*slot as usize] = Adj { node: b, kind: k };
        *slot += 1;
    }
    for i in 0..n {
        adj[offsets[i] as usize..offsets[i + 1] as usize].sort_unstable();
    }
    (offsets, adj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ids::DegreeDirection::{In, Out};

    fn id(s: &str) -> NodeId {
        NodeId::new(s).unwrap()
    }

    #[test]
    fn add_node_counts_and_idempotency() {
        let mut b = GraphBuilder::new();
        b.add_node(Node::new(id("meta-llama/Meta-Llama"), NodeKind::BaseModel))
            .unwrap();
        b.add_node(Node::new(id("meta-llama/Meta-Llama"), NodeKind::BaseModel))
            .unwrap();
        let g = b.freeze();
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.kind_count(NodeKind::BaseModel), 1);
    }

    #[test]
    fn add_node_kind_conflict() {
        let mut b = GraphBuilder::new();
        b.add_node(Node::new(id("x"), NodeKind::FineTune)).unwrap();
        let err = b.add_node(Node::new(id("x"), NodeKind::Dataset)).unwrap_err();
        assert!(matches!(err, GraphError::KindConflict { .. }));
    }

    fn fig2_core() -> GraphBuilder {
        let mut b = GraphBuilder::with_stub_policy(StubPolicy::Reject);
        b.add_node(Node::new(id("The Pile"), NodeKind::Dataset)).unwrap();
        b.add_node(Node::new(id("Meta-llama"), NodeKind::BaseModel)).unwrap();
        b.add_node(Node::new(id("Llama-3.3-70B"), NodeKind::FineTune)).unwrap();
        b
    }

    #[test]
    fn add_edge_accepts_dedups_and_checks_kinds() {
        let mut b = fig2_core();
        assert!(b
            .add_edge(Edge::new(id("The Pile"), id("Meta-llama"), EdgeKind::TrainedOn))
            .unwrap());
        let e = Edge::new(id("Meta-llama"), id("Llama-3.3-70B"), EdgeKind::FineTune);
        assert!(b.add_edge(e.clone()).unwrap());
        assert!(!b.add_edge(e).unwrap());
        assert_eq!(b.edge_count(), 2);
        let err = b
            .add_edge(Edge::new(id("Meta-llama"), id("The Pile"), EdgeKind::TrainedOn))
            .unwrap_err();
        assert!(matches!(err, GraphError::EndpointKindMismatch { .. }));
        let err = b
            .add_edge(Edge::new(id("ghost"), id("Meta-llama"), EdgeKind::FineTune))
            .unwrap_err();
        assert_eq!(err, GraphError::DanglingEndpoint(id("ghost")));
        let err = b
            .add_edge(Edge::new(id("Meta-llama"), id("Meta-llama"), EdgeKind::FineTune))
            .unwrap_err();
        assert_eq!(err, GraphError::SelfLoop(id("Meta-llama")));
    }

    #[test]
    fn stubs_are_created_and_classified() {
        let mut b = GraphBuilder::new();
        b.add_node(Node::new(id("m"), NodeKind::FineTune)).unwrap();
        b.add_edge(Edge::new(id("ghost/x"), id("m"), EdgeKind::FineTune))
            .unwrap();
        b.add_edge(Edge::new(id("d"), id("m"), EdgeKind::TrainedOn)).unwrap();
        b.add_edge(Edge::new(id("m"), id("q"), EdgeKind::Quantization)).unwrap();
        let g = b.freeze();
        assert_eq!(g.node("ghost/x").unwrap().kind, NodeKind::BaseModel);
        assert!(!g.node("ghost/x").unwrap().metadata_present);
        assert_eq!(g.node("d").unwrap().kind, NodeKind::Dataset);
        assert_eq!(g.node("q").unwrap().kind, NodeKind::Quantization);
    }

    #[test]
    fn degrees_star_and_isolated() {
        let mut b = GraphBuilder::new();
        b.add_node(Node::new(id("center"), NodeKind::BaseModel)).unwrap();
        b.add_node(Node::new(id("lonely"), NodeKind::BaseModel)).unwrap();
        for i in 0..5 {
            b.add_edge(Edge::new(
                id("center"),
                id(&alloc::format!("leaf{i}")),
                EdgeKind::FineTune,
            ))
            .unwrap();
        }
        let g = b.freeze();
        assert_eq!(g.degree("center", Out).unwrap(), 5);
        assert_eq!(g.degree("leaf3", In).unwrap(), 1);
        assert_eq!(g.degree("lonely", In).unwrap(), 0);
        assert_eq!(g.degree("lonely", Out).unwrap(), 0);
        assert!(matches!(g.degree("nope", In), Err(GraphError::UnknownNode(_))));
        let out: usize = (0..g.node_count() as u32).map(|i| g.degree_at(i, Out)).sum();
        let inn: usize = (0..g.node_count() as u32).map(|i| g.degree_at(i, In)).sum();
        assert_eq!(out, g.edge_count());
        assert_eq!(inn, g.edge_count());
    }
}
