//! Forward (impact) and backward (lineage) breadth-first traversal.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::error::GraphError;
use crate::graph::{Adj, SupplyChainGraph};
use crate::ids::{Direction, EdgeKind, NodeId, NodeKind};

/// Per-kind node counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct KindCounts([usize; 6]);

impl KindCounts {
    pub fn get(&self, kind: NodeKind) -> usize {
        self.0[kind.index()]
    }

    pub fn add(&mut self, kind: NodeKind) {
        self.0[kind.index()] += 1;
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeKind, usize)> + '_ {
        NodeKind::ALL.iter().map(|k| (*k, self.0[k.index()]))
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for KindCounts {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = s.serialize_map(Some(6))?;
        for (k, v) in self.iter() {
            map.serialize_entry(k.token(), &v)?;
        }
        map.end()
    }
}

/// A root-to-leaf path of the BFS tree, with the edge kind of every hop.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Chain {
    pub nodes: Vec<NodeId>,
    pub kinds: Vec<EdgeKind>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TraversalResult {
    pub origin: NodeId,
    pub direction: Direction,
    /// Every node reached, origin excluded.
    pub reached: BTreeSet<NodeId>,
    pub per_kind_counts: KindCounts,
    /// Maximum BFS depth over reached nodes; 0 when nothing was reached.
    pub level: usize,
    /// `layers[d]` holds the nodes first reached at depth `d + 1`, in id order.
    pub layers: Vec<Vec<NodeId>>,
    /// BFS tree: each reached node's discovering neighbour and the edge kind used.
    pub tree: BTreeMap<NodeId, (NodeId, EdgeKind)>,
}

impl TraversalResult {
    pub fn total(&self) -> usize {
        self.reached.len()
    }

    /// Paths from the origin to every leaf of the BFS tree, sorted by node sequence.
    pub fn chains(&self) -> Vec<Chain> {
        let parents: BTreeSet<&NodeId> = self.tree.values().map(|(p, _)| p).collect();
        let mut chains: Vec<Chain> = self
            .reached
            .iter()
            .filter(|n| !parents.contains(n))
            .map(|leaf| {
                let mut nodes = alloc::vec![leaf.clone()];
                let mut kinds = Vec::new();
                let mut cur = leaf;
                while let Some((p, k)) = self.tree.get(cur) {
                    nodes.push(p.clone());
                    kinds.push(*k);
                    cur = p;
                }
                nodes.reverse();
                kinds.reverse();
                Chain { nodes, kinds }
            })
            .collect();
        chains.sort_by(|a, b| a.nodes.cmp(&b.nodes));
        chains
    }
}

/// Reusable BFS state. Visited marks are epoch-stamped so repeated traversals
/// over the same graph cost O(reached) rather than O(nodes).
#[derive(Clone, Debug, Default)]
pub struct BfsWorkspace {
    stamp: Vec<u32>,
    epoch: u32,
    frontier: Vec<u32>,
    next: Vec<u32>,
}

impl BfsWorkspace {
    pub fn new(graph: &SupplyChainGraph) -> Self {
        BfsWorkspace {
            stamp: alloc::vec![0; graph.node_count()],
            ..Self::default()
        }
    }

    /// Runs a BFS from `origin`, calling `visit(node, depth, parent, kind)` once for
    /// every reached node (origin excluded). Frontiers are expanded in ascending
    /// node order. Returns the maximum depth reached.
    pub fn run<F>(&mut self, graph: &SupplyChainGraph, origin: u32, direction: Direction, mut visit: F) -> usize
    where
        F: FnMut(u32, usize, u32, EdgeKind),
    {
        if self.stamp.len() != graph.node_count() {
            self.stamp = alloc::vec![0; graph.node_count()];
            self.epoch = 0;
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        let epoch = self.epoch;
        self.stamp[origin as usize] = epoch;
        self.frontier.clear();
        self.frontier.push(origin);
        let mut depth = 0;
        while !self.frontier.is_empty() {
            self.next.clear();
            for &u in &self.frontier {
                let adj: &[Adj] = match direction {
                    Direction::Forward => graph.out_adj(u),
                    Direction::Backward => graph.in_adj(u),
                };
                for a in adj {
                    let s = &mut self.stamp[a.node as usize];
                    if *s != epoch {
                        *s = epoch;
                        visit(a.node, depth + 1, u, a.kind);
                        self.next.push(a.node);
                    }
                }
            }
            if self.next.is_empty() {
                break;
            }
            depth += 1;
            self.next.sort_unstable();
            core::mem::swap(&mut self.frontier, &mut self.next);
        }
        depth
    }
}

fn subgraph(graph: &SupplyChainGraph, origin: &str, direction: Direction) -> Result<TraversalResult, GraphError> {
    let start = graph
        .index_of(origin)
        .ok_or_else(|| GraphError::UnknownNode(NodeId::new(origin).unwrap_or_else(|_| NodeId::raw(origin))))?;
    let mut ws = BfsWorkspace::new(graph);
    let mut reached = BTreeSet::new();
    let mut counts = KindCounts::default();
    let mut layers: Vec<Vec<NodeId>> = Vec::new();
    let mut tree = BTreeMap::new();
    let level = ws.run(graph, start, direction, |v, depth, parent, kind| {
        let node = graph.node_at(v);
        counts.add(node.kind);
        reached.insert(node.id.clone());
        if layers.len() < depth {
            layers.push(Vec::new());
        }
        layers[depth - 1].push(node.id.clone());
        tree.insert(node.id.clone(), (graph.node_at(parent).id.clone(), kind));
    });
    for layer in &mut layers {
        layer.sort();
    }
    Ok(TraversalResult {
        origin: graph.node_at(start).id.clone(),
        direction,
        reached,
        per_kind_counts: counts,
        level,
        layers,
        tree,
    })
}

/// Everything derived, directly or transitively, from `origin`.
pub fn forward_subgraph(graph: &SupplyChainGraph, origin: &str) -> Result<TraversalResult, GraphError> {
    subgraph(graph, origin, Direction::Forward)
}

/// Everything `origin` depends on, directly or transitively.
pub fn backward_subgraph(graph: &SupplyChainGraph, origin: &str) -> Result<TraversalResult, GraphError> {
    subgraph(graph, origin, Direction::Backward)
}
