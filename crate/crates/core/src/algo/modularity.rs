//! Newman modularity over the undirected, unit-weight projection of the graph.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::AlgoError;
use crate::graph::SupplyChainGraph;
use crate::ids::NodeId;

/// Undirected simple graph: directions dropped, parallel edges and edge kinds collapsed.
#[derive(Clone, Debug)]
pub struct UndirectedProjection {
    /// Sorted, deduplicated neighbour lists.
    pub adj: Vec<Vec<u32>>,
    /// Number of undirected edges.
    pub edges: usize,
}

impl UndirectedProjection {
    pub fn new(graph: &SupplyChainGraph) -> Self {
        let n = graph.node_count();
        let mut adj: Vec<Vec<u32>> = Vec::with_capacity(n);
        for u in 0..n as u32 {
            let mut nb: Vec<u32> = graph
                .out_adj(u)
                .iter()
                .chain(graph.in_adj(u))
                .map(|a| a.node)
                .filter(|&v| v != u)
                .collect();
            nb.sort_unstable();
            nb.dedup();
            adj.push(nb);
        }
        let edges = adj.iter().map(Vec::len).sum::<usize>() / 2;
        UndirectedProjection { adj, edges }
    }

    pub fn degree(&self, u: u32) -> usize {
        self.adj[u as usize].len()
    }
}

/// Modularity of a labelling given per node index.
///
/// Evaluated exactly as `(4m·Σ L_c − Σ D_c²) / (4m²)` in integer arithmetic,
/// where `L_c` counts intra-community edges and `D_c` sums community degrees,
/// so the value does not depend on node or label order.
pub fn modularity_of_labels(proj: &UndirectedProjection, labels: &[usize]) -> f64 {
    let m = proj.edges as i128;
    if m == 0 {
        return 0.0;
    }
    let mut per: BTreeMap<usize, (i128, i128)> = BTreeMap::new();
    for (u, nb) in proj.adj.iter().enumerate() {
        let c = labels[u];
        let entry = per.entry(c).or_default();
        entry.1 += nb.len() as i128;
        entry.0 += nb.iter().filter(|&&v| labels[v as usize] == c).count() as i128;
    }
    // Internal edges were counted from both ends.
    let internal: i128 = per.values().map(|(l, _)| l / 2).sum();
    let sq: i128 = per.values().map(|(_, d)| d * d).sum();
    let num = 4 * m * internal - sq;
    let den = 4 * m * m;
    num as f64 / den as f64
}

/// Modularity of `community_of` on the undirected projection of `graph`.
///
/// Graphs without edges have modularity 0.0.
pub fn modularity(graph: &SupplyChainGraph, community_of: &BTreeMap<NodeId, usize>) -> Result<f64, AlgoError> {
    let labels = labels_for(graph, community_of)?;
    Ok(modularity_of_labels(&UndirectedProjection::new(graph), &labels))
}

pub(crate) fn labels_for(
    graph: &SupplyChainGraph,
    community_of: &BTreeMap<NodeId, usize>,
) -> Result<Vec<usize>, AlgoError> {
    graph
        .nodes()
        .iter()
        .map(|n| {
            community_of
                .get(&n.id)
                .copied()
                .ok_or_else(|| AlgoError::UnassignedNode(n.id.clone()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, GraphBuilder};
    use crate::ids::EdgeKind;

    fn id(s: &str) -> NodeId {
        NodeId::new(s).unwrap()
    }

    fn two_triangles_bridged() -> SupplyChainGraph {
        let mut b = GraphBuilder::new();
        for (s, d) in [
            ("a", "b"),
            ("b", "c"),
            ("a", "c"),
            ("d", "e"),
            ("e", "f"),
            ("d", "f"),
            ("c", "d"),
        ] {
            b.add_edge(Edge::new(id(s), id(d), EdgeKind::Subset)).unwrap();
        }
        b.freeze()
    }

    #[test]
    fn one_community_is_zero() {
        let g = two_triangles_bridged();
        let all: BTreeMap<NodeId, usize> = g.nodes().iter().map(|n| (n.id.clone(), 0)).collect();
        assert_eq!(modularity(&g, &all).unwrap(), 0.0);
    }

    #[test]
    fn triangles_partition_value() {
        // m = 7; each triangle has 3 internal edges and degree sum 7.
        // Q = 6/7 - 2 * (7/14)^2 = 6/7 - 1/2 = 5/14.
        let g = two_triangles_bridged();
        let part: BTreeMap<NodeId, usize> = g
            .nodes()
            .iter()
            .map(|n| (n.id.clone(), usize::from(n.id.as_str() > "c")))
            .collect();
        let q = modularity(&g, &part).unwrap();
        assert!((q - 5.0 / 14.0).abs() < 1e-15);
    }

    #[test]
    fn singletons_are_negative() {
        let g = two_triangles_bridged();
        let part: BTreeMap<NodeId, usize> = g.nodes().iter().enumerate().map(|(i, n)| (n.id.clone(), i)).collect();
        assert!(modularity(&g, &part).unwrap() < 0.0);
    }

    #[test]
    fn unassigned_and_zero_edges() {
        let g = two_triangles_bridged();
        let err = modularity(&g, &BTreeMap::new()).unwrap_err();
        assert!(matches!(err, AlgoError::UnassignedNode(_)));
        let empty = SupplyChainGraph::default();
        assert_eq!(modularity(&empty, &BTreeMap::new()).unwrap(), 0.0);
    }

    #[test]
    fn parallel_and_reverse_edges_collapse() {
        let mut b = GraphBuilder::new();
        b.add_edge(Edge::new(id("a"), id("b"), EdgeKind::Subset)).unwrap();
        b.add_edge(Edge::new(id("b"), id("a"), EdgeKind::Subset)).unwrap();
        b.add_edge(Edge::new(id("a"), id("b"), EdgeKind::DerivedDataset))
            .unwrap();
        let p = UndirectedProjection::new(&b.freeze());
        assert_eq!(p.edges, 1);
    }
}
