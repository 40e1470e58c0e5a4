use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::graph::SupplyChainGraph;
use crate::ids::{DegreeDirection, NodeKind};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeHistogram {
    pub direction: DegreeDirection,
    pub kind_filter: Option<NodeKind>,
    /// `(degree, node_count)` with strictly increasing degree.
    pub buckets: Vec<(usize, usize)>,
}

impl DegreeHistogram {
    pub fn node_total(&self) -> usize {
        self.buckets.iter().map(|(_, c)| c).sum()
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.buckets.last().map(|(d, _)| *d)
    }
}

pub fn degree_distribution(
    graph: &SupplyChainGraph,
    direction: DegreeDirection,
    kind_filter: Option<NodeKind>,
) -> DegreeHistogram {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, node) in graph.nodes().iter().enumerate() {
        if kind_filter.is_some_and(|k| k != node.kind) {
            continue;
        }
        *counts.entry(graph.degree_at(i as u32, direction)).or_default() += 1;
    }
    DegreeHistogram {
        direction,
        kind_filter,
        buckets: counts.into_iter().collect(),
    }
}
