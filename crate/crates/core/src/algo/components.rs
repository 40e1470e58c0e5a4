//! Weakly and strongly connected components.

use alloc::vec::Vec;

use crate::error::AlgoError;
use crate::graph::SupplyChainGraph;
use crate::ids::NodeId;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ComponentMode {
    Weak,
    Strong,
}

/// A partition of the node set, largest component first; equal sizes are
/// ordered by smallest member id. Members of each component are sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentSet {
    pub mode: ComponentMode,
    pub components: Vec<Vec<NodeId>>,
}

impl ComponentSet {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.components.iter().map(Vec::len).collect()
    }

    /// Singleton components are trivial.
    pub fn is_trivial(&self, i: usize) -> bool {
        self.components[i].len() == 1
    }

    pub fn non_trivial_count(&self) -> usize {
        self.components.iter().filter(|c| c.len() > 1).count()
    }

    /// Component index of every node, in the graph's node order.
    pub fn membership(&self, graph: &SupplyChainGraph) -> Vec<usize> {
        let mut out = alloc::vec![usize::MAX; graph.node_count()];
        for (ci, comp) in self.components.iter().enumerate() {
            for id in comp {
                if let Some(i) = graph.index_of(id.as_str()) {
                    out[i as usize] = ci;
                }
            }
        }
        out
    }

    fn from_labels(graph: &SupplyChainGraph, mode: ComponentMode, labels: &[u32], count: usize) -> Self {
        let mut groups: Vec<Vec<u32>> = alloc::vec![Vec::new(); count];
        // Node indices ascend with id, so each group comes out sorted.
        for (i, &l) in labels.iter().enumerate() {
            groups[l as usize].push(i as u32);
        }
        groups.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
        let components = groups
            .into_iter()
            .map(|g| g.into_iter().map(|i| graph.node_at(i).id.clone()).collect())
            .collect();
        ComponentSet { mode, components }
    }
}

pub fn weakly_connected_components(graph: &SupplyChainGraph) -> ComponentSet {
    let n = graph.node_count();
    let mut label = alloc::vec![u32::MAX; n];
    let mut count = 0u32;
    let mut stack = Vec::new();
    for start in 0..n as u32 {
        if label[start as usize] != u32::MAX {
            continue;
        }
        label[start as usize] = count;
        stack.push(start);
        while let Some(u) = stack.pop() {
            for a in graph.out_adj(u).iter().chain(graph.in_adj(u)) {
                if label[a.node as usize] == u32::MAX {
                    label[a.node as usize] = count;
                    stack.push(a.node);
                }
            }
        }
        count += 1;
    }
    ComponentSet::from_labels(graph, ComponentMode::Weak, &label, count as usize)
}

/// Tarjan's low-link algorithm with an explicit call stack.
pub fn strongly_connected_components(graph: &SupplyChainGraph) -> ComponentSet {
    const UNSEEN: u32 = u32::MAX;
    let n = graph.node_count();
    let mut index = alloc::vec![UNSEEN; n];
    let mut low = alloc::vec![0u32; n];
    let mut on_stack = alloc::vec![false; n];
    let mut label = alloc::vec![UNSEEN; n];
    let mut stack: Vec<u32> = Vec::new();
    // (node, position in its out-adjacency)
    let mut calls: Vec<(u32, usize)> = Vec::new();
    let mut next_index = 0u32;
    let mut count = 0u32;

    for root in 0..n as u32 {
        if index[root as usize] != UNSEEN {
            continue;
        }
        calls.push((root, 0));
        index[root as usize] = next_index;
        low[root as usize] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root as usize] = true;

        while let Some(&mut (v, ref mut pos)) = calls.last_mut() {
            let adj = graph.out_adj(v);
            if *pos < adj.len() {
                let w = adj[*pos].node;
                *pos += 1;
                if index[w as usize] == UNSEEN {
                    index[w as usize] = next_index;
                    low[w as usize] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w as usize] = true;
                    calls.push((w, 0));
                } else if on_stack[w as usize] {
                    low[v as usize] = low[v as usize].min(index[w as usize]);
                }
                continue;
            }
            calls.pop();
            if let Some(&(parent, _)) = calls.last() {
                low[parent as usize] = low[parent as usize].min(low[v as usize]);
            }
            if low[v as usize] == index[v as usize] {
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w as usize] = false;
                    label[w as usize] = count;
                    if w == v {
                        break;
                    }
                }
                count += 1;
            }
        }
    }
    ComponentSet::from_labels(graph, ComponentMode::Strong, &label, count as usize)
}

/// `(size, fraction of components with size <= size)` for each distinct size.
pub fn size_cdf(components: &ComponentSet) -> Result<Vec<(usize, f64)>, AlgoError> {
    if components.is_empty() {
        return Err(AlgoError::EmptyInput);
    }
    let mut sizes = components.sizes();
    sizes.sort_unstable();
    let total = sizes.len();
    let mut out: Vec<(usize, f64)> = Vec::new();
    for (i, s) in sizes.iter().enumerate() {
        let frac = (i + 1) as f64 / total as f64;
        match out.last_mut() {
            Some(last) if last.0 == *s => last.1 = frac,
            _ => out.push((*s, frac)),
        }
    }
    if let Some(last) = out.last_mut() {
        last.1 = 1.0;
    }
    Ok(out)
}

/// Cumulative distribution of weakly connected component sizes.
pub fn wcc_cdf(components: &ComponentSet) -> Result<Vec<(usize, f64)>, AlgoError> {
    if components.mode != ComponentMode::Weak {
        return Err(AlgoError::NotWeak);
    }
    size_cdf(components)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, GraphBuilder, Node};
    use crate::ids::{EdgeKind, NodeKind};

    fn id(s: &str) -> NodeId {
        NodeId::new(s).unwrap()
    }

    fn datasets(edges: &[(&str, &str)], extra: &[&str]) -> SupplyChainGraph {
        let mut b = GraphBuilder::new();
        for n in extra {
            b.add_node(Node::new(id(n), NodeKind::Dataset)).unwrap();
        }
        for (s, d) in edges {
            b.add_edge(Edge::new(id(s), id(d), EdgeKind::Subset)).unwrap();
        }
        b.freeze()
    }

    fn fake(mode: ComponentMode, sizes: &[usize]) -> ComponentSet {
        let mut k = 0;
        let components = sizes
            .iter()
            .map(|s| {
                (0..*s)
                    .map(|_| {
                        k += 1;
                        id(&alloc::format!("n{k}"))
                    })
                    .collect()
            })
            .collect();
        ComponentSet { mode, components }
    }

    #[test]
    fn two_disjoint_edges() {
        let g = datasets(&[("a", "b"), ("c", "d")], &[]);
        let w = weakly_connected_components(&g);
        assert_eq!(w.sizes(), alloc::vec![2, 2]);
        assert_eq!(w.components[0], alloc::vec![id("a"), id("b")]);
    }

    #[test]
    fn isolated_node_is_its_own_component() {
        let g = datasets(&[("a", "b"), ("b", "c")], &["z"]);
        let w = weakly_connected_components(&g);
        assert_eq!(
            w.components,
            alloc::vec![alloc::vec![id("a"), id("b"), id("c")], alloc::vec![id("z")]]
        );
    }

    #[test]
    fn scc_cycle_with_pendant() {
        let g = datasets(&[("A", "B"), ("B", "C"), ("C", "A"), ("A", "D")], &[]);
        let s = strongly_connected_components(&g);
        assert_eq!(
            s.components,
            alloc::vec![alloc::vec![id("A"), id("B"), id("C")], alloc::vec![id("D")]]
        );
        assert!(!s.is_trivial(0));
        assert!(s.is_trivial(1));
    }

    #[test]
    fn scc_dag_is_all_trivial() {
        let g = datasets(&[("a", "b"), ("b", "c"), ("a", "d"), ("d", "c")], &[]);
        let s = strongly_connected_components(&g);
        assert_eq!(s.len(), 4);
        assert_eq!(s.non_trivial_count(), 0);
    }

    #[test]
    fn cdf_arithmetic() {
        let c = wcc_cdf(&fake(ComponentMode::Weak, &[1, 1, 2])).unwrap();
        assert_eq!(c, alloc::vec![(1, 2.0 / 3.0), (2, 1.0)]);
        let c = wcc_cdf(&fake(ComponentMode::Weak, &[1, 1, 1, 5])).unwrap();
        assert_eq!(c, alloc::vec![(1, 0.75), (5, 1.0)]);
        let c = wcc_cdf(&fake(ComponentMode::Weak, &[7])).unwrap();
        assert_eq!(c, alloc::vec![(7, 1.0)]);
        assert_eq!(wcc_cdf(&fake(ComponentMode::Weak, &[])), Err(AlgoError::EmptyInput));
        assert_eq!(wcc_cdf(&fake(ComponentMode::Strong, &[1])), Err(AlgoError::NotWeak));
    }
}
