mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::{closure, depths};
use proptest::prelude::*;
use supplygraph_core::algo::{
    louvain, modularity, strongly_connected_components, weakly_connected_components, LouvainConfig,
};
use supplygraph_core::delta::{apply_delta, churn_report, diff_snapshots};
use supplygraph_core::ingest::{build_graph, extract_textual_dependencies, normalize_text};
use supplygraph_core::synth::{random_graph, random_snapshot_pair, rng};
use supplygraph_core::{backward_subgraph, forward_subgraph, NodeId, SupplyChainGraph};

fn small_graph(seed: u64, max_nodes: usize) -> SupplyChainGraph {
    random_graph(&mut rng(seed), max_nodes)
}

/// Best classic modularity over every set partition of the nodes.
fn exhaustive_optimum(g: &SupplyChainGraph) -> f64 {
    let n = g.node_count();
    let ids: Vec<NodeId> = g.nodes().iter().map(|x| x.id.clone()).collect();
    let mut labels = vec![0usize; n];
    let mut best = f64::NEG_INFINITY;
    // Restricted growth strings enumerate each set partition once.
    fn rec(i: usize, max: usize, labels: &mut Vec<usize>, ids: &[NodeId], g: &SupplyChainGraph, best: &mut f64) {
        if i == labels.len() {
            let map: BTreeMap<NodeId, usize> = ids.iter().cloned().zip(labels.iter().copied()).collect();
            *best = best.max(modularity(g, &map).unwrap());
            return;
        }
        for c in 0..=max + 1 {
            labels[i] = c;
            rec(i + 1, max.max(c), labels, ids, g, best);
        }
    }
    if n == 0 {
        return 0.0;
    }
    labels[0] = 0;
    rec(1, 0, &mut labels, &ids, g, &mut best);
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn traversal_matches_closure(seed in any::<u64>()) {
        let g = small_graph(seed, 12);
        let fwd = closure(&g, true);
        let bwd = closure(&g, false);
        let rev = g.reversed();
        for node in g.nodes() {
            let f = forward_subgraph(&g, node.id.as_str()).unwrap();
            prop_assert_eq!(&f.reached, &fwd[&node.id]);
            prop_assert!(!f.reached.contains(&node.id));
            let d = depths(&g, &node.id, true);
            prop_assert_eq!(f.level, d.values().copied().max().unwrap_or(0));
            prop_assert_eq!(f.per_kind_counts.total(), f.reached.len());
            let b = backward_subgraph(&g, node.id.as_str()).unwrap();
            prop_assert_eq!(&b.reached, &bwd[&node.id]);
            let on_rev = forward_subgraph(&rev, node.id.as_str()).unwrap();
            prop_assert_eq!(&b.reached, &on_rev.reached);
            prop_assert_eq!(b.level, on_rev.level);
        }
    }

    #[test]
    fn scc_matches_mutual_reachability(seed in any::<u64>()) {
        let g = small_graph(seed, 12);
        let reach = closure(&g, true);
        let scc = strongly_connected_components(&g);
        let mut classes: BTreeSet<BTreeSet<NodeId>> = BTreeSet::new();
        for v in g.nodes() {
            let mut class: BTreeSet<NodeId> = reach[&v.id]
                .iter()
                .filter(|u| reach[*u].contains(&v.id))
                .cloned()
                .collect();
            class.insert(v.id.clone());
            classes.insert(class);
        }
        let got: BTreeSet<BTreeSet<NodeId>> =
            scc.components.iter().map(|c| c.iter().cloned().collect()).collect();
        prop_assert_eq!(got, classes);

        // The condensation has no cycles: no two components reach each other.
        let member = scc.membership(&g);
        for e in g.edges() {
            let (a, b) = (member[g.index_of(e.src.as_str()).unwrap() as usize], member[g.index_of(e.dst.as_str()).unwrap() as usize]);
            if a != b {
                let back = scc.components[b].iter().any(|x| reach[x].contains(&scc.components[a][0]));
                prop_assert!(!back);
            }
        }
    }

    #[test]
    fn wcc_matches_undirected_closure(seed in any::<u64>()) {
        let g = small_graph(seed, 12);
        // Undirected closure by fixpoint over union of both edge directions.
        let mut comp: BTreeMap<NodeId, BTreeSet<NodeId>> = g.nodes().iter()
            .map(|v| (v.id.clone(), [v.id.clone()].into()))
            .collect();
        loop {
            let mut changed = false;
            for e in g.edges() {
                let merged: BTreeSet<NodeId> = comp[&e.src].union(&comp[&e.dst]).cloned().collect();
                for x in merged.clone() {
                    let c = comp.get_mut(&x).unwrap();
                    if c.len() != merged.len() {
                        *c = merged.clone();
                        changed = true;
                    }
                }
            }
            if !changed { break; }
        }
        let want: BTreeSet<BTreeSet<NodeId>> = comp.into_values().collect();
        let got: BTreeSet<BTreeSet<NodeId>> = weakly_connected_components(&g)
            .components.iter().map(|c| c.iter().cloned().collect()).collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn louvain_near_optimal_on_small_graphs(seed in any::<u64>()) {
        let g = small_graph(seed, 8);
        if g.edge_count() == 0 {
            return Ok(());
        }
        let p = louvain(&g, &LouvainConfig::default());
        let recomputed = modularity(&g, &p.community_of).unwrap();
        prop_assert!((recomputed - p.modularity).abs() < 1e-9);
        let opt = exhaustive_optimum(&g);
        prop_assert!(p.modularity >= 0.9 * opt - 1e-12, "louvain {} optimum {}", p.modularity, opt);
    }

    #[test]
    fn delta_equals_rebuild(seed in any::<u64>()) {
        let (s0, s1) = random_snapshot_pair(seed);
        let delta = diff_snapshots(&s0, &s1).unwrap();
        let updated = apply_delta(build_graph(&s0).unwrap(), &delta).unwrap();
        let rebuilt = build_graph(&s1).unwrap();
        prop_assert_eq!(updated.nodes(), rebuilt.nodes());
        prop_assert_eq!(updated.edges().collect::<Vec<_>>(), rebuilt.edges().collect::<Vec<_>>());
        prop_assert_eq!(updated.evidence(), rebuilt.evidence());

        let stats = churn_report(std::slice::from_ref(&delta)).unwrap();
        prop_assert_eq!(stats.total_added(), delta.added.len());
        prop_assert_eq!(stats.total_deleted(), delta.deleted.len());
    }

    #[test]
    fn deltas_compose(seed in any::<u64>()) {
        let (s0, s1) = random_snapshot_pair(seed);
        let (_, mut s2) = random_snapshot_pair(seed.wrapping_add(1));
        s2.date = s1.date.unwrap().succ_opt();
        let step = apply_delta(
            apply_delta(build_graph(&s0).unwrap(), &diff_snapshots(&s0, &s1).unwrap()).unwrap(),
            &diff_snapshots(&s1, &s2).unwrap(),
        ).unwrap();
        let direct = apply_delta(build_graph(&s0).unwrap(), &diff_snapshots(&s0, &s2).unwrap()).unwrap();
        prop_assert_eq!(step.nodes(), direct.nodes());
        prop_assert_eq!(step.edges().collect::<Vec<_>>(), direct.edges().collect::<Vec<_>>());
    }

    #[test]
    fn text_extraction_ignores_normalization(text in "[ a-zA-Z0-9/.,\\-\u{2014}\u{201C}\r\n\t]{0,80}") {
        prop_assert_eq!(extract_textual_dependencies(&text), extract_textual_dependencies(&normalize_text(&text)));
        let n = normalize_text(&text);
        prop_assert_eq!(normalize_text(&n), n);
    }

    #[test]
    fn phrases_inside_noise_are_found(prefix in "[a-z ]{0,20}", name in "[A-Za-z][A-Za-z0-9\\-]{0,12}") {
        let text = format!("{prefix}. Fine-tuned from {name}.");
        let got = extract_textual_dependencies(&text);
        prop_assert!(got.iter().any(|m| m.name == name), "{:?}", got);
    }
}

#[test]
fn two_triangles_split_exactly() {
    use supplygraph_core::{Edge, EdgeKind, GraphBuilder, Node, NodeKind};
    let mut b = GraphBuilder::new();
    for n in ["a", "b", "c", "x", "y", "z"] {
        b.add_node(Node::new(NodeId::new(n).unwrap(), NodeKind::FineTune))
            .unwrap();
    }
    for (s, d) in [("a", "b"), ("b", "c"), ("c", "a"), ("x", "y"), ("y", "z"), ("z", "x")] {
        b.add_edge(Edge::new(
            NodeId::new(s).unwrap(),
            NodeId::new(d).unwrap(),
            EdgeKind::FineTune,
        ))
        .unwrap();
    }
    let g = b.freeze();
    let p = louvain(&g, &LouvainConfig::default());
    let got: BTreeSet<Vec<String>> = p
        .communities()
        .into_iter()
        .map(|c| c.into_iter().map(String::from).collect())
        .collect();
    let want: BTreeSet<Vec<String>> = [
        vec!["a".into(), "b".into(), "c".into()],
        vec!["x".into(), "y".into(), "z".into()],
    ]
    .into();
    assert_eq!(got, want);
    assert!((p.modularity - 0.5).abs() < 1e-12);
}

#[test]
fn corpus_covers_deletions_that_leave_stubs() {
    let degraded = (0..50u64)
        .filter(|&seed| {
            let (s0, s1) = random_snapshot_pair(seed);
            let d = diff_snapshots(&s0, &s1).unwrap();
            let g = apply_delta(build_graph(&s0).unwrap(), &d).unwrap();
            d.deleted
                .iter()
                .any(|id| g.node(id.as_str()).is_some_and(|n| !n.metadata_present))
        })
        .count();
    assert!(degraded > 0);
}
