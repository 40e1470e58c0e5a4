#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use supplygraph_core::ingest::{Snapshot, SnapshotRecord};
use supplygraph_core::{Date, NodeId, Relation, SupplyChainGraph};

pub fn id(s: &str) -> NodeId {
    NodeId::new(s).unwrap()
}

pub fn ids(names: &[&str]) -> BTreeSet<NodeId> {
    names.iter().map(|n| id(n)).collect()
}

/// The 14-artifact example lineage: Meta-llama trained on two datasets, one
/// of which is a composite of four subsets, and the four forward chains plus
/// the Unsloth/RBot70Bv4 line. Dependencies are spread over structured
/// fields, cross-reference URLs and free text.
pub fn figure_snapshot() -> Snapshot {
    let mut s = Snapshot::new(Date::from_ymd_opt(2024, 12, 1));
    let mut r = SnapshotRecord::model(id("Meta-llama"));
    r.datasets = vec![id("The Pile"), id("Chatgpt-prompt")];
    s.insert(r);

    let mut r = SnapshotRecord::model(id("Llama-3.3-70B"));
    r.base_model = vec![id("Meta-llama")];
    r.relation = Some(Relation::FineTune);
    s.insert(r);

    let mut r = SnapshotRecord::model(id("Llama3.3-70B-Vision"));
    r.description = "Vision variant, fine-tuned from Llama-3.3-70B on image-text pairs.".into();
    s.insert(r);

    let mut r = SnapshotRecord::model(id("Doctor-Shotgun"));
    r.base_model = vec![id("Meta-llama")];
    r.relation = Some(Relation::Adapter);
    s.insert(r);

    let mut r = SnapshotRecord::model(id("Llama-3.3-70B-4bit"));
    r.description = "4-bit quantized version of Llama-3.3-70B.".into();
    s.insert(r);

    let mut r = SnapshotRecord::model(id("MistLlama"));
    r.base_model = vec![id("Meta-llama")];
    r.relation = Some(Relation::Merge);
    s.insert(r);

    let mut r = SnapshotRecord::model(id("Unsloth"));
    r.base_model = vec![id("Meta-llama")];
    s.insert(r);

    let mut r = SnapshotRecord::model(id("RBot70Bv4"));
    r.description = "Chat model fine-tuned from Unsloth.".into();
    s.insert(r);

    let mut r = SnapshotRecord::dataset(id("The Pile"));
    r.description = "An 800GB corpus of diverse text.".into();
    s.insert(r);
    let mut r = SnapshotRecord::dataset(id("Chatgpt-prompt"));
    r.description = "Prompt collection.".into();
    s.insert(r);
    for name in ["Wikimedia", "Arxiv", "Openwebtext2"] {
        let mut r = SnapshotRecord::dataset(id(name));
        r.subset_of = vec![id("The Pile")];
        s.insert(r);
    }
    let mut r = SnapshotRecord::dataset(id("Pubmed Central"));
    r.description = "Biomedical abstracts. Subset of The Pile.".into();
    s.insert(r);
    s
}

/// Reachability by repeated relaxation over the edge list until fixpoint.
pub fn closure(graph: &SupplyChainGraph, forward: bool) -> BTreeMap<NodeId, BTreeSet<NodeId>> {
    let edges: Vec<(NodeId, NodeId)> = graph
        .edges()
        .map(|e| if forward { (e.src, e.dst) } else { (e.dst, e.src) })
        .collect();
    let mut reach: BTreeMap<NodeId, BTreeSet<NodeId>> =
        graph.nodes().iter().map(|n| (n.id.clone(), BTreeSet::new())).collect();
    loop {
        let mut changed = false;
        for (a, b) in &edges {
            let mut add: BTreeSet<NodeId> = reach[b].clone();
            add.insert(b.clone());
            let row = reach.get_mut(a).unwrap();
            for x in add {
                changed |= row.insert(x);
            }
        }
        if !changed {
            break;
        }
    }
    for (v, row) in reach.iter_mut() {
        row.remove(v);
    }
    reach
}

/// Shortest-path depth from `origin` to every reachable node by Bellman-style relaxation.
pub fn depths(graph: &SupplyChainGraph, origin: &NodeId, forward: bool) -> BTreeMap<NodeId, usize> {
    let edges: Vec<(NodeId, NodeId)> = graph
        .edges()
        .map(|e| if forward { (e.src, e.dst) } else { (e.dst, e.src) })
        .collect();
    let mut dist: BTreeMap<NodeId, usize> = BTreeMap::new();
    dist.insert(origin.clone(), 0);
    for _ in 0..graph.node_count() {
        for (a, b) in &edges {
            if let Some(&da) = dist.get(a) {
                let cur = dist.get(b).copied().unwrap_or(usize::MAX);
                if da + 1 < cur {
                    dist.insert(b.clone(), da + 1);
                }
            }
        }
    }
    dist.remove(origin);
    dist
}
