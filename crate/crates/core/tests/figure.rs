mod common;

use std::collections::BTreeSet;

use common::{closure, figure_snapshot, id, ids};
use supplygraph_core::algo::{degree_distribution, weakly_connected_components};
use supplygraph_core::ingest::build_graph;
use supplygraph_core::report::{
    dataset_inclusion_table, dataset_to_models_table, graph_summary, model_dataset_counts,
    top_base_models_by_forward_impact, top_models_by_backward_size, Cell,
};
use supplygraph_core::{
    backward_subgraph, forward_subgraph, DegreeDirection, EdgeKind, GraphBuilder, GraphError, NodeKind,
    SupplyChainGraph,
};

fn graph() -> SupplyChainGraph {
    build_graph(&figure_snapshot()).unwrap()
}

#[test]
fn kinds_as_built() {
    let g = graph();
    assert_eq!(g.node_count(), 14);
    let expect = [
        (NodeKind::Dataset, 6),
        (NodeKind::BaseModel, 1),
        (NodeKind::FineTune, 4),
        (NodeKind::Adapter, 1),
        (NodeKind::Quantization, 1),
        (NodeKind::Merge, 1),
    ];
    for (kind, n) in expect {
        assert_eq!(g.kind_count(kind), n, "{kind}");
        assert_eq!(g.nodes().iter().filter(|x| x.kind == kind).count(), n);
    }
    assert!(g.evidence().unwrap().warnings().is_empty());
    assert_eq!(g.edge_count(), 13);
}

#[test]
fn forward_from_base() {
    let g = graph();
    let r = forward_subgraph(&g, "Meta-llama").unwrap();
    let want = ids(&[
        "Llama-3.3-70B",
        "Llama3.3-70B-Vision",
        "Doctor-Shotgun",
        "Llama-3.3-70B-4bit",
        "MistLlama",
        "Unsloth",
        "RBot70Bv4",
    ]);
    assert_eq!(r.reached, want);
    assert_eq!(r.reached, closure(&g, true)[&id("Meta-llama")]);
    assert_eq!(r.level, 2);
    assert_eq!(r.total(), 7);

    let signatures: BTreeSet<Vec<EdgeKind>> = r.chains().into_iter().map(|c| c.kinds).collect();
    use EdgeKind::*;
    let expected: BTreeSet<Vec<EdgeKind>> = [
        vec![FineTune, FineTune],
        vec![Adapter],
        vec![FineTune, Quantization],
        vec![Merge],
    ]
    .into();
    assert_eq!(signatures, expected);
}

#[test]
fn backward_from_rbot() {
    let g = graph();
    let r = backward_subgraph(&g, "RBot70Bv4").unwrap();
    let want = ids(&[
        "Unsloth",
        "Meta-llama",
        "The Pile",
        "Chatgpt-prompt",
        "Wikimedia",
        "Arxiv",
        "Openwebtext2",
        "Pubmed Central",
    ]);
    assert_eq!(r.reached, want);
    assert_eq!(r.layers[0], vec![id("Unsloth")]);
    assert_eq!(r.layers[1], vec![id("Meta-llama")]);
    assert_eq!(r.layers[2], vec![id("Chatgpt-prompt"), id("The Pile")]);
    assert_eq!(r.level, 4);
}

#[test]
fn degrees() {
    let g = graph();
    assert_eq!(g.degree("Meta-llama", DegreeDirection::In), Ok(2));
    assert_eq!(g.degree("Meta-llama", DegreeDirection::Out), Ok(4));
    assert!(matches!(
        g.degree("nope", DegreeDirection::In),
        Err(GraphError::UnknownNode(_))
    ));
    let h = degree_distribution(&g, DegreeDirection::In, Some(NodeKind::Dataset));
    assert_eq!(h.max_degree(), Some(4));
    assert_eq!(h.node_total(), 6);
}

#[test]
fn one_weak_component() {
    let g = graph();
    let w = weakly_connected_components(&g);
    assert_eq!(w.len(), 1);
    assert_eq!(w.components[0].len(), 14);

    let mut b = g.to_builder(Default::default());
    b.add_node(supplygraph_core::Node::new(id("z"), NodeKind::BaseModel))
        .unwrap();
    let w = weakly_connected_components(&b.freeze());
    assert_eq!(w.sizes(), vec![14, 1]);
}

#[test]
fn builder_rejects_reverse_training_edge() {
    let mut b = graph().to_builder(Default::default());
    let e = supplygraph_core::Edge::new(id("Meta-llama"), id("The Pile"), EdgeKind::TrainedOn);
    assert!(matches!(b.add_edge(e), Err(GraphError::EndpointKindMismatch { .. })));
    let e = supplygraph_core::Edge::new(id("The Pile"), id("Meta-llama"), EdgeKind::TrainedOn);
    assert_eq!(b.add_edge(e), Ok(false));
    let _ = GraphBuilder::new();
}

fn int(c: Option<&Cell>) -> u64 {
    match c {
        Some(Cell::Int(n)) => *n,
        other => panic!("not an int: {other:?}"),
    }
}

fn text(c: Option<&Cell>) -> String {
    c.map(Cell::render).unwrap_or_default()
}

#[test]
fn reports() {
    let g = graph();
    let t3 = top_base_models_by_forward_impact(&g, 1);
    assert_eq!(t3.rows.len(), 1);
    assert_eq!(text(t3.cell(0, "Base model")), "Meta-llama");
    assert_eq!(int(t3.cell(0, "Total")), 7);
    assert_eq!(int(t3.cell(0, "Fine-tune")), 4);
    assert_eq!(int(t3.cell(0, "Level")), 2);

    let t4 = top_models_by_backward_size(&g, 10);
    let row = (0..t4.rows.len())
        .find(|&i| text(t4.cell(i, "Model")) == "RBot70Bv4")
        .unwrap();
    assert_eq!(int(t4.cell(row, "Total")), 8);
    assert_eq!(int(t4.cell(row, "Level")), 2);
    assert_eq!(text(t4.cell(row, "Base Model")), "Meta-llama");
    assert_eq!(text(t4.cell(0, "Model")), "Llama-3.3-70B-4bit");
    assert!(t4.rows.iter().all(|r| r[8] == Cell::Str("Meta-llama".into())));

    let t5 = dataset_inclusion_table(&g, 10);
    assert_eq!(text(t5.cell(0, "Dataset")), "The Pile");
    assert_eq!(int(t5.cell(0, "# of included")), 4);
    assert_eq!(t5.rows.len(), 4);
    assert_eq!(t5.cell(1, "Dataset"), Some(&Cell::Empty));

    let t6 = dataset_to_models_table(&g, 10);
    let pile = (0..t6.rows.len())
        .find(|&i| text(t6.cell(i, "Dataset")) == "The Pile")
        .unwrap();
    assert_eq!(int(t6.cell(pile, "Total")), 1);

    let md = model_dataset_counts(&g, 10);
    assert_eq!(text(md.cell(0, "Model")), "Meta-llama");
    assert_eq!(int(md.cell(0, "# of datasets")), 2);

    let s = graph_summary(&g);
    assert_eq!(int(s.cell(0, "Nodes")), 14);
    assert_eq!(int(s.cell(0, "Edges")), 13);
    assert_eq!(text(s.cell(0, "Average degree")), "0.93");
    assert_eq!(text(s.cell(0, "Metadata missing %")), "0.00");
}

#[test]
fn empty_graph_summary() {
    let g = SupplyChainGraph::default();
    let s = graph_summary(&g);
    assert_eq!(text(s.cell(0, "Average degree")), "0.00");
    assert!(top_base_models_by_forward_impact(&g, 10).rows.is_empty());
}
