//! Analysis tables computed from a frozen graph.
//!
//! Every table is a pure function of the graph (and, for communities, the
//! partition), so two runs render identically. Names in the first column are
//! display names (the part of the id after the last `/`); the sort key of
//! each table is stored alongside it.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Reverse;

use crate::algo::Partition;
use crate::graph::SupplyChainGraph;
use crate::ids::{DegreeDirection, Direction, EdgeKind, NodeId, NodeKind};
use crate::traverse::{BfsWorkspace, KindCounts};

pub const DEFAULT_K: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ColumnType {
    String,
    Int,
    Real,
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Column {
    pub name: String,
    pub ty: ColumnType,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Str(String),
    Int(u64),
    /// Rendered with a fixed number of decimals.
    Real {
        value: f64,
        decimals: u8,
    },
    Empty,
}

impl Cell {
    pub fn real2(value: f64) -> Self {
        Cell::Real { value, decimals: 2 }
    }

    pub fn render(&self) -> String {
        match self {
            Cell::Str(s) => s.clone(),
            Cell::Int(n) => n.to_string(),
            Cell::Real { value, decimals } => format!("{:.*}", *decimals as usize, value),
            Cell::Empty => String::new(),
        }
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Str(s.to_string())
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportTable {
    pub name: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
    /// How rows are ordered.
    pub sort_key: &'static str,
}

impl ReportTable {
    pub fn new(name: &str, columns: &[(&str, ColumnType)], sort_key: &'static str) -> Self {
        ReportTable {
            name: name.to_string(),
            columns: columns
                .iter()
                .map(|(n, ty)| Column {
                    name: n.to_string(),
                    ty: *ty,
                })
                .collect(),
            rows: Vec::new(),
            sort_key,
        }
    }

    /// Appends a row.
    ///
    /// # Panics
    /// If the row's arity differs from the column count.
    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row arity in table {}", self.name);
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn cell(&self, row: usize, column: &str) -> Option<&Cell> {
        self.rows.get(row)?.get(self.column_index(column)?)
    }
}

/// Names accepted by [`report_by_name`].
pub const REPORT_NAMES: &[&str] = &[
    "summary",
    "top_base_models",
    "top_backward_models",
    "dataset_inclusion",
    "dataset_models",
    "model_datasets",
];

/// Builds a table by name; `None` for unknown names. Communities need a
/// partition and go through [`communities_table`].
pub fn report_by_name(graph: &SupplyChainGraph, name: &str, k: usize) -> Option<ReportTable> {
    Some(match name {
        "summary" => graph_summary(graph),
        "top_base_models" => top_base_models_by_forward_impact(graph, k),
        "top_backward_models" => top_models_by_backward_size(graph, k),
        "dataset_inclusion" => dataset_inclusion_table(graph, k),
        "dataset_models" => dataset_to_models_table(graph, k),
        "model_datasets" => model_dataset_counts(graph, k),
        _ => return None,
    })
}

const MODEL_KINDS: [NodeKind; 4] = [
    NodeKind::FineTune,
    NodeKind::Adapter,
    NodeKind::Quantization,
    NodeKind::Merge,
];

fn name_of(id: &NodeId) -> Cell {
    Cell::Str(id.display_name().to_string())
}

/// Sorts `(count, idx, ..)` rows by count descending then node order and keeps `k`.
fn top<T>(mut rows: Vec<(usize, u32, T)>, k: usize) -> Vec<(usize, u32, T)> {
    rows.sort_by_key(|(n, idx, _)| (Reverse(*n), *idx));
    rows.truncate(k);
    rows
}

/// Base models ranked by the size of everything derived from them.
pub fn top_base_models_by_forward_impact(graph: &SupplyChainGraph, k: usize) -> ReportTable {
    use ColumnType::*;
    let mut table = ReportTable::new(
        "top_base_models",
        &[
            ("Base model", String),
            ("Total", Int),
            ("Fine-tune", Int),
            ("Adapter", Int),
            ("Quantization", Int),
            ("Merge", Int),
            ("Level", Int),
        ],
        "Total descending, then id ascending",
    );
    let mut ws = BfsWorkspace::new(graph);
    let mut rows = Vec::new();
    for idx in 0..graph.node_count() as u32 {
        if graph.node_at(idx).kind != NodeKind::BaseModel {
            continue;
        }
        let mut counts = KindCounts::default();
        let level = ws.run(graph, idx, Direction::Forward, |v, _, _, _| {
            counts.add(graph.node_at(v).kind)
        });
        rows.push((counts.total(), idx, (counts, level)));
    }
    for (total, idx, (counts, level)) in top(rows, k) {
        let mut row = alloc::vec![name_of(&graph.node_at(idx).id), total.into()];
        row.extend(MODEL_KINDS.iter().map(|&kind| Cell::from(counts.get(kind))));
        row.push(level.into());
        table.push(row);
    }
    table
}

/// Non-base models ranked by the size of everything they depend on.
///
/// Level is the deepest model ancestor; datasets count towards Total but not
/// towards Level. Base Model is the unique reached base model with no
/// model parents, `multiple` when there are several and `-` when none.
pub fn top_models_by_backward_size(graph: &SupplyChainGraph, k: usize) -> ReportTable {
    use ColumnType::*;
    let mut table = ReportTable::new(
        "top_backward_models",
        &[
            ("Model", String),
            ("Model Type", String),
            ("Total", Int),
            ("Fine-tune", Int),
            ("Adapter", Int),
            ("Quantization", Int),
            ("Merge", Int),
            ("Level", Int),
            ("Base Model", String),
        ],
        "Total descending, then id ascending",
    );
    let is_root = |v: u32| {
        graph.node_at(v).kind == NodeKind::BaseModel && !graph.in_adj(v).iter().any(|a| a.kind.is_model_model())
    };
    let mut ws = BfsWorkspace::new(graph);
    let mut rows = Vec::new();
    for idx in 0..graph.node_count() as u32 {
        let kind = graph.node_at(idx).kind;
        if !kind.is_model() || kind == NodeKind::BaseModel {
            continue;
        }
        let mut counts = KindCounts::default();
        let mut model_level = 0;
        let mut roots: Vec<u32> = Vec::new();
        ws.run(graph, idx, Direction::Backward, |v, depth, _, _| {
            let node = graph.node_at(v);
            counts.add(node.kind);
            if node.kind.is_model() {
                model_level = model_level.max(depth);
            }
            if is_root(v) && roots.len() < 2 {
                roots.push(v);
            }
        });
        if counts.total() > 0 {
            rows.push((counts.total(), idx, (counts, model_level, roots)));
        }
    }
    for (total, idx, (counts, level, roots)) in top(rows, k) {
        let node = graph.node_at(idx);
        let base = match roots.as_slice() {
            [one] => name_of(&graph.node_at(*one).id),
            [] => "-".into(),
            _ => "multiple".into(),
        };
        let mut row = alloc::vec![name_of(&node.id), node.kind.label().into(), total.into()];
        row.extend(MODEL_KINDS.iter().map(|&kind| Cell::from(counts.get(kind))));
        row.push(level.into());
        row.push(base);
        table.push(row);
    }
    table
}

/// Two side-by-side rankings over dataset-dataset edges: datasets that
/// include the most others (in-degree) and datasets most derived from
/// (out-degree). The shorter ranking is padded with empty cells.
pub fn dataset_inclusion_table(graph: &SupplyChainGraph, k: usize) -> ReportTable {
    use ColumnType::*;
    let mut table = ReportTable::new(
        "dataset_inclusion",
        &[
            ("Dataset", String),
            ("# of included", Int),
            ("Source dataset", String),
            ("# of derived", Int),
        ],
        "each ranking by count descending, then id ascending",
    );
    let mut included = Vec::new();
    let mut derived = Vec::new();
    for idx in 0..graph.node_count() as u32 {
        if graph.node_at(idx).kind != NodeKind::Dataset {
            continue;
        }
        let count = |adj: &[crate::graph::Adj]| adj.iter().filter(|a| a.kind.is_dataset_dataset()).count();
        let (i, o) = (count(graph.in_adj(idx)), count(graph.out_adj(idx)));
        if i > 0 {
            included.push((i, idx, ()));
        }
        if o > 0 {
            derived.push((o, idx, ()));
        }
    }
    let (included, derived) = (top(included, k), top(derived, k));
    let side = |r: Option<&(usize, u32, ())>| match r {
        Some(&(n, idx, ())) => [name_of(&graph.node_at(idx).id), n.into()],
        None => [Cell::Empty, Cell::Empty],
    };
    for i in 0..included.len().max(derived.len()) {
        let mut row = Vec::with_capacity(4);
        row.extend(side(included.get(i)));
        row.extend(side(derived.get(i)));
        table.push(row);
    }
    table
}

/// Datasets ranked by how many models were trained on them directly.
pub fn dataset_to_models_table(graph: &SupplyChainGraph, k: usize) -> ReportTable {
    use ColumnType::*;
    let mut table = ReportTable::new(
        "dataset_models",
        &[
            ("Dataset", String),
            ("Total", Int),
            ("Fine-tune", Int),
            ("Adapter", Int),
            ("Quantization", Int),
            ("Merges", Int),
        ],
        "Total descending, then id ascending",
    );
    let mut rows = Vec::new();
    for idx in 0..graph.node_count() as u32 {
        if graph.node_at(idx).kind != NodeKind::Dataset {
            continue;
        }
        let mut counts = KindCounts::default();
        for a in graph.out_adj(idx).iter().filter(|a| a.kind == EdgeKind::TrainedOn) {
            counts.add(graph.node_at(a.node).kind);
        }
        if counts.total() > 0 {
            rows.push((counts.total(), idx, counts));
        }
    }
    for (total, idx, counts) in top(rows, k) {
        let mut row = alloc::vec![name_of(&graph.node_at(idx).id), total.into()];
        row.extend(MODEL_KINDS.iter().map(|&kind| Cell::from(counts.get(kind))));
        table.push(row);
    }
    table
}

/// Models ranked by the number of datasets they were trained on directly.
pub fn model_dataset_counts(graph: &SupplyChainGraph, k: usize) -> ReportTable {
    use ColumnType::*;
    let mut table = ReportTable::new(
        "model_datasets",
        &[("Model", String), ("Model Type", String), ("# of datasets", Int)],
        "# of datasets descending, then id ascending",
    );
    let mut rows = Vec::new();
    for idx in 0..graph.node_count() as u32 {
        if !graph.node_at(idx).kind.is_model() {
            continue;
        }
        let n = graph
            .in_adj(idx)
            .iter()
            .filter(|a| a.kind == EdgeKind::TrainedOn)
            .count();
        if n > 0 {
            rows.push((n, idx, ()));
        }
    }
    for (n, idx, ()) in top(rows, k) {
        let node = graph.node_at(idx);
        table.push(alloc::vec![name_of(&node.id), node.kind.label().into(), n.into()]);
    }
    table
}

/// Headline counts. Average degree is |E|/|V|.
pub fn graph_summary(graph: &SupplyChainGraph) -> ReportTable {
    use ColumnType::*;
    let mut columns: Vec<(&str, ColumnType)> = alloc::vec![("Nodes", Int), ("Edges", Int)];
    columns.extend(NodeKind::ALL.iter().map(|k| (k.label(), Int)));
    columns.push(("Average degree", Real));
    columns.push(("Metadata missing %", Real));
    let mut table = ReportTable::new("summary", &columns, "single row");
    let (n, e) = (graph.node_count(), graph.edge_count());
    let missing = graph.nodes().iter().filter(|x| !x.metadata_present).count();
    let ratio = |a: usize| if n == 0 { 0.0 } else { a as f64 / n as f64 };
    let mut row: Vec<Cell> = alloc::vec![n.into(), e.into()];
    row.extend(NodeKind::ALL.iter().map(|&k| Cell::from(graph.kind_count(k))));
    row.push(Cell::real2(ratio(e)));
    row.push(Cell::real2(100.0 * ratio(missing)));
    table.push(row);
    table
}

/// The `k` largest communities with a few member names of each class. The
/// Modularity column repeats the partition's global score.
pub fn communities_table(graph: &SupplyChainGraph, partition: &Partition, k: usize, examples: usize) -> ReportTable {
    use ColumnType::*;
    let mut table = ReportTable::new(
        "communities",
        &[
            ("ID", Int),
            ("Size", Int),
            ("E.g. models", String),
            ("E.g. datasets", String),
            ("Modularity", Real),
        ],
        "Size descending, then smallest member id ascending",
    );
    // Highest-degree members make the most telling examples.
    let pick = |members: &[NodeId], want_model: bool| {
        let mut chosen: Vec<(Reverse<usize>, &NodeId)> = members
            .iter()
            .filter(|m| graph.node(m.as_str()).is_some_and(|n| n.kind.is_model() == want_model))
            .map(|m| {
                let d = graph.degree(m.as_str(), DegreeDirection::In).unwrap_or(0)
                    + graph.degree(m.as_str(), DegreeDirection::Out).unwrap_or(0);
                (Reverse(d), m)
            })
            .collect();
        chosen.sort();
        let names: Vec<&str> = chosen.iter().take(examples).map(|(_, m)| m.display_name()).collect();
        Cell::Str(names.join(", "))
    };
    for (i, members) in partition.communities().iter().take(k).enumerate() {
        table.push(alloc::vec![
            (i + 1).into(),
            members.len().into(),
            pick(members, true),
            pick(members, false),
            Cell::real2(partition.modularity),
        ]);
    }
    table
}
