use alloc::collections::BTreeSet;

use super::record::{RecordType, SnapshotRecord};
use crate::ids::{EdgeKind, NodeKind, Relation};

/// Kind of a node given its card and the kinds of its incoming edges.
///
/// Datasets are datasets. A model's explicit relation tag wins; otherwise the
/// strongest incoming model-model relation (fine-tune, adapter, quantization,
/// merge, in that order) decides; a model with none is a base model.
pub fn classify_node(record: &SnapshotRecord, incoming_relations: &BTreeSet<EdgeKind>) -> NodeKind {
    classify(record.record_type, record.relation, incoming_relations.iter().copied())
}

pub(crate) fn classify(
    record_type: RecordType,
    relation: Option<Relation>,
    incoming: impl IntoIterator<Item = EdgeKind>,
) -> NodeKind {
    if record_type == RecordType::Dataset {
        return NodeKind::Dataset;
    }
    if let Some(rel) = relation {
        return rel.node_kind();
    }
    incoming
        .into_iter()
        .filter_map(|k| Some((k.production_rank()?, k)))
        .min()
        .and_then(|(_, k)| k.produced_kind())
        .unwrap_or(NodeKind::BaseModel)
}
