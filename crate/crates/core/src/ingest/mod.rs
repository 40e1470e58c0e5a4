//! Snapshot records to graph: dependency extraction and two-pass construction.

mod build;
mod classify;
mod record;
mod text;
mod xref;

use crate::ids::{EdgeKind, NodeId};

pub use build::{
    build_graph, build_graph_with, extract_record, materialize, BuildOptions, BuildWarning, Evidence, RawDependency,
    RecordSummary,
};
pub use classify::classify_node;
pub use record::{RecordType, Snapshot, SnapshotRecord};
pub use text::{extract_textual_dependencies, extract_with_rules, normalize_text, TextRule, TextRules};
pub use xref::extract_cross_reference;

/// Where a dependency was found. Ordered strongest first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum EvidenceSource {
    StructuredField,
    CrossReferenceUrl,
    TextPattern,
}

impl EvidenceSource {
    pub fn token(self) -> &'static str {
        match self {
            EvidenceSource::StructuredField => "structured_field",
            EvidenceSource::CrossReferenceUrl => "cross_reference_url",
            EvidenceSource::TextPattern => "text_pattern",
        }
    }

    pub fn from_token(s: &str) -> Option<Self> {
        match s {
            "structured_field" => Some(EvidenceSource::StructuredField),
            "cross_reference_url" => Some(EvidenceSource::CrossReferenceUrl),
            "text_pattern" => Some(EvidenceSource::TextPattern),
            _ => None,
        }
    }
}

/// A named counterpart found in a card, before it is attached to the card's own id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mention {
    pub name: alloc::string::String,
    pub kind: EdgeKind,
    pub source: EvidenceSource,
}

impl Mention {
    /// Whether the card carrying the mention is the upstream end of the edge.
    /// Only subsets point from the card to the named artifact.
    pub fn subject_is_src(&self) -> bool {
        self.kind == EdgeKind::Subset
    }

    /// Orients the mention against the card `subject`. `None` for self-references
    /// or names that are not valid ids.
    pub fn attach(&self, subject: &NodeId) -> Option<ExtractedDependency> {
        let other = NodeId::new(&self.name).ok()?;
        if &other == subject {
            return None;
        }
        let (parent, child) = if self.subject_is_src() {
            (subject.clone(), other)
        } else {
            (other, subject.clone())
        };
        Some(ExtractedDependency {
            parent,
            child,
            kind: self.kind,
            source: self.source,
        })
    }
}

/// A dependency recovered from a card. `parent` is the upstream end (edge source).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ExtractedDependency {
    pub parent: NodeId,
    pub child: NodeId,
    pub kind: EdgeKind,
    pub source: EvidenceSource,
}
