//! Node identifiers and the closed sets of node and edge kinds.

use alloc::string::{String, ToString};
use core::fmt;
use core::str::FromStr;

use crate::error::GraphError;

/// Identifier of an artifact, e.g. `meta-llama/Meta-Llama-3-8B` or a bare name.
///
/// Surrounding whitespace is trimmed on construction; comparison is
/// case-sensitive and byte-lexicographic, which is also the export order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "String", into = "String"))]
pub struct NodeId(String);

impl NodeId {
    pub fn new(raw: &str) -> Result<Self, GraphError> {
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.contains(['\n', '\r']) {
            return Err(GraphError::InvalidNodeId(raw.to_string()));
        }
        Ok(NodeId(trimmed.to_string()))
    }

    /// Bypasses validation; only for echoing unknown names back in errors.
    pub(crate) fn raw(s: &str) -> Self {
        NodeId(s.to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The portion after the last `/`, used for display in report tables.
    pub fn display_name(&self) -> &str {
        match self.0.rfind('/') {
            Some(pos) if pos + 1 < self.0.len() => &self.0[pos + 1..],
            _ => &self.0,
        }
    }

    pub fn namespace(&self) -> Option<&str> {
        self.0.rfind('/').map(|pos| &self.0[..pos])
    }
}

impl fmt::Debug for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for NodeId {
    type Err = GraphError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NodeId::new(s)
    }
}

impl TryFrom<String> for NodeId {
    type Error = GraphError;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        NodeId::new(&value)
    }
}

impl TryFrom<&str> for NodeId {
    type Error = GraphError;
    fn try_from(value: &str) -> Result<Self, Self::Error> {
        NodeId::new(value)
    }
}

impl From<NodeId> for String {
    fn from(id: NodeId) -> String {
        id.0
    }
}

impl AsRef<str> for NodeId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl core::borrow::Borrow<str> for NodeId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// Broad class of an artifact, used for endpoint checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ArtifactClass {
    Model,
    Dataset,
}

macro_rules! token_enum {
    (
        $(#[$meta:meta])*
        $name:ident, $err:literal {
            $($variant:ident => $token:literal),+ $(,)?
        }
    ) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            /// Token used in the CSV/JSON file formats.
            pub fn token(self) -> &'static str {
                match self {
                    $($name::$variant => $token),+
                }
            }

            pub fn from_token(token: &str) -> Option<Self> {
                match token {
                    $($token => Some($name::$variant),)+
                    _ => None,
                }
            }

            pub fn index(self) -> usize {
                self as usize
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.token())
            }
        }

        impl FromStr for $name {
            type Err = GraphError;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                $name::from_token(s).ok_or_else(|| GraphError::UnknownToken {
                    what: $err,
                    token: s.to_string(),
                })
            }
        }

        #[cfg(feature = "serde")]
        impl serde::Serialize for $name {
            fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(self.token())
            }
        }

        #[cfg(feature = "serde")]
        impl<'de> serde::Deserialize<'de> for $name {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let s = <alloc::borrow::Cow<'de, str> as serde::Deserialize>::deserialize(d)?;
                $name::from_token(&s).ok_or_else(|| {
                    serde::de::Error::custom(alloc::format!("unknown {} `{}`", $err, s))
                })
            }
        }
    };
}

token_enum! {
    /// The six artifact kinds.
    NodeKind, "node kind" {
        BaseModel => "base",
        FineTune => "finetune",
        Adapter => "adapter",
        Quantization => "quantization",
        Merge => "merge",
        Dataset => "dataset",
    }
}

token_enum! {
    /// Typed dependency from an upstream artifact to the artifact derived from it.
    EdgeKind, "edge kind" {
        FineTune => "finetune",
        Adapter => "adapter",
        Quantization => "quantization",
        Merge => "merge",
        TrainedOn => "trained_on",
        Subset => "subset",
        ModifiedVersion => "modified_version",
        DerivedDataset => "derived_dataset",
    }
}

impl NodeKind {
    pub fn class(self) -> ArtifactClass {
        match self {
            NodeKind::Dataset => ArtifactClass::Dataset,
            _ => ArtifactClass::Model,
        }
    }

    pub fn is_model(self) -> bool {
        self.class() == ArtifactClass::Model
    }

    /// Column label used in report tables.
    pub fn label(self) -> &'static str {
        match self {
            NodeKind::BaseModel => "Base",
            NodeKind::FineTune => "Finetune",
            NodeKind::Adapter => "Adapter",
            NodeKind::Quantization => "Quantization",
            NodeKind::Merge => "Merge",
            NodeKind::Dataset => "Dataset",
        }
    }
}

impl EdgeKind {
    /// Required classes of (source, destination).
    pub fn endpoint_classes(self) -> (ArtifactClass, ArtifactClass) {
        use ArtifactClass::*;
        match self {
            EdgeKind::FineTune | EdgeKind::Adapter | EdgeKind::Quantization | EdgeKind::Merge => (Model, Model),
            EdgeKind::TrainedOn => (Dataset, Model),
            EdgeKind::Subset | EdgeKind::ModifiedVersion | EdgeKind::DerivedDataset => (Dataset, Dataset),
        }
    }

    pub fn is_model_model(self) -> bool {
        matches!(
            self,
            EdgeKind::FineTune | EdgeKind::Adapter | EdgeKind::Quantization | EdgeKind::Merge
        )
    }

    pub fn is_dataset_dataset(self) -> bool {
        matches!(
            self,
            EdgeKind::Subset | EdgeKind::ModifiedVersion | EdgeKind::DerivedDataset
        )
    }

    /// Node kind of a model produced through this relation.
    pub fn produced_kind(self) -> Option<NodeKind> {
        match self {
            EdgeKind::FineTune => Some(NodeKind::FineTune),
            EdgeKind::Adapter => Some(NodeKind::Adapter),
            EdgeKind::Quantization => Some(NodeKind::Quantization),
            EdgeKind::Merge => Some(NodeKind::Merge),
            _ => None,
        }
    }

    /// Rank among model-model relations when inferring how a model was produced.
    /// Lower is stronger.
    pub(crate) fn production_rank(self) -> Option<u8> {
        match self {
            EdgeKind::FineTune => Some(0),
            EdgeKind::Adapter => Some(1),
            EdgeKind::Quantization => Some(2),
            EdgeKind::Merge => Some(3),
            _ => None,
        }
    }
}

/// Model-model relation tag carried by a model card.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Relation {
    FineTune,
    Adapter,
    Quantization,
    Merge,
}

impl Relation {
    pub fn token(self) -> &'static str {
        match self {
            Relation::FineTune => "finetune",
            Relation::Adapter => "adapter",
            Relation::Quantization => "quantization",
            Relation::Merge => "merge",
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        match token {
            "finetune" => Some(Relation::FineTune),
            "adapter" => Some(Relation::Adapter),
            "quantization" => Some(Relation::Quantization),
            "merge" => Some(Relation::Merge),
            _ => None,
        }
    }

    pub fn edge_kind(self) -> EdgeKind {
        match self {
            Relation::FineTune => EdgeKind::FineTune,
            Relation::Adapter => EdgeKind::Adapter,
            Relation::Quantization => EdgeKind::Quantization,
            Relation::Merge => EdgeKind::Merge,
        }
    }

    pub fn node_kind(self) -> NodeKind {
        match self {
            Relation::FineTune => NodeKind::FineTune,
            Relation::Adapter => NodeKind::Adapter,
            Relation::Quantization => NodeKind::Quantization,
            Relation::Merge => NodeKind::Merge,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum DegreeDirection {
    In,
    Out,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_id_trims_and_rejects_blank() {
        assert_eq!(NodeId::new("  a/b ").unwrap().as_str(), "a/b");
        assert!(NodeId::new("   ").is_err());
        assert!(NodeId::new("a\nb").is_err());
    }

    #[test]
    fn display_name_is_suffix_after_last_slash() {
        assert_eq!(
            NodeId::new("meta-llama/Meta-Llama").unwrap().display_name(),
            "Meta-Llama"
        );
        assert_eq!(NodeId::new("bert").unwrap().display_name(), "bert");
        assert_eq!(NodeId::new("a/b/c").unwrap().display_name(), "c");
    }

    #[test]
    fn tokens_round_trip() {
        for k in NodeKind::ALL {
            assert_eq!(NodeKind::from_token(k.token()), Some(*k));
        }
        for k in EdgeKind::ALL {
            assert_eq!(EdgeKind::from_token(k.token()), Some(*k));
        }
        assert_eq!(NodeKind::ALL.len(), 6);
        assert_eq!(EdgeKind::ALL.len(), 8);
    }

    #[test]
    fn endpoint_rules() {
        assert_eq!(
            EdgeKind::TrainedOn.endpoint_classes(),
            (ArtifactClass::Dataset, ArtifactClass::Model)
        );
        assert!(EdgeKind::Merge.is_model_model());
        assert!(EdgeKind::Subset.is_dataset_dataset());
    }
}
