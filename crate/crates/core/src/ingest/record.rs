use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::ids::{NodeId, Relation};
use crate::Date;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RecordType {
    Model,
    Dataset,
}

impl RecordType {
    pub fn token(self) -> &'static str {
        match self {
            RecordType::Model => "model",
            RecordType::Dataset => "dataset",
        }
    }

    pub fn from_token(s: &str) -> Option<Self> {
        match s {
            "model" => Some(RecordType::Model),
            "dataset" => Some(RecordType::Dataset),
            _ => None,
        }
    }
}

/// One model or dataset card as captured in a snapshot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SnapshotRecord {
    pub id: NodeId,
    pub record_type: RecordType,
    pub base_model: Vec<NodeId>,
    pub relation: Option<Relation>,
    pub datasets: Vec<NodeId>,
    /// Dataset cards only: models trained or fine-tuned on this dataset.
    pub trained_models: Vec<NodeId>,
    /// Dataset cards only.
    pub subset_of: Vec<NodeId>,
    /// Dataset cards only.
    pub modified_from: Vec<NodeId>,
    pub derived_from: Vec<NodeId>,
    pub description: String,
    pub xref_urls: Vec<String>,
    pub first_seen: Option<Date>,
}

impl SnapshotRecord {
    pub fn new(id: NodeId, record_type: RecordType) -> Self {
        SnapshotRecord {
            id,
            record_type,
            base_model: Vec::new(),
            relation: None,
            datasets: Vec::new(),
            trained_models: Vec::new(),
            subset_of: Vec::new(),
            modified_from: Vec::new(),
            derived_from: Vec::new(),
            description: String::new(),
            xref_urls: Vec::new(),
            first_seen: None,
        }
    }

    pub fn model(id: NodeId) -> Self {
        Self::new(id, RecordType::Model)
    }

    pub fn dataset(id: NodeId) -> Self {
        Self::new(id, RecordType::Dataset)
    }

    /// True when the card carries anything beyond its name.
    pub fn has_metadata(&self) -> bool {
        !(self.base_model.is_empty()
            && self.relation.is_none()
            && self.datasets.is_empty()
            && self.trained_models.is_empty()
            && self.subset_of.is_empty()
            && self.modified_from.is_empty()
            && self.derived_from.is_empty()
            && self.description.trim().is_empty()
            && self.xref_urls.is_empty())
    }

    /// Checks that dataset-only fields are not set on a model card.
    pub fn validate(&self) -> Result<(), &'static str> {
        if self.record_type == RecordType::Model {
            if !self.trained_models.is_empty() {
                return Err("trained_models is only valid on dataset records");
            }
            if !self.subset_of.is_empty() {
                return Err("subset_of is only valid on dataset records");
            }
            if !self.modified_from.is_empty() {
                return Err("modified_from is only valid on dataset records");
            }
        }
        Ok(())
    }
}

/// A dated set of records keyed by id.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Snapshot {
    pub date: Option<Date>,
    pub records: BTreeMap<NodeId, SnapshotRecord>,
}

impl Snapshot {
    pub fn new(date: Option<Date>) -> Self {
        Snapshot {
            date,
            records: BTreeMap::new(),
        }
    }

    /// Inserts a record; a later record with the same id replaces the earlier
    /// one and the replaced record is returned.
    pub fn insert(&mut self, record: SnapshotRecord) -> Option<SnapshotRecord> {
        self.records.insert(record.id.clone(), record)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&SnapshotRecord> {
        self.records.get(id)
    }
}

impl FromIterator<SnapshotRecord> for Snapshot {
    fn from_iter<T: IntoIterator<Item = SnapshotRecord>>(iter: T) -> Self {
        let mut s = Snapshot::default();
        for r in iter {
            s.insert(r);
        }
        s
    }
}
