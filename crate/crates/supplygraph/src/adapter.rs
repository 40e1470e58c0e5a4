//! Platform adapters: where cards come from.
//!
//! The bundled [`DiskAdapter`] reads a mirror directory laid out as
//! `models/<card>.json` and `datasets/<card>.json`. A card file holds one
//! object in the snapshot line format; its file stem is the id with the
//! first `/` written as `--` (`meta-llama--Llama-3-8B.json`).

use std::fs;
use std::path::{Path, PathBuf};

use supplygraph_core::ingest::{RecordType, Snapshot, SnapshotRecord};
use supplygraph_core::{Date, NodeId};

use crate::error::{Error, Result};
use crate::fsutil::read_to_string;
use crate::par::parallel_map;
use crate::snapshot::RecordJson;

pub trait PlatformAdapter: Sync {
    fn list_models(&self) -> Result<Vec<NodeId>>;
    fn list_datasets(&self) -> Result<Vec<NodeId>>;
    fn get_card(&self, id: &NodeId, record_type: RecordType) -> Result<SnapshotRecord>;
}

#[derive(Clone, Debug)]
pub struct DiskAdapter {
    root: PathBuf,
}

fn subdir(t: RecordType) -> &'static str {
    match t {
        RecordType::Model => "models",
        RecordType::Dataset => "datasets",
    }
}

pub fn card_file_name(id: &NodeId) -> String {
    format!("{}.json", id.as_str().replacen('/', "--", 1))
}

fn id_from_stem(stem: &str) -> Option<NodeId> {
    NodeId::new(&stem.replacen("--", "/", 1)).ok()
}

impl DiskAdapter {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        DiskAdapter { root: root.into() }
    }

    fn list(&self, t: RecordType) -> Result<Vec<NodeId>> {
        let dir = self.root.join(subdir(t));
        if !dir.exists() {
            return Ok(Vec::new());
        }
        let read_err = |source| Error::UnreadableInput {
            path: dir.clone(),
            source,
        };
        let mut ids = Vec::new();
        for entry in fs::read_dir(&dir).map_err(read_err)? {
            let path = entry.map_err(read_err)?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
            ids.push(id_from_stem(stem).ok_or_else(|| Error::format(&path, "file name is not a valid id"))?);
        }
        ids.sort();
        Ok(ids)
    }

    fn card_path(&self, id: &NodeId, t: RecordType) -> PathBuf {
        self.root.join(subdir(t)).join(card_file_name(id))
    }
}

impl PlatformAdapter for DiskAdapter {
    fn list_models(&self) -> Result<Vec<NodeId>> {
        self.list(RecordType::Model)
    }

    fn list_datasets(&self) -> Result<Vec<NodeId>> {
        self.list(RecordType::Dataset)
    }

    fn get_card(&self, id: &NodeId, record_type: RecordType) -> Result<SnapshotRecord> {
        let path = self.card_path(id, record_type);
        let card: RecordJson = serde_json::from_str(&read_to_string(&path)?).map_err(|e| Error::format(&path, e))?;
        let record = card.into_record().map_err(|e| Error::format(&path, e))?;
        if &record.id != id || record.record_type != record_type {
            return Err(Error::format(
                &path,
                format!("card describes {} `{}`", record.record_type.token(), record.id),
            ));
        }
        Ok(record)
    }
}

/// Fetches every listed card with at most `parallelism` requests in flight
/// and assembles a snapshot. The result does not depend on `parallelism`.
pub fn harvest(adapter: &dyn PlatformAdapter, date: Option<Date>, parallelism: usize) -> Result<Snapshot> {
    let mut jobs: Vec<(NodeId, RecordType)> = adapter
        .list_models()?
        .into_iter()
        .map(|id| (id, RecordType::Model))
        .chain(adapter.list_datasets()?.into_iter().map(|id| (id, RecordType::Dataset)))
        .collect();
    jobs.sort();
    if let Some(w) = jobs.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::Adapter(format!(
            "`{}` is listed as both a model and a dataset",
            w[0].0
        )));
    }
    let cards = parallel_map(&jobs, parallelism, |(id, t)| adapter.get_card(id, *t));
    let mut snapshot = Snapshot::new(date);
    for card in cards {
        snapshot.insert(card?);
    }
    Ok(snapshot)
}

/// Writes `snapshot` as a mirror directory readable by [`DiskAdapter`].
pub fn write_mirror(root: &Path, snapshot: &Snapshot) -> Result<()> {
    for r in snapshot.records.values() {
        let path = root.join(subdir(r.record_type)).join(card_file_name(&r.id));
        let json = serde_json::to_string_pretty(&RecordJson::from_record(r)).map_err(|e| Error::format(&path, e))?;
        crate::fsutil::atomic_write(&path, json.as_bytes())?;
    }
    Ok(())
}
