//! Delta files: one JSON object per delta.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use supplygraph_core::delta::Delta;
use supplygraph_core::{Date, Edge, EdgeKind, NodeId, NodeKind};

use crate::error::{Error, Result};
use crate::fsutil::{atomic_write, read_to_string};
use crate::snapshot::RecordJson;

#[derive(Debug, Serialize, Deserialize)]
struct EdgeJson {
    src: String,
    dst: String,
    kind: EdgeKind,
}

#[derive(Debug, Serialize, Deserialize)]
struct DeltaJson {
    from: Date,
    to: Date,
    #[serde(default)]
    added_records: Vec<RecordJson>,
    #[serde(default)]
    updated_records: Vec<RecordJson>,
    #[serde(default)]
    deleted_ids: Vec<String>,
    #[serde(default)]
    deleted_kinds: BTreeMap<String, NodeKind>,
    #[serde(default)]
    added_edges: Vec<EdgeJson>,
    #[serde(default)]
    deleted_edges: Vec<EdgeJson>,
}

fn edge_json(e: &Edge) -> EdgeJson {
    EdgeJson {
        src: e.src.to_string(),
        dst: e.dst.to_string(),
        kind: e.kind,
    }
}

pub fn delta_to_json(delta: &Delta) -> String {
    let j = DeltaJson {
        from: delta.from,
        to: delta.to,
        added_records: delta.added.iter().map(RecordJson::from_record).collect(),
        updated_records: delta.updated.iter().map(RecordJson::from_record).collect(),
        deleted_ids: delta.deleted.iter().map(|x| x.to_string()).collect(),
        deleted_kinds: delta.deleted_kinds.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        added_edges: delta.added_edges.iter().map(edge_json).collect(),
        deleted_edges: delta.deleted_edges.iter().map(edge_json).collect(),
    };
    let mut s = serde_json::to_string_pretty(&j).expect("delta serializes");
    s.push('\n');
    s
}

pub fn parse_delta(text: &str) -> Result<Delta, String> {
    let j: DeltaJson = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let id = |s: &str| NodeId::new(s).map_err(|e| e.to_string());
    let edge = |e: &EdgeJson| Ok::<_, String>(Edge::new(id(&e.src)?, id(&e.dst)?, e.kind));
    let mut delta = Delta::empty(j.from, j.to);
    let records = |v: Vec<RecordJson>| -> Result<Vec<_>, String> {
        let mut out = v
            .into_iter()
            .map(RecordJson::into_record)
            .collect::<Result<Vec<_>, _>>()?;
        out.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(out)
    };
    delta.added = records(j.added_records)?;
    delta.updated = records(j.updated_records)?;
    delta.deleted = j.deleted_ids.iter().map(|s| id(s)).collect::<Result<_, _>>()?;
    delta.deleted.sort();
    delta.deleted_kinds = j
        .deleted_kinds
        .iter()
        .map(|(k, v)| Ok((id(k)?, *v)))
        .collect::<Result<_, String>>()?;
    delta.added_edges = j.added_edges.iter().map(edge).collect::<Result<_, _>>()?;
    delta.deleted_edges = j.deleted_edges.iter().map(edge).collect::<Result<_, _>>()?;
    delta.validate().map_err(|e| e.to_string())?;
    Ok(delta)
}

pub fn load_delta(path: &Path) -> Result<Delta> {
    parse_delta(&read_to_string(path)?).map_err(|e| Error::format(path, e))
}

pub fn write_delta(path: &Path, delta: &Delta) -> Result<()> {
    atomic_write(path, delta_to_json(delta).as_bytes())
}
