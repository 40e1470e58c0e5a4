//! Snapshot JSONL: one card per line.
//!
//! Malformed lines are collected as [`Reject`]s instead of aborting the load;
//! a later line with an already-seen id replaces the earlier one.

use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};
use supplygraph_core::ingest::{RecordType, Snapshot, SnapshotRecord};
use supplygraph_core::{Date, NodeId, Relation};

use crate::error::{Error, Result};
use crate::fsutil::{atomic_write, read_to_string};

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(untagged)]
enum OneOrMany {
    #[default]
    None,
    One(String),
    Many(Vec<String>),
}

/// Wire form of a card. Unknown keys are ignored.
#[derive(Debug, Default, Deserialize, Serialize)]
pub struct RecordJson {
    id: Option<String>,
    #[serde(rename = "type")]
    record_type: Option<String>,
    #[serde(default, skip_serializing_if = "is_none")]
    base_model: OneOrMany,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    relation: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    datasets: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    trained_models: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    subset_of: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    modified_from: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    derived_from: Vec<String>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    description: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    xref_urls: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    first_seen: Option<String>,
}

fn is_none(v: &OneOrMany) -> bool {
    matches!(v, OneOrMany::None)
}

fn ids(field: &str, values: Vec<String>) -> Result<Vec<NodeId>, String> {
    values
        .into_iter()
        .map(|v| NodeId::new(&v).map_err(|e| format!("{field}: {e}")))
        .collect()
}

impl RecordJson {
    pub fn into_record(self) -> Result<SnapshotRecord, String> {
        let id = self.id.ok_or("missing field `id`")?;
        let id = NodeId::new(&id).map_err(|e| e.to_string())?;
        let ty = self.record_type.ok_or("missing field `type`")?;
        let record_type = RecordType::from_token(&ty).ok_or_else(|| format!("unknown type `{ty}`"))?;
        let mut r = SnapshotRecord::new(id, record_type);
        r.base_model = match self.base_model {
            OneOrMany::None => Vec::new(),
            OneOrMany::One(s) => ids("base_model", vec![s])?,
            OneOrMany::Many(v) => ids("base_model", v)?,
        };
        r.relation = match self.relation.as_deref() {
            None | Some("") => None,
            Some(t) => Some(Relation::from_token(t).ok_or_else(|| format!("unknown relation `{t}`"))?),
        };
        r.datasets = ids("datasets", self.datasets)?;
        r.trained_models = ids("trained_models", self.trained_models)?;
        r.subset_of = ids("subset_of", self.subset_of)?;
        r.modified_from = ids("modified_from", self.modified_from)?;
        r.derived_from = ids("derived_from", self.derived_from)?;
        r.description = self.description;
        r.xref_urls = self.xref_urls;
        r.first_seen = match self.first_seen.as_deref() {
            None | Some("") => None,
            Some(d) => Some(parse_date(d).ok_or_else(|| format!("bad first_seen `{d}`"))?),
        };
        r.validate()?;
        Ok(r)
    }

    pub fn from_record(r: &SnapshotRecord) -> Self {
        let strings = |v: &[NodeId]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        RecordJson {
            id: Some(r.id.to_string()),
            record_type: Some(r.record_type.token().to_string()),
            base_model: if r.base_model.is_empty() {
                OneOrMany::None
            } else {
                OneOrMany::Many(strings(&r.base_model))
            },
            relation: r.relation.map(|x| x.token().to_string()),
            datasets: strings(&r.datasets),
            trained_models: strings(&r.trained_models),
            subset_of: strings(&r.subset_of),
            modified_from: strings(&r.modified_from),
            derived_from: strings(&r.derived_from),
            description: r.description.clone(),
            xref_urls: r.xref_urls.clone(),
            first_seen: r.first_seen.map(|d| d.to_string()),
        }
    }
}

/// Accepts `YYYY-MM-DD`, optionally followed by a time part.
pub fn parse_date(s: &str) -> Option<Date> {
    let head = s.get(..10)?;
    Date::parse_from_str(head, "%Y-%m-%d").ok()
}

/// First `YYYY-MM-DD` embedded in a file name, if any.
pub fn date_from_path(path: &Path) -> Option<Date> {
    let name = path.file_name()?.to_str()?;
    (0..name.len().saturating_sub(9))
        .filter(|&i| name.is_char_boundary(i) && name.is_char_boundary(i + 10))
        .find_map(|i| Date::parse_from_str(&name[i..i + 10], "%Y-%m-%d").ok())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Reject {
    pub line_number: usize,
    pub reason: String,
}

#[derive(Clone, Debug, Default)]
pub struct LoadedSnapshot {
    pub snapshot: Snapshot,
    pub rejects: Vec<Reject>,
    /// Ids that appeared on more than one line; the last line won.
    pub duplicates: Vec<NodeId>,
}

pub fn parse_snapshot(text: &str, date: Option<Date>) -> LoadedSnapshot {
    let mut out = LoadedSnapshot {
        snapshot: Snapshot::new(date),
        ..LoadedSnapshot::default()
    };
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<RecordJson>(line)
            .map_err(|e| e.to_string())
            .and_then(RecordJson::into_record);
        match parsed {
            Ok(record) => {
                let id = record.id.clone();
                if out.snapshot.insert(record).is_some() {
                    warn!("line {}: duplicate id `{id}`, later line wins", i + 1);
                    out.duplicates.push(id);
                }
            }
            Err(reason) => out.rejects.push(Reject {
                line_number: i + 1,
                reason,
            }),
        }
    }
    out
}

/// Loads a snapshot file. `date` overrides any date found in the file name.
pub fn load_snapshot(path: &Path, date: Option<Date>) -> Result<LoadedSnapshot> {
    let text = read_to_string(path)?;
    let loaded = parse_snapshot(&text, date.or_else(|| date_from_path(path)));
    if !loaded.rejects.is_empty() {
        warn!(
            "{}: {} malformed line(s) rejected",
            path.display(),
            loaded.rejects.len()
        );
    }
    Ok(loaded)
}

pub fn snapshot_to_jsonl(snapshot: &Snapshot) -> String {
    let mut out = String::new();
    for r in snapshot.records.values() {
        out.push_str(&serde_json::to_string(&RecordJson::from_record(r)).expect("record serializes"));
        out.push('\n');
    }
    out
}

pub fn write_rejects(path: &Path, rejects: &[Reject]) -> Result<()> {
    let mut out = String::new();
    for r in rejects {
        out.push_str(&serde_json::to_string(r).map_err(|e| Error::format(path, e))?);
        out.push('\n');
    }
    atomic_write(path, out.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_valid_lines() {
        let text = r#"{"id":"a/m","type":"model"}
{"id":"a/n","type":"model","base_model":"a/m","relation":"adapter"}
{"id":"d/x","type":"dataset","subset_of":["d/y"],"extra":1}
"#;
        let l = parse_snapshot(text, None);
        assert_eq!(l.snapshot.len(), 3);
        assert!(l.rejects.is_empty());
        assert_eq!(l.snapshot.get("a/n").unwrap().base_model[0].as_str(), "a/m");
    }

    #[test]
    fn missing_id_is_rejected() {
        let l = parse_snapshot(
            "{\"type\":\"model\"}\nnot json\n{\"id\":\"x\",\"type\":\"model\",\"subset_of\":[\"y\"]}\n",
            None,
        );
        assert_eq!(l.snapshot.len(), 0);
        assert_eq!(l.rejects.len(), 3);
        assert_eq!(l.rejects[0].line_number, 1);
        assert!(l.rejects[0].reason.contains("id"));
    }

    #[test]
    fn duplicate_id_later_wins() {
        let l = parse_snapshot(
            "{\"id\":\"x\",\"type\":\"model\"}\n{\"id\":\"x\",\"type\":\"model\",\"description\":\"two\"}\n",
            None,
        );
        assert_eq!(l.snapshot.get("x").unwrap().description, "two");
        assert_eq!(l.duplicates.len(), 1);
    }

    #[test]
    fn dates_in_file_names() {
        assert_eq!(
            date_from_path(Path::new("/tmp/hub-2024-10-07.jsonl")),
            Date::from_ymd_opt(2024, 10, 7)
        );
        assert_eq!(date_from_path(Path::new("snapshot.jsonl")), None);
    }

    #[test]
    fn round_trip() {
        let text = "{\"id\":\"a/n\",\"type\":\"model\",\"base_model\":[\"a/m\"],\"relation\":\"merge\",\"first_seen\":\"2024-01-02\"}\n";
        let l = parse_snapshot(text, None);
        assert_eq!(snapshot_to_jsonl(&l.snapshot), text);
    }
}
