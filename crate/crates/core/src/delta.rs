//! Differences between dated snapshots, incremental graph updates and churn.
//!
//! A [`Delta`] is signed: new cards, changed cards and removed ids. Applying
//! it replays only the affected cards against the evidence kept in the graph
//! and rematerializes, so the result is the graph a full rebuild of the newer
//! snapshot would give. Removed artifacts that are still named by surviving
//! cards come back as stubs.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use crate::error::DeltaError;
use crate::graph::{Edge, SupplyChainGraph};
use crate::ids::{ArtifactClass, NodeId, NodeKind};
use crate::ingest::{classify_node, extract_record, materialize, Snapshot, SnapshotRecord, TextRules};
use crate::Date;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Delta {
    pub from: Date,
    pub to: Date,
    /// Cards whose id is new, sorted by id.
    pub added: Vec<SnapshotRecord>,
    /// Cards present on both dates whose content changed, sorted by id.
    pub updated: Vec<SnapshotRecord>,
    /// Ids gone from the newer snapshot, sorted.
    pub deleted: Vec<NodeId>,
    /// Kind of each deleted card as read from the card alone.
    pub deleted_kinds: BTreeMap<NodeId, NodeKind>,
    /// Declared dependencies that appear between the two dates.
    pub added_edges: BTreeSet<Edge>,
    /// Declared dependencies that disappear between the two dates.
    pub deleted_edges: BTreeSet<Edge>,
}

impl Delta {
    pub fn empty(from: Date, to: Date) -> Self {
        Delta {
            from,
            to,
            added: Vec::new(),
            updated: Vec::new(),
            deleted: Vec::new(),
            deleted_kinds: BTreeMap::new(),
            added_edges: BTreeSet::new(),
            deleted_edges: BTreeSet::new(),
        }
    }

    /// No card was added, changed or removed.
    pub fn is_empty(&self) -> bool {
        self.added.is_empty() && self.updated.is_empty() && self.deleted.is_empty()
    }

    pub fn validate(&self) -> Result<(), DeltaError> {
        if self.to <= self.from {
            return Err(DeltaError::OutOfOrderSnapshots {
                from: self.from.to_string(),
                to: self.to.to_string(),
            });
        }
        let deleted: BTreeSet<&NodeId> = self.deleted.iter().collect();
        let mut seen = BTreeSet::new();
        for r in self.added.iter().chain(&self.updated) {
            if deleted.contains(&r.id) {
                return Err(DeltaError::InconsistentDelta(format!(
                    "{} is both present and deleted",
                    r.id
                )));
            }
            if !seen.insert(&r.id) {
                return Err(DeltaError::InconsistentDelta(format!("{} listed twice", r.id)));
            }
        }
        Ok(())
    }
}

/// Kind of a card judged from the card alone: its relation tag, else
/// fine-tune when it names a base model, else base.
pub fn record_kind(record: &SnapshotRecord) -> NodeKind {
    let mut incoming = BTreeSet::new();
    if !record.base_model.is_empty() {
        incoming.insert(
            record
                .relation
                .map_or(crate::ids::EdgeKind::FineTune, |r| r.edge_kind()),
        );
    }
    classify_node(record, &incoming)
}

fn declared_edges(record: &SnapshotRecord, rules: &TextRules, out: &mut BTreeSet<Edge>) {
    let (_, deps) = extract_record(record, rules);
    for d in deps {
        let Ok(other) = NodeId::new(&d.counterpart) else {
            continue;
        };
        if other == record.id {
            continue;
        }
        let (src, dst) = if d.origin_is_src {
            (record.id.clone(), other)
        } else {
            (other, record.id.clone())
        };
        out.insert(Edge::new(src, dst, d.kind));
    }
}

/// Compares two dated snapshots.
pub fn diff_snapshots(old: &Snapshot, new: &Snapshot) -> Result<Delta, DeltaError> {
    let from = old.date.ok_or(DeltaError::MissingDate)?;
    let to = new.date.ok_or(DeltaError::MissingDate)?;
    if to <= from {
        return Err(DeltaError::OutOfOrderSnapshots {
            from: from.to_string(),
            to: to.to_string(),
        });
    }
    let rules = TextRules::default();
    let mut delta = Delta::empty(from, to);
    for (id, record) in &new.records {
        match old.records.get(id) {
            None => {
                declared_edges(record, &rules, &mut delta.added_edges);
                delta.added.push(record.clone());
            }
            Some(before) if before != record => {
                let (mut was, mut now) = (BTreeSet::new(), BTreeSet::new());
                declared_edges(before, &rules, &mut was);
                declared_edges(record, &rules, &mut now);
                delta.added_edges.extend(now.difference(&was).cloned());
                delta.deleted_edges.extend(was.difference(&now).cloned());
                delta.updated.push(record.clone());
            }
            Some(_) => {}
        }
    }
    for (id, record) in &old.records {
        if !new.records.contains_key(id) {
            declared_edges(record, &rules, &mut delta.deleted_edges);
            delta.deleted.push(id.clone());
            delta.deleted_kinds.insert(id.clone(), record_kind(record));
        }
    }
    Ok(delta)
}

/// Moves `graph` from `delta.from` to `delta.to`.
///
/// The graph must carry the build evidence of the snapshot dated
/// `delta.from`; anything else is an [`DeltaError::InconsistentDelta`].
pub fn apply_delta(mut graph: SupplyChainGraph, delta: &Delta) -> Result<SupplyChainGraph, DeltaError> {
    delta.validate()?;
    match graph.snapshot_date() {
        Some(d) if d == delta.from => {}
        Some(d) => {
            return Err(DeltaError::InconsistentDelta(format!(
                "graph is dated {d}, delta starts at {}",
                delta.from
            )))
        }
        None => return Err(DeltaError::InconsistentDelta("graph has no snapshot date".to_string())),
    }
    let mut evidence = graph
        .evidence
        .take()
        .ok_or_else(|| DeltaError::InconsistentDelta("graph carries no build evidence".to_string()))?;
    for r in &delta.added {
        if evidence.record(r.id.as_str()).is_some() {
            return Err(DeltaError::InconsistentDelta(format!(
                "added card {} already present",
                r.id
            )));
        }
    }
    for r in &delta.updated {
        if evidence.record(r.id.as_str()).is_none() {
            return Err(DeltaError::InconsistentDelta(format!(
                "updated card {} not present",
                r.id
            )));
        }
    }
    for id in &delta.deleted {
        if evidence.record(id.as_str()).is_none() {
            return Err(DeltaError::InconsistentDelta(format!("deleted card {id} not present")));
        }
    }
    if delta.is_empty() {
        graph.evidence = Some(evidence);
        graph.set_snapshot_date(Some(delta.to));
        return Ok(graph);
    }
    drop(graph);
    for id in &delta.deleted {
        evidence.remove(id.as_str());
    }
    for r in delta.added.iter().chain(&delta.updated) {
        evidence.upsert(r);
    }
    Ok(materialize(evidence, Some(delta.to)))
}

/// Additions and deletions of one day, by node kind.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ChurnDay {
    pub date: Option<Date>,
    pub added: BTreeMap<NodeKind, usize>,
    pub deleted: BTreeMap<NodeKind, usize>,
}

impl ChurnDay {
    pub fn added_of(&self, kind: NodeKind) -> usize {
        self.added.get(&kind).copied().unwrap_or(0)
    }

    pub fn deleted_of(&self, kind: NodeKind) -> usize {
        self.deleted.get(&kind).copied().unwrap_or(0)
    }

    pub fn added_total(&self) -> usize {
        self.added.values().sum()
    }

    pub fn deleted_total(&self) -> usize {
        self.deleted.values().sum()
    }

    pub fn added_class(&self, class: ArtifactClass) -> usize {
        self.added
            .iter()
            .filter(|(k, _)| k.class() == class)
            .map(|(_, n)| n)
            .sum()
    }

    pub fn deleted_class(&self, class: ArtifactClass) -> usize {
        self.deleted
            .iter()
            .filter(|(k, _)| k.class() == class)
            .map(|(_, n)| n)
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum ChurnWarning {
    /// Consecutive deltas do not meet: one ends at `end`, the next starts at `start`.
    GapInDates { end: Date, start: Date },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ChurnStats {
    /// One row per delta, dated by the delta's `to`.
    pub days: Vec<ChurnDay>,
    pub warnings: Vec<ChurnWarning>,
}

impl ChurnStats {
    pub fn total_added(&self) -> usize {
        self.days.iter().map(ChurnDay::added_total).sum()
    }

    pub fn total_deleted(&self) -> usize {
        self.days.iter().map(ChurnDay::deleted_total).sum()
    }

    fn mean(&self, f: impl Fn(&ChurnDay) -> usize) -> f64 {
        if self.days.is_empty() {
            return 0.0;
        }
        self.days.iter().map(f).sum::<usize>() as f64 / self.days.len() as f64
    }

    /// Mean daily additions of one artifact class.
    pub fn average_added(&self, class: ArtifactClass) -> f64 {
        self.mean(|d| d.added_class(class))
    }

    pub fn average_deleted(&self, class: ArtifactClass) -> f64 {
        self.mean(|d| d.deleted_class(class))
    }

    /// Mean daily additions plus deletions of one class.
    pub fn average_changed(&self, class: ArtifactClass) -> f64 {
        self.mean(|d| d.added_class(class) + d.deleted_class(class))
    }
}

/// Daily churn over a run of deltas. Non-adjacent deltas are reported as
/// [`ChurnWarning::GapInDates`] and still counted.
pub fn churn_report(deltas: &[Delta]) -> Result<ChurnStats, DeltaError> {
    if deltas.is_empty() {
        return Err(DeltaError::EmptyInput);
    }
    let mut stats = ChurnStats::default();
    for (i, delta) in deltas.iter().enumerate() {
        if i > 0 && deltas[i - 1].to != delta.from {
            stats.warnings.push(ChurnWarning::GapInDates {
                end: deltas[i - 1].to,
                start: delta.from,
            });
        }
        let mut day = ChurnDay {
            date: Some(delta.to),
            ..ChurnDay::default()
        };
        for r in &delta.added {
            *day.added.entry(record_kind(r)).or_default() += 1;
        }
        for id in &delta.deleted {
            let kind = delta.deleted_kinds.get(id).copied().unwrap_or(NodeKind::BaseModel);
            *day.deleted.entry(kind).or_default() += 1;
        }
        stats.days.push(day);
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ids::EdgeKind;
    use crate::ingest::build_graph;

    fn id(s: &str) -> NodeId {
        NodeId::new(s).unwrap()
    }

    fn day(d: u32) -> Date {
        Date::from_ymd_opt(2024, 10, d).unwrap()
    }

    fn snap(d: u32, records: Vec<SnapshotRecord>) -> Snapshot {
        let mut s = Snapshot::new(Some(day(d)));
        for r in records {
            s.insert(r);
        }
        s
    }

    fn child_of(name: &str, parent: &str) -> SnapshotRecord {
        let mut r = SnapshotRecord::model(id(name));
        r.base_model.push(id(parent));
        r
    }

    #[test]
    fn set_difference() {
        let s0 = snap(
            1,
            alloc::vec![SnapshotRecord::model(id("a")), SnapshotRecord::model(id("b"))],
        );
        let s1 = snap(
            2,
            alloc::vec![SnapshotRecord::model(id("b")), SnapshotRecord::model(id("c"))],
        );
        let d = diff_snapshots(&s0, &s1).unwrap();
        assert_eq!(d.added.iter().map(|r| r.id.as_str()).collect::<Vec<_>>(), ["c"]);
        assert_eq!(d.deleted, [id("a")]);
        assert!(d.updated.is_empty());
    }

    #[test]
    fn identical_snapshots_give_empty_delta() {
        let s0 = snap(1, alloc::vec![child_of("b", "a")]);
        let mut s1 = s0.clone();
        s1.date = Some(day(2));
        let d = diff_snapshots(&s0, &s1).unwrap();
        assert!(d.is_empty());
        assert!(d.added_edges.is_empty() && d.deleted_edges.is_empty());
    }

    #[test]
    fn new_base_model_is_one_edge_and_no_node_change() {
        let s0 = snap(
            1,
            alloc::vec![SnapshotRecord::model(id("a")), SnapshotRecord::model(id("b"))],
        );
        let s1 = snap(2, alloc::vec![SnapshotRecord::model(id("a")), child_of("b", "a")]);
        let d = diff_snapshots(&s0, &s1).unwrap();
        assert!(d.added.is_empty() && d.deleted.is_empty());
        assert_eq!(d.updated.len(), 1);
        assert_eq!(
            d.added_edges.into_iter().collect::<Vec<_>>(),
            [Edge::new(id("a"), id("b"), EdgeKind::FineTune)]
        );
    }

    #[test]
    fn dates_are_checked() {
        let s0 = snap(2, alloc::vec![]);
        let s1 = snap(1, alloc::vec![]);
        assert!(matches!(
            diff_snapshots(&s0, &s1),
            Err(DeltaError::OutOfOrderSnapshots { .. })
        ));
        assert_eq!(diff_snapshots(&Snapshot::default(), &s1), Err(DeltaError::MissingDate));
    }

    #[test]
    fn empty_delta_keeps_graph() {
        let s0 = snap(1, alloc::vec![child_of("b", "a")]);
        let g = build_graph(&s0).unwrap();
        let g2 = apply_delta(g.clone(), &Delta::empty(day(1), day(2))).unwrap();
        assert_eq!(g, g2);
        assert_eq!(g2.snapshot_date(), Some(day(2)));
    }

    #[test]
    fn wrong_base_date_is_inconsistent() {
        let g = build_graph(&snap(1, alloc::vec![SnapshotRecord::model(id("a"))])).unwrap();
        let r = apply_delta(g, &Delta::empty(day(3), day(4)));
        assert!(matches!(r, Err(DeltaError::InconsistentDelta(_))));
    }

    #[test]
    fn deleted_parent_degrades_to_stub() {
        let s0 = snap(1, alloc::vec![SnapshotRecord::model(id("a")), child_of("b", "a")]);
        let s1 = snap(2, alloc::vec![child_of("b", "a")]);
        let g = apply_delta(build_graph(&s0).unwrap(), &diff_snapshots(&s0, &s1).unwrap()).unwrap();
        assert_eq!(g, build_graph(&s1).unwrap());
        assert!(!g.node("a").unwrap().metadata_present);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn churn_counts_by_kind() {
        let s0 = snap(1, alloc::vec![SnapshotRecord::model(id("old"))]);
        let s1 = snap(
            2,
            alloc::vec![
                SnapshotRecord::model(id("m1")),
                child_of("m2", "m1"),
                SnapshotRecord::dataset(id("d1")),
            ],
        );
        let stats = churn_report(&[diff_snapshots(&s0, &s1).unwrap()]).unwrap();
        let row = &stats.days[0];
        assert_eq!(row.added_class(ArtifactClass::Model), 2);
        assert_eq!(row.added_class(ArtifactClass::Dataset), 1);
        assert_eq!(row.added_of(NodeKind::FineTune), 1);
        assert_eq!(row.deleted_of(NodeKind::BaseModel), 1);
        assert_eq!(stats.total_added(), 3);
        assert_eq!(stats.total_deleted(), 1);
    }

    #[test]
    fn churn_needs_input_and_flags_gaps() {
        assert_eq!(churn_report(&[]), Err(DeltaError::EmptyInput));
        let stats = churn_report(&[Delta::empty(day(1), day(2)), Delta::empty(day(3), day(4))]).unwrap();
        assert_eq!(
            stats.warnings,
            [ChurnWarning::GapInDates {
                end: day(2),
                start: day(3)
            }]
        );
        assert_eq!(stats.days.len(), 2);
    }
}
