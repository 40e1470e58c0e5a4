//! Two-pass graph construction.
//!
//! Pass one turns every card into a [`RecordSummary`] plus raw dependencies
//! (structured fields, then cross-reference URLs, then text patterns). The
//! result is kept as [`Evidence`] so later snapshots only re-extract the cards
//! that changed. Pass two ([`materialize`]) resolves names, applies source
//! precedence, creates stubs, classifies nodes and freezes the graph. It is a
//! pure function of the evidence, which is what makes incremental updates
//! equal to full rebuilds.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::classify::classify;
use super::record::{RecordType, Snapshot, SnapshotRecord};
use super::text::{extract_with_rules, TextRules};
use super::xref::extract_cross_reference;
use super::{EvidenceSource, ExtractedDependency, Mention};
use crate::error::IngestError;
use crate::graph::{Edge, Node, StubPolicy, SupplyChainGraph};
use crate::ids::{ArtifactClass, EdgeKind, NodeId, Relation};
use crate::Date;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BuildOptions {
    pub stubs: StubPolicy,
    pub rules: TextRules,
}

/// What the graph needs to know about a card besides its dependencies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecordSummary {
    pub id: NodeId,
    pub record_type: RecordType,
    pub relation: Option<Relation>,
    pub first_seen: Option<Date>,
    pub metadata_present: bool,
}

/// A dependency as written on a card, before name resolution.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct RawDependency {
    /// The card the dependency was read from.
    pub origin: NodeId,
    /// The other artifact, as named on the card.
    pub counterpart: String,
    pub kind: EdgeKind,
    pub source: EvidenceSource,
    /// Whether `origin` is the upstream end of the edge.
    pub origin_is_src: bool,
}

/// Non-fatal problems met while building. Affected dependencies are skipped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BuildWarning {
    InvalidName {
        origin: NodeId,
        name: String,
    },
    UnresolvedName {
        origin: NodeId,
        name: String,
    },
    AmbiguousName {
        origin: NodeId,
        name: String,
        candidates: usize,
    },
    SelfLoop {
        id: NodeId,
    },
    EndpointKindMismatch {
        src: NodeId,
        dst: NodeId,
        kind: EdgeKind,
    },
    DanglingEndpoint {
        src: NodeId,
        dst: NodeId,
        kind: EdgeKind,
        missing: NodeId,
    },
    KindConflict {
        id: NodeId,
        kept: ArtifactClass,
        rejected: ArtifactClass,
        kind: EdgeKind,
    },
    SourceConflict {
        src: NodeId,
        dst: NodeId,
        kind: EdgeKind,
        source: EvidenceSource,
        kept: EvidenceSource,
    },
    SourceDisagreement {
        origin: NodeId,
        kind: EdgeKind,
    },
}

impl fmt::Display for BuildWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use BuildWarning::*;
        match self {
            InvalidName { origin, name } => write!(f, "{origin}: invalid artifact name {name:?}"),
            UnresolvedName { origin, name } => write!(f, "{origin}: no artifact named {name:?}, dependency dropped"),
            AmbiguousName {
                origin,
                name,
                candidates,
            } => {
                write!(
                    f,
                    "{origin}: name {name:?} matches {candidates} artifacts, dependency dropped"
                )
            }
            SelfLoop { id } => write!(f, "{id}: card cites itself, ignored"),
            EndpointKindMismatch { src, dst, kind } => {
                write!(f, "{kind} edge {src} -> {dst} does not fit the endpoint kinds, dropped")
            }
            DanglingEndpoint {
                src,
                dst,
                kind,
                missing,
            } => {
                write!(f, "{kind} edge {src} -> {dst} names unrecorded {missing}, dropped")
            }
            KindConflict {
                id,
                kept,
                rejected,
                kind,
            } => write!(
                f,
                "{id} already classified as {kept:?}; {kind} edge would need {rejected:?}, dropped"
            ),
            SourceConflict {
                src,
                dst,
                kind,
                source,
                kept,
            } => write!(
                f,
                "{src} -> {dst}: {kind} from {} overridden by {}",
                source.token(),
                kept.token()
            ),
            SourceDisagreement { origin, kind } => write!(
                f,
                "{origin}: structured {kind} parents differ from cross-reference parents, keeping both"
            ),
        }
    }
}

/// Extraction results for every card of a snapshot, plus the provenance of
/// the last materialized graph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Evidence {
    records: BTreeMap<NodeId, RecordSummary>,
    deps: BTreeMap<NodeId, Vec<RawDependency>>,
    options: BuildOptions,
    provenance: BTreeMap<Edge, Vec<ExtractedDependency>>,
    warnings: Vec<BuildWarning>,
}

impl Evidence {
    pub fn new(options: BuildOptions) -> Self {
        Evidence {
            options,
            ..Self::default()
        }
    }

    /// Reassembles evidence from stored parts. Dependencies whose origin has
    /// no summary are discarded.
    pub fn from_parts(
        options: BuildOptions,
        records: impl IntoIterator<Item = RecordSummary>,
        deps: impl IntoIterator<Item = RawDependency>,
    ) -> Self {
        let mut ev = Evidence::new(options);
        for r in records {
            ev.deps.entry(r.id.clone()).or_default();
            ev.records.insert(r.id.clone(), r);
        }
        for d in deps {
            if let Some(list) = ev.deps.get_mut(&d.origin) {
                list.push(d);
            }
        }
        for list in ev.deps.values_mut() {
            list.sort();
            list.dedup();
        }
        ev
    }

    pub fn options(&self) -> &BuildOptions {
        &self.options
    }

    pub fn records(&self) -> impl Iterator<Item = &RecordSummary> {
        self.records.values()
    }

    pub fn record(&self, id: &str) -> Option<&RecordSummary> {
        self.records.get(id)
    }

    pub fn record_count(&self) -> usize {
        self.records.len()
    }

    pub fn raw_dependencies(&self) -> impl Iterator<Item = &RawDependency> {
        self.deps.values().flatten()
    }

    /// Everything that justified `edge` in the last build.
    pub fn provenance(&self, edge: &Edge) -> &[ExtractedDependency] {
        self.provenance.get(edge).map_or(&[], Vec::as_slice)
    }

    pub fn provenance_map(&self) -> &BTreeMap<Edge, Vec<ExtractedDependency>> {
        &self.provenance
    }

    pub fn warnings(&self) -> &[BuildWarning] {
        &self.warnings
    }

    /// Adds or replaces a card.
    pub fn upsert(&mut self, record: &SnapshotRecord) {
        let (summary, deps) = extract_record(record, &self.options.rules);
        self.insert_extracted(summary, deps);
    }

    pub fn insert_extracted(&mut self, summary: RecordSummary, deps: Vec<RawDependency>) {
        self.deps.insert(summary.id.clone(), deps);
        self.records.insert(summary.id.clone(), summary);
    }

    pub fn remove(&mut self, id: &str) -> bool {
        self.deps.remove(id);
        self.records.remove(id).is_some()
    }
}

/// Pass one for a single card. Dependencies come out sorted, strongest source first.
pub fn extract_record(record: &SnapshotRecord, rules: &TextRules) -> (RecordSummary, Vec<RawDependency>) {
    let origin = &record.id;
    let mut deps = Vec::new();
    let mut push = |counterpart: &str, kind: EdgeKind, source: EvidenceSource, origin_is_src: bool| {
        deps.push(RawDependency {
            origin: origin.clone(),
            counterpart: String::from(counterpart),
            kind,
            source,
            origin_is_src,
        });
    };
    let structured = EvidenceSource::StructuredField;
    let base_kind = record.relation.map_or(EdgeKind::FineTune, Relation::edge_kind);
    for p in &record.base_model {
        push(p.as_str(), base_kind, structured, false);
    }
    for d in &record.datasets {
        push(d.as_str(), EdgeKind::TrainedOn, structured, false);
    }
    for m in &record.trained_models {
        push(m.as_str(), EdgeKind::TrainedOn, structured, true);
    }
    for x in &record.subset_of {
        push(x.as_str(), EdgeKind::Subset, structured, true);
    }
    for x in &record.modified_from {
        push(x.as_str(), EdgeKind::ModifiedVersion, structured, false);
    }
    for x in &record.derived_from {
        push(x.as_str(), EdgeKind::DerivedDataset, structured, false);
    }
    let mentions: Vec<Mention> = record
        .xref_urls
        .iter()
        .filter_map(|u| extract_cross_reference(u))
        .chain(extract_with_rules(rules, &record.description))
        .collect();
    for m in &mentions {
        push(&m.name, m.kind, m.source, m.subject_is_src());
    }
    deps.sort();
    deps.dedup();
    let summary = RecordSummary {
        id: record.id.clone(),
        record_type: record.record_type,
        relation: record.relation,
        first_seen: record.first_seen,
        metadata_present: record.has_metadata(),
    };
    (summary, deps)
}

pub fn build_graph(snapshot: &Snapshot) -> Result<SupplyChainGraph, IngestError> {
    build_graph_with(snapshot, &BuildOptions::default())
}

pub fn build_graph_with(snapshot: &Snapshot, options: &BuildOptions) -> Result<SupplyChainGraph, IngestError> {
    if snapshot.is_empty() {
        return Err(IngestError::EmptySnapshot);
    }
    let mut evidence = Evidence::new(options.clone());
    for record in snapshot.records.values() {
        evidence.upsert(record);
    }
    Ok(materialize(evidence, snapshot.date))
}

struct Candidate {
    src: NodeId,
    dst: NodeId,
    kind: EdgeKind,
    source: EvidenceSource,
    origin: NodeId,
}

/// Pass two: turns evidence into a frozen graph that keeps the evidence.
pub fn materialize(mut evidence: Evidence, date: Option<Date>) -> SupplyChainGraph {
    let mut warnings = Vec::new();
    let candidates = resolve(&evidence, &mut warnings);
    let candidates = apply_source_precedence(candidates, &mut warnings);
    note_disagreements(&candidates, &mut warnings);
    let (accepted, stub_class) = check_endpoints(&evidence, candidates, &mut warnings);

    let mut edges: BTreeMap<Edge, Vec<ExtractedDependency>> = BTreeMap::new();
    for c in accepted {
        let dep = ExtractedDependency {
            parent: c.src.clone(),
            child: c.dst.clone(),
            kind: c.kind,
            source: c.source,
        };
        let list = edges.entry(Edge::new(c.src, c.dst, c.kind)).or_default();
        if !list.contains(&dep) {
            list.push(dep);
        }
    }

    let mut incoming: BTreeMap<&NodeId, Vec<EdgeKind>> = BTreeMap::new();
    for e in edges.keys() {
        if e.kind.is_model_model() {
            incoming.entry(&e.dst).or_default().push(e.kind);
        }
    }
    let no_edges: Vec<EdgeKind> = Vec::new();
    let mut nodes: BTreeMap<&NodeId, Node> = BTreeMap::new();
    for (id, r) in &evidence.records {
        let inc = incoming.get(id).unwrap_or(&no_edges);
        let kind = classify(r.record_type, r.relation, inc.iter().copied());
        nodes.insert(
            id,
            Node {
                id: id.clone(),
                kind,
                first_seen: r.first_seen,
                metadata_present: r.metadata_present,
            },
        );
    }
    for (id, class) in &stub_class {
        let record_type = match class {
            ArtifactClass::Dataset => RecordType::Dataset,
            ArtifactClass::Model => RecordType::Model,
        };
        let inc = incoming.get(id).unwrap_or(&no_edges);
        let kind = classify(record_type, None, inc.iter().copied());
        nodes.insert(id, Node::stub(id.clone(), kind));
    }
    let nodes: Vec<Node> = nodes.into_values().collect();
    let edge_list: Vec<(NodeId, NodeId, EdgeKind)> =
        edges.keys().map(|e| (e.src.clone(), e.dst.clone(), e.kind)).collect();
    let mut graph = SupplyChainGraph::from_sorted_parts(nodes, &edge_list, date);
    evidence.provenance = edges;
    evidence.warnings = warnings;
    graph.evidence = Some(evidence);
    graph
}

fn resolve(evidence: &Evidence, warnings: &mut Vec<BuildWarning>) -> Vec<Candidate> {
    let mut by_display: BTreeMap<&str, Vec<&NodeId>> = BTreeMap::new();
    if evidence
        .raw_dependencies()
        .any(|d| d.source == EvidenceSource::TextPattern)
    {
        for id in evidence.records.keys() {
            by_display.entry(id.display_name()).or_default().push(id);
        }
    }
    let mut out = Vec::new();
    for (origin, deps) in &evidence.deps {
        for d in deps {
            let other = if d.source == EvidenceSource::TextPattern {
                if let Some((id, _)) = evidence.records.get_key_value(d.counterpart.as_str()) {
                    id.clone()
                } else {
                    match by_display.get(d.counterpart.as_str()).map(Vec::as_slice) {
                        Some([only]) => (*only).clone(),
                        Some(many) if many.len() > 1 => {
                            warnings.push(BuildWarning::AmbiguousName {
                                origin: origin.clone(),
                                name: d.counterpart.clone(),
                                candidates: many.len(),
                            });
                            continue;
                        }
                        _ => {
                            warnings.push(BuildWarning::UnresolvedName {
                                origin: origin.clone(),
                                name: d.counterpart.clone(),
                            });
                            continue;
                        }
                    }
                }
            } else {
                match NodeId::new(&d.counterpart) {
                    Ok(id) => id,
                    Err(_) => {
                        warnings.push(BuildWarning::InvalidName {
                            origin: origin.clone(),
                            name: d.counterpart.clone(),
                        });
                        continue;
                    }
                }
            };
            if &other == origin {
                warnings.push(BuildWarning::SelfLoop { id: origin.clone() });
                continue;
            }
            let (src, dst) = if d.origin_is_src {
                (origin.clone(), other)
            } else {
                (other, origin.clone())
            };
            out.push(Candidate {
                src,
                dst,
                kind: d.kind,
                source: d.source,
                origin: origin.clone(),
            });
        }
    }
    out
}

/// For each endpoint pair, only kinds asserted by the strongest source present survive.
fn apply_source_precedence(mut cands: Vec<Candidate>, warnings: &mut Vec<BuildWarning>) -> Vec<Candidate> {
    cands.sort_by(|a, b| {
        (&a.src, &a.dst, a.source, a.kind, &a.origin).cmp(&(&b.src, &b.dst, b.source, b.kind, &b.origin))
    });
    let mut out = Vec::with_capacity(cands.len());
    let mut group: Vec<Candidate> = Vec::new();
    let mut rest = cands.into_iter().peekable();
    while let Some(first) = rest.next() {
        group.push(first);
        while let Some(c) = rest.next_if(|c| c.src == group[0].src && c.dst == group[0].dst) {
            group.push(c);
        }
        let best = group[0].source;
        let allowed: BTreeSet<EdgeKind> = group.iter().filter(|c| c.source == best).map(|c| c.kind).collect();
        for c in group.drain(..) {
            if allowed.contains(&c.kind) {
                out.push(c);
            } else {
                warnings.push(BuildWarning::SourceConflict {
                    src: c.src,
                    dst: c.dst,
                    kind: c.kind,
                    source: c.source,
                    kept: best,
                });
            }
        }
    }
    out
}

/// Structured and cross-reference parents of one card for one relation.
type ParentSets<'a> = (BTreeSet<&'a NodeId>, BTreeSet<&'a NodeId>);

fn note_disagreements(cands: &[Candidate], warnings: &mut Vec<BuildWarning>) {
    let mut parents: BTreeMap<(&NodeId, EdgeKind), ParentSets> = BTreeMap::new();
    for c in cands {
        if !c.kind.is_model_model() || c.origin != c.dst {
            continue;
        }
        let entry = parents.entry((&c.origin, c.kind)).or_default();
        match c.source {
            EvidenceSource::StructuredField => {
                entry.0.insert(&c.src);
            }
            EvidenceSource::CrossReferenceUrl => {
                entry.1.insert(&c.src);
            }
            EvidenceSource::TextPattern => {}
        }
    }
    for ((origin, kind), (structured, xref)) in parents {
        if !structured.is_empty() && !xref.is_empty() && structured != xref {
            warnings.push(BuildWarning::SourceDisagreement {
                origin: origin.clone(),
                kind,
            });
        }
    }
}

/// Checks endpoint classes and assigns stub classes, first evidence wins.
/// Candidates are visited by (origin, source, src, dst, kind).
fn check_endpoints(
    evidence: &Evidence,
    mut cands: Vec<Candidate>,
    warnings: &mut Vec<BuildWarning>,
) -> (Vec<Candidate>, BTreeMap<NodeId, ArtifactClass>) {
    cands.sort_by(|a, b| {
        (&a.origin, a.source, &a.src, &a.dst, a.kind).cmp(&(&b.origin, b.source, &b.src, &b.dst, b.kind))
    });
    let mut stub_class: BTreeMap<NodeId, ArtifactClass> = BTreeMap::new();
    let mut accepted = Vec::with_capacity(cands.len());
    'next: for c in cands {
        let (want_src, want_dst) = c.kind.endpoint_classes();
        let mut new_stubs: [Option<(&NodeId, ArtifactClass)>; 2] = [None, None];
        for (slot, (id, want)) in [(&c.src, want_src), (&c.dst, want_dst)].into_iter().enumerate() {
            if let Some(r) = evidence.records.get(id) {
                let have = match r.record_type {
                    RecordType::Model => ArtifactClass::Model,
                    RecordType::Dataset => ArtifactClass::Dataset,
                };
                if have != want {
                    warnings.push(BuildWarning::EndpointKindMismatch {
                        src: c.src.clone(),
                        dst: c.dst.clone(),
                        kind: c.kind,
                    });
                    continue 'next;
                }
            } else if evidence.options.stubs == StubPolicy::Reject {
                warnings.push(BuildWarning::DanglingEndpoint {
                    src: c.src.clone(),
                    dst: c.dst.clone(),
                    kind: c.kind,
                    missing: id.clone(),
                });
                continue 'next;
            } else if let Some(&have) = stub_class.get(id) {
                if have != want {
                    warnings.push(BuildWarning::KindConflict {
                        id: id.clone(),
                        kept: have,
                        rejected: want,
                        kind: c.kind,
                    });
                    continue 'next;
                }
            } else {
                new_stubs[slot] = Some((id, want));
            }
        }
        for (id, class) in new_stubs.into_iter().flatten() {
            stub_class.insert(id.clone(), class);
        }
        accepted.push(c);
    }
    (accepted, stub_class)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ids::NodeKind;

    fn id(s: &str) -> NodeId {
        NodeId::new(s).unwrap()
    }

    #[test]
    fn empty_snapshot_is_an_error() {
        assert_eq!(build_graph(&Snapshot::default()), Err(IngestError::EmptySnapshot));
    }

    #[test]
    fn absent_base_becomes_stub() {
        let mut r = SnapshotRecord::model(id("me/ft"));
        r.base_model.push(id("ghost/x"));
        let g = build_graph(&[r].into_iter().collect()).unwrap();
        let ghost = g.node("ghost/x").unwrap();
        assert!(!ghost.metadata_present);
        assert_eq!(ghost.kind, NodeKind::BaseModel);
        assert_eq!(g.node("me/ft").unwrap().kind, NodeKind::FineTune);
    }

    #[test]
    fn text_repeating_structured_field_is_one_edge() {
        let mut base = SnapshotRecord::model(id("meta/llama"));
        base.description = "A base model.".into();
        let mut r = SnapshotRecord::model(id("me/ft"));
        r.base_model.push(id("meta/llama"));
        r.description = "This is fine-tuned from meta/llama.".into();
        let g = build_graph(&[base, r].into_iter().collect()).unwrap();
        assert_eq!(g.edge_count(), 1);
        let e = Edge::new(id("meta/llama"), id("me/ft"), EdgeKind::FineTune);
        let prov = g.evidence().unwrap().provenance(&e);
        assert_eq!(prov.len(), 2);
        assert_eq!(prov[0].source, EvidenceSource::StructuredField);
    }

    #[test]
    fn stub_policy_reject_drops_edges() {
        let mut r = SnapshotRecord::model(id("me/ft"));
        r.base_model.push(id("ghost/x"));
        let opts = BuildOptions {
            stubs: StubPolicy::Reject,
            ..BuildOptions::default()
        };
        let g = build_graph_with(&[r].into_iter().collect(), &opts).unwrap();
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.edge_count(), 0);
        assert!(matches!(
            g.evidence().unwrap().warnings()[0],
            BuildWarning::DanglingEndpoint { .. }
        ));
        assert_eq!(g.node("me/ft").unwrap().kind, NodeKind::BaseModel);
    }

    #[test]
    fn structured_beats_text_for_same_pair() {
        let mut base = SnapshotRecord::model(id("org/base"));
        base.description = "x".into();
        let mut r = SnapshotRecord::model(id("org/child"));
        r.base_model.push(id("org/base"));
        r.relation = Some(Relation::Adapter);
        r.description = "Quantized version of org/base.".into();
        let g = build_graph(&[base, r].into_iter().collect()).unwrap();
        let edges: Vec<Edge> = g.edges().collect();
        assert_eq!(
            edges,
            alloc::vec![Edge::new(id("org/base"), id("org/child"), EdgeKind::Adapter)]
        );
        assert_eq!(g.node("org/child").unwrap().kind, NodeKind::Adapter);
    }

    #[test]
    fn ambiguous_display_names_are_dropped() {
        let a = SnapshotRecord::model(id("a/bert"));
        let b = SnapshotRecord::model(id("b/bert"));
        let mut c = SnapshotRecord::model(id("c/tuned"));
        c.description = "fine-tuned from bert.".into();
        let mut d = SnapshotRecord::model(id("d/tuned"));
        d.description = "fine-tuned from tuned-base".into();
        let e = SnapshotRecord::model(id("e/tuned-base"));
        let g = build_graph(&[a, b, c, d, e].into_iter().collect()).unwrap();
        assert_eq!(g.edges().count(), 1);
        assert!(g
            .evidence()
            .unwrap()
            .warnings()
            .iter()
            .any(|w| matches!(w, BuildWarning::AmbiguousName { candidates: 2, .. })));
    }

    #[test]
    fn self_citation_is_ignored() {
        let mut r = SnapshotRecord::model(id("a/m"));
        r.base_model.push(id("a/m"));
        let g = build_graph(&[r].into_iter().collect()).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert_eq!(
            g.evidence().unwrap().warnings(),
            &[BuildWarning::SelfLoop { id: id("a/m") }]
        );
    }

    #[test]
    fn stub_class_first_evidence_wins() {
        // "x" is named as a training dataset by a/m and as a base model by b/m.
        let mut a = SnapshotRecord::model(id("a/m"));
        a.datasets.push(id("x"));
        let mut b = SnapshotRecord::model(id("b/m"));
        b.base_model.push(id("x"));
        let g = build_graph(&[a, b].into_iter().collect()).unwrap();
        assert_eq!(g.node("x").unwrap().kind, NodeKind::Dataset);
        assert_eq!(g.edge_count(), 1);
        assert!(g
            .evidence()
            .unwrap()
            .warnings()
            .iter()
            .any(|w| matches!(w, BuildWarning::KindConflict { .. })));
    }
}
