//! Graph directories.
//!
//! A graph directory always holds `nodes.csv`, `edges.csv` and
//! `manifest.json`. Graphs built from snapshots also keep their extraction
//! evidence (`records.csv`, `dependencies.csv`) so that deltas can be applied
//! later, plus `provenance.csv` for inspection. All files are sorted, LF
//! terminated and written atomically, so exporting the same graph twice
//! gives identical bytes.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use supplygraph_core::ingest::{
    materialize, BuildOptions, EvidenceSource, RawDependency, RecordSummary, RecordType, TextRule, TextRules,
};
use supplygraph_core::{
    Date, Edge, EdgeKind, GraphBuilder, Node, NodeId, NodeKind, Relation, StubPolicy, SupplyChainGraph,
};

use crate::error::{Error, Result};
use crate::fsutil::{atomic_write, read_to_string};

pub const NODES_FILE: &str = "nodes.csv";
pub const EDGES_FILE: &str = "edges.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const RECORDS_FILE: &str = "records.csv";
pub const DEPENDENCIES_FILE: &str = "dependencies.csv";
pub const PROVENANCE_FILE: &str = "provenance.csv";

const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleJson {
    pub phrase: String,
    pub kind: EdgeKind,
    #[serde(default)]
    pub list: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: u32,
    pub snapshot_date: Option<Date>,
    pub node_count: usize,
    pub edge_count: usize,
    /// Whether the evidence files are present.
    pub evidence: bool,
    pub stub_policy: String,
    pub text_rules: Vec<RuleJson>,
    pub max_tokens: usize,
}

pub fn stub_policy_token(p: StubPolicy) -> &'static str {
    match p {
        StubPolicy::Create => "create",
        StubPolicy::Reject => "reject",
    }
}

pub fn parse_stub_policy(s: &str) -> Option<StubPolicy> {
    match s {
        "create" => Some(StubPolicy::Create),
        "reject" => Some(StubPolicy::Reject),
        _ => None,
    }
}

pub fn rules_to_json(rules: &TextRules) -> Vec<RuleJson> {
    rules
        .rules
        .iter()
        .map(|r| RuleJson {
            phrase: r.phrase.clone(),
            kind: r.kind,
            list: r.list,
        })
        .collect()
}

pub fn rules_from_json(rules: &[RuleJson], max_tokens: usize) -> TextRules {
    TextRules {
        rules: rules.iter().map(|r| TextRule::new(&r.phrase, r.kind, r.list)).collect(),
        max_tokens,
    }
}

fn manifest_of(graph: &SupplyChainGraph) -> Manifest {
    let options = graph.evidence().map(|e| e.options().clone()).unwrap_or_default();
    Manifest {
        format: FORMAT_VERSION,
        snapshot_date: graph.snapshot_date(),
        node_count: graph.node_count(),
        edge_count: graph.edge_count(),
        evidence: graph.evidence().is_some(),
        stub_policy: stub_policy_token(options.stubs).to_string(),
        text_rules: rules_to_json(&options.rules),
        max_tokens: options.rules.max_tokens,
    }
}

fn csv_bytes<'a, I, R>(header: &[&str], rows: I) -> Vec<u8>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = &'a str>,
{
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// CSV writer shared by every export: RFC 4180 quoting, LF line ends.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let bytes = csv_bytes(header, rows.iter().map(|r| r.iter().map(String::as_str)));
    atomic_write(path, &bytes)
}

fn bool_token(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

pub fn nodes_csv(graph: &SupplyChainGraph) -> Vec<u8> {
    let rows: Vec<[String; 4]> = graph
        .nodes()
        .iter()
        .map(|n| {
            [
                n.id.to_string(),
                n.kind.token().to_string(),
                n.first_seen.map(|d| d.to_string()).unwrap_or_default(),
                bool_token(n.metadata_present).to_string(),
            ]
        })
        .collect();
    csv_bytes(
        &["id", "kind", "first_seen", "metadata_present"],
        rows.iter().map(|r| r.iter().map(String::as_str)),
    )
}

pub fn edges_csv(graph: &SupplyChainGraph) -> Vec<u8> {
    let edges: Vec<Edge> = graph.edges().collect();
    csv_bytes(
        &["src", "dst", "kind"],
        edges.iter().map(|e| [e.src.as_str(), e.dst.as_str(), e.kind.token()]),
    )
}

/// Writes the graph directory, replacing evidence files left over from an
/// earlier graph when this one has none.
pub fn write_graph_dir(dir: &Path, graph: &SupplyChainGraph) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Write {
        path: dir.to_path_buf(),
        source,
    })?;
    atomic_write(&dir.join(NODES_FILE), &nodes_csv(graph))?;
    atomic_write(&dir.join(EDGES_FILE), &edges_csv(graph))?;
    match graph.evidence() {
        Some(ev) => {
            let records: Vec<[String; 5]> = ev
                .records()
                .map(|r| {
                    [
                        r.id.to_string(),
                        r.record_type.token().to_string(),
                        r.relation.map(|x| x.token().to_string()).unwrap_or_default(),
                        r.first_seen.map(|d| d.to_string()).unwrap_or_default(),
                        bool_token(r.metadata_present).to_string(),
                    ]
                })
                .collect();
            atomic_write(
                &dir.join(RECORDS_FILE),
                &csv_bytes(
                    &["id", "type", "relation", "first_seen", "metadata_present"],
                    records.iter().map(|r| r.iter().map(String::as_str)),
                ),
            )?;
            atomic_write(
                &dir.join(DEPENDENCIES_FILE),
                &csv_bytes(
                    &["origin", "counterpart", "kind", "source", "origin_is_src"],
                    ev.raw_dependencies().map(|d| {
                        [
                            d.origin.as_str(),
                            d.counterpart.as_str(),
                            d.kind.token(),
                            d.source.token(),
                            bool_token(d.origin_is_src),
                        ]
                    }),
                ),
            )?;
            let prov: Vec<[&str; 4]> = ev
                .provenance_map()
                .iter()
                .flat_map(|(e, list)| {
                    list.iter()
                        .map(move |d| [e.src.as_str(), e.dst.as_str(), e.kind.token(), d.source.token()])
                })
                .collect();
            atomic_write(
                &dir.join(PROVENANCE_FILE),
                &csv_bytes(&["src", "dst", "kind", "source"], prov),
            )?;
        }
        None => {
            for name in [RECORDS_FILE, DEPENDENCIES_FILE, PROVENANCE_FILE] {
                let p = dir.join(name);
                if p.exists() {
                    fs::remove_file(&p).map_err(|source| Error::Write { path: p, source })?;
                }
            }
        }
    }
    let mut manifest = serde_json::to_string_pretty(&manifest_of(graph)).expect("manifest serializes");
    manifest.push('\n');
    atomic_write(&dir.join(MANIFEST_FILE), manifest.as_bytes())
}

fn read_rows(path: &Path, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let text = read_to_string(path)?;
    let mut r = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let got = r.headers().map_err(|e| Error::format(path, e))?;
    if got.iter().ne(header.iter().copied()) {
        return Err(Error::format(path, format!("expected header `{}`", header.join(","))));
    }
    r.records().map(|rec| rec.map_err(|e| Error::format(path, e))).collect()
}

fn field<'a>(path: &Path, rec: &'a csv::StringRecord, i: usize) -> Result<&'a str> {
    rec.get(i)
        .ok_or_else(|| Error::format(path, format!("line {}: missing column {}", line_of(rec), i + 1)))
}

fn line_of(rec: &csv::StringRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}

fn parse_with<T>(
    path: &Path,
    rec: &csv::StringRecord,
    i: usize,
    what: &str,
    f: impl FnOnce(&str) -> Option<T>,
) -> Result<T> {
    let raw = field(path, rec, i)?;
    f(raw).ok_or_else(|| Error::format(path, format!("line {}: bad {what} `{raw}`", line_of(rec))))
}

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "true" => Some(true),
        "false" => Some(false),
        _ => None,
    }
}

fn parse_opt_date(s: &str) -> Option<Option<Date>> {
    if s.is_empty() {
        Some(None)
    } else {
        Date::parse_from_str(s, "%Y-%m-%d").ok().map(Some)
    }
}

fn parse_id(s: &str) -> Option<NodeId> {
    NodeId::new(s).ok()
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST_FILE);
    let m: Manifest = serde_json::from_str(&read_to_string(&path)?).map_err(|e| Error::format(&path, e))?;
    if m.format != FORMAT_VERSION {
        return Err(Error::format(&path, format!("unsupported format {}", m.format)));
    }
    Ok(m)
}

/// Loads only `nodes.csv` and `edges.csv`, checking every edge against the
/// node kinds.
pub fn load_structure(dir: &Path, date: Option<Date>) -> Result<SupplyChainGraph> {
    let mut b = GraphBuilder::with_stub_policy(StubPolicy::Reject);
    b.set_snapshot_date(date);
    let path = dir.join(NODES_FILE);
    for rec in read_rows(&path, &["id", "kind", "first_seen", "metadata_present"])? {
        let node = Node {
            id: parse_with(&path, &rec, 0, "id", parse_id)?,
            kind: parse_with(&path, &rec, 1, "kind", NodeKind::from_token)?,
            first_seen: parse_with(&path, &rec, 2, "date", parse_opt_date)?,
            metadata_present: parse_with(&path, &rec, 3, "flag", parse_bool)?,
        };
        if b.contains(node.id.as_str()) {
            return Err(Error::format(
                &path,
                format!("line {}: duplicate id `{}`", line_of(&rec), node.id),
            ));
        }
        b.add_node(node).map_err(|e| Error::format(&path, e))?;
    }
    let path = dir.join(EDGES_FILE);
    for rec in read_rows(&path, &["src", "dst", "kind"])? {
        let edge = Edge::new(
            parse_with(&path, &rec, 0, "id", parse_id)?,
            parse_with(&path, &rec, 1, "id", parse_id)?,
            parse_with(&path, &rec, 2, "kind", EdgeKind::from_token)?,
        );
        b.add_edge(edge)
            .map_err(|e| Error::format(&path, format!("line {}: {e}", line_of(&rec))))?;
    }
    Ok(b.freeze())
}

fn load_evidence_parts(dir: &Path) -> Result<(Vec<RecordSummary>, Vec<RawDependency>)> {
    let path = dir.join(RECORDS_FILE);
    let mut records = Vec::new();
    for rec in read_rows(&path, &["id", "type", "relation", "first_seen", "metadata_present"])? {
        records.push(RecordSummary {
            id: parse_with(&path, &rec, 0, "id", parse_id)?,
            record_type: parse_with(&path, &rec, 1, "type", RecordType::from_token)?,
            relation: parse_with(&path, &rec, 2, "relation", |s| {
                if s.is_empty() {
                    Some(None)
                } else {
                    Relation::from_token(s).map(Some)
                }
            })?,
            first_seen: parse_with(&path, &rec, 3, "date", parse_opt_date)?,
            metadata_present: parse_with(&path, &rec, 4, "flag", parse_bool)?,
        });
    }
    let path = dir.join(DEPENDENCIES_FILE);
    let mut deps = Vec::new();
    for rec in read_rows(&path, &["origin", "counterpart", "kind", "source", "origin_is_src"])? {
        deps.push(RawDependency {
            origin: parse_with(&path, &rec, 0, "id", parse_id)?,
            counterpart: field(&path, &rec, 1)?.to_string(),
            kind: parse_with(&path, &rec, 2, "kind", EdgeKind::from_token)?,
            source: parse_with(&path, &rec, 3, "source", EvidenceSource::from_token)?,
            origin_is_src: parse_with(&path, &rec, 4, "flag", parse_bool)?,
        });
    }
    Ok((records, deps))
}

/// Loads a graph directory. When evidence is present the graph is
/// re-materialized from it and must agree with `nodes.csv`/`edges.csv`.
pub fn load_graph_dir(dir: &Path) -> Result<SupplyChainGraph> {
    let manifest = read_manifest(dir)?;
    let structure = load_structure(dir, manifest.snapshot_date)?;
    let manifest_path = dir.join(MANIFEST_FILE);
    if structure.node_count() != manifest.node_count || structure.edge_count() != manifest.edge_count {
        return Err(Error::format(
            &manifest_path,
            "node or edge count does not match the CSV files",
        ));
    }
    if !manifest.evidence {
        return Ok(structure);
    }
    let stubs = parse_stub_policy(&manifest.stub_policy)
        .ok_or_else(|| Error::format(&manifest_path, format!("bad stub_policy `{}`", manifest.stub_policy)))?;
    let options = BuildOptions {
        stubs,
        rules: rules_from_json(&manifest.text_rules, manifest.max_tokens),
    };
    let (records, deps) = load_evidence_parts(dir)?;
    let ev = supplygraph_core::ingest::Evidence::from_parts(options, records, deps);
    let graph = materialize(ev, manifest.snapshot_date);
    if graph != structure {
        return Err(Error::format(
            dir,
            "evidence files do not reproduce nodes.csv/edges.csv",
        ));
    }
    Ok(graph)
}
