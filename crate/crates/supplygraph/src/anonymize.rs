//! Keyed-digest anonymization of node ids.
//!
//! Every id becomes the first 16 hex characters of HMAC-SHA256(salt, id).
//! Kinds, dates, metadata flags and edges are kept; extraction evidence is
//! dropped because it quotes the original names.

use std::collections::BTreeMap;
use std::path::Path;

use hmac::{Hmac, Mac};
use sha2::Sha256;
use supplygraph_core::{Edge, GraphBuilder, Node, NodeId, StubPolicy, SupplyChainGraph};

use crate::error::{Error, Result};
use crate::graphio::write_csv;

pub const SALT_ENV: &str = "SUPPLY_GRAPH_SALT";
pub const DIGEST_HEX_LEN: usize = 16;

pub fn digest(salt: &[u8], id: &str) -> String {
    let mut mac = Hmac::<Sha256>::new_from_slice(salt).expect("HMAC accepts any key length");
    mac.update(id.as_bytes());
    let mut hex = hex::encode(mac.finalize().into_bytes());
    hex.truncate(DIGEST_HEX_LEN);
    hex
}

pub struct Anonymized {
    pub graph: SupplyChainGraph,
    /// Original id to anonymized id, in original id order.
    pub mapping: BTreeMap<NodeId, NodeId>,
}

pub fn anonymize(graph: &SupplyChainGraph, salt: Option<&str>) -> Result<Anonymized> {
    let salt = salt.filter(|s| !s.is_empty()).ok_or(Error::SaltMissing)?;
    anonymize_with(graph, |id| digest(salt.as_bytes(), id))
}

/// Anonymizes with an arbitrary id mapping; fails on the first collision.
pub fn anonymize_with(graph: &SupplyChainGraph, mut f: impl FnMut(&str) -> String) -> Result<Anonymized> {
    let mut mapping = BTreeMap::new();
    let mut seen: BTreeMap<String, NodeId> = BTreeMap::new();
    for n in graph.nodes() {
        let d = f(n.id.as_str());
        if let Some(first) = seen.get(&d) {
            return Err(Error::CollisionDetected {
                first: first.clone(),
                second: n.id.clone(),
                digest: d,
            });
        }
        let new = NodeId::new(&d).map_err(|e| Error::Config(e.to_string()))?;
        seen.insert(d, n.id.clone());
        mapping.insert(n.id.clone(), new);
    }
    let mut b = GraphBuilder::with_stub_policy(StubPolicy::Reject);
    b.set_snapshot_date(graph.snapshot_date());
    for n in graph.nodes() {
        b.add_node(Node {
            id: mapping[&n.id].clone(),
            ..n.clone()
        })?;
    }
    for e in graph.edges() {
        b.add_edge(Edge::new(mapping[&e.src].clone(), mapping[&e.dst].clone(), e.kind))?;
    }
    Ok(Anonymized {
        graph: b.freeze(),
        mapping,
    })
}

/// `original,anonymized` rows, for the holder of the salt only.
pub fn write_mapping(path: &Path, mapping: &BTreeMap<NodeId, NodeId>) -> Result<()> {
    let rows: Vec<Vec<String>> = mapping
        .iter()
        .map(|(a, b)| vec![a.to_string(), b.to_string()])
        .collect();
    write_csv(path, &["original", "anonymized"], &rows)
}
