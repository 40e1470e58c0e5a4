//! Seeded synthetic graphs and snapshots for tests and benchmarks.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::graph::{Edge, GraphBuilder, Node, StubPolicy, SupplyChainGraph};
use crate::ids::{ArtifactClass, EdgeKind, NodeId, NodeKind, Relation};
use crate::ingest::{Snapshot, SnapshotRecord};
use crate::Date;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn below(rng: &mut impl RngCore, n: usize) -> usize {
    (rng.next_u64() % n as u64) as usize
}

fn chance(rng: &mut impl RngCore, p: f64) -> bool {
    ((rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64) < p
}

fn pick<'a, T>(rng: &mut impl RngCore, items: &'a [T]) -> &'a T {
    &items[below(rng, items.len())]
}

fn id(s: &str) -> NodeId {
    NodeId::new(s).expect("synthetic ids are valid")
}

/// A small graph with 1..=`max_nodes` nodes of mixed kinds and random
/// well-typed edges. Model-model cycles occur freely.
pub fn random_graph(rng: &mut impl RngCore, max_nodes: usize) -> SupplyChainGraph {
    let n = 1 + below(rng, max_nodes.max(1));
    let mut b = GraphBuilder::with_stub_policy(StubPolicy::Reject);
    let mut kinds = Vec::with_capacity(n);
    for i in 0..n {
        let kind = *pick(rng, NodeKind::ALL);
        kinds.push(kind);
        b.add_node(Node::new(id(&format!("n{i:02}")), kind)).expect("fresh id");
    }
    let attempts = below(rng, 2 * n + 1);
    for _ in 0..attempts {
        let (s, d) = (below(rng, n), below(rng, n));
        if s == d {
            continue;
        }
        let kind = match (kinds[s].class(), kinds[d].class()) {
            (ArtifactClass::Model, ArtifactClass::Model) => *pick(
                rng,
                &[
                    EdgeKind::FineTune,
                    EdgeKind::Adapter,
                    EdgeKind::Quantization,
                    EdgeKind::Merge,
                ],
            ),
            (ArtifactClass::Dataset, ArtifactClass::Model) => EdgeKind::TrainedOn,
            (ArtifactClass::Dataset, ArtifactClass::Dataset) => *pick(
                rng,
                &[EdgeKind::Subset, EdgeKind::ModifiedVersion, EdgeKind::DerivedDataset],
            ),
            (ArtifactClass::Model, ArtifactClass::Dataset) => continue,
        };
        let e = Edge::new(id(&format!("n{s:02}")), id(&format!("n{d:02}")), kind);
        b.add_edge(e).expect("well-typed edge between existing nodes");
    }
    b.freeze()
}

const MODELS: &[&str] = &[
    "org/m0", "org/m1", "org/m2", "org/m3", "lab/m4", "lab/m5", "lab/m6", "lab/m7",
];
const DATASETS: &[&str] = &["data/d0", "data/d1", "data/d2", "data/d3", "data/d4", "data/d5"];
const GHOST_MODEL: &str = "ghost/m9";
const GHOST_DATASET: &str = "ghost/d9";

fn some_model(rng: &mut impl RngCore) -> &'static str {
    if chance(rng, 0.1) {
        GHOST_MODEL
    } else {
        pick(rng, MODELS)
    }
}

fn some_dataset(rng: &mut impl RngCore) -> &'static str {
    if chance(rng, 0.1) {
        GHOST_DATASET
    } else {
        pick(rng, DATASETS)
    }
}

fn names(r: &mut ChaCha8Rng, max: usize, f: fn(&mut ChaCha8Rng) -> &'static str) -> Vec<NodeId> {
    (0..below(r, max + 1)).map(|_| id(f(r))).collect()
}

fn random_record(r: &mut ChaCha8Rng, name: &str, is_model: bool) -> SnapshotRecord {
    let mut rec = if is_model {
        SnapshotRecord::model(id(name))
    } else {
        SnapshotRecord::dataset(id(name))
    };
    if is_model {
        rec.base_model = names(r, 2, some_model);
        if chance(r, 0.5) {
            rec.relation = Some(*pick(
                r,
                &[
                    Relation::FineTune,
                    Relation::Adapter,
                    Relation::Quantization,
                    Relation::Merge,
                ],
            ));
        }
        rec.datasets = names(r, 2, some_dataset);
        rec.description = match below(r, 6) {
            0 => format!("Fine-tuned from {}.", short(some_model(r))),
            1 => format!("This model was trained on {}.", some_dataset(r)),
            2 => format!("A merge of {} and {}", some_model(r), some_model(r)),
            3 => format!("Quantized version of {}", some_model(r)),
            _ => String::new(),
        };
        if chance(r, 0.3) {
            let rel = pick(r, &["finetune", "adapter", "quantization", "merge"]);
            rec.xref_urls.push(format!(
                "https://huggingface.co/models?other=base_model:{rel}:{}",
                some_model(r)
            ));
        }
    } else {
        rec.trained_models = names(r, 1, some_model);
        rec.subset_of = names(r, 1, some_dataset);
        rec.modified_from = names(r, 1, some_dataset);
        rec.derived_from = names(r, 1, some_dataset);
        if chance(r, 0.3) {
            rec.description = format!("Subset of {}.", short(some_dataset(r)));
        }
    }
    if chance(r, 0.5) {
        rec.first_seen = Date::from_ymd_opt(2024, 1 + below(r, 12) as u32, 1 + below(r, 28) as u32);
    }
    rec
}

fn short(name: &str) -> &str {
    name.rsplit('/').next().unwrap_or(name)
}

/// Two consecutive dated snapshots over a small shared id pool, with
/// additions, deletions, in-place changes and references to unrecorded ids.
pub fn random_snapshot_pair(seed: u64) -> (Snapshot, Snapshot) {
    let mut r = rng(seed);
    let d0 = Date::from_ymd_opt(2024, 10, 1).expect("valid date");
    let d1 = d0.succ_opt().expect("valid date");
    let (mut s0, mut s1) = (Snapshot::new(Some(d0)), Snapshot::new(Some(d1)));
    let pool: Vec<(&str, bool)> = MODELS
        .iter()
        .map(|m| (*m, true))
        .chain(DATASETS.iter().map(|d| (*d, false)))
        .collect();
    for &(name, is_model) in &pool {
        if chance(&mut r, 0.7) {
            let rec = random_record(&mut r, name, is_model);
            s0.insert(rec.clone());
            if chance(&mut r, 0.2) {
                continue;
            }
            if chance(&mut r, 0.3) {
                s1.insert(random_record(&mut r, name, is_model));
            } else {
                s1.insert(rec);
            }
        } else if chance(&mut r, 0.4) {
            s1.insert(random_record(&mut r, name, is_model));
        }
    }
    for s in [&mut s0, &mut s1] {
        if s.is_empty() {
            s.insert(SnapshotRecord::model(id(MODELS[0])));
        }
    }
    (s0, s1)
}

/// A snapshot of `nodes` cards declaring `edges` distinct dependencies.
/// Parents are drawn with a strong bias towards early ids, which gives the
/// heavy-tailed out-degree seen on real hubs. Every sixth card is a dataset.
/// About a third of the cards declare nothing, so late ones stay isolated,
/// and a few model pairs cite each other to form cycles.
pub fn heavy_tailed_snapshot(nodes: usize, edges: usize, seed: u64) -> Snapshot {
    let mut r = rng(seed);
    let silent: Vec<bool> = (0..nodes).map(|_| chance(&mut r, 0.35)).collect();
    let is_dataset = |i: usize| i.is_multiple_of(6);
    let name = |i: usize| {
        if is_dataset(i) {
            format!("data{}/set-{i}", i % 97)
        } else {
            format!("org{}/model-{i}", i % 389)
        }
    };
    let mut records: Vec<SnapshotRecord> = (0..nodes)
        .map(|i| {
            if is_dataset(i) {
                SnapshotRecord::dataset(id(&name(i)))
            } else {
                SnapshotRecord::model(id(&name(i)))
            }
        })
        .collect();
    let models: Vec<usize> = (0..nodes).filter(|&i| !is_dataset(i)).collect();
    let datasets: Vec<usize> = (0..nodes).filter(|&i| is_dataset(i)).collect();
    // Earlier ids are favoured: u^3 concentrates mass near zero.
    let skewed = |r: &mut ChaCha8Rng, below_n: usize| {
        let u = (r.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        ((below_n as f64) * u * u * u) as usize
    };
    let mut made = 0;
    let mut round = 0;
    while made < edges && nodes > 1 && round < 64 {
        for i in 1..nodes {
            if made >= edges {
                break;
            }
            if silent[i] || (round > 0 && !chance(&mut r, 0.2)) {
                continue;
            }
            let rec = &mut records[i];
            if is_dataset(i) {
                let pos = datasets.partition_point(|&d| d < i);
                if pos == 0 {
                    continue;
                }
                let parent = id(&name(datasets[skewed(&mut r, pos)]));
                if !rec.derived_from.contains(&parent) {
                    rec.derived_from.push(parent);
                    made += 1;
                }
            } else {
                let pos = models.partition_point(|&m| m < i);
                let untouched = rec.base_model.is_empty() && rec.datasets.is_empty();
                let want_dataset = pos == 0 || chance(&mut r, if untouched { 0.08 } else { 0.5 });
                if want_dataset {
                    let dpos = datasets.partition_point(|&d| d < i);
                    if dpos == 0 {
                        continue;
                    }
                    let ds = id(&name(datasets[skewed(&mut r, dpos)]));
                    if !rec.datasets.contains(&ds) {
                        rec.datasets.push(ds);
                        made += 1;
                    }
                } else {
                    let p = models[skewed(&mut r, pos)];
                    let parent = id(&name(p));
                    if !rec.base_model.contains(&parent) {
                        if made + 1 < edges && !silent[p] && chance(&mut r, 0.002) {
                            let child = rec.id.clone();
                            let back = &mut records[p].base_model;
                            if !back.contains(&child) {
                                back.push(child);
                                made += 1;
                            }
                        }
                        let rec = &mut records[i];
                        if rec.base_model.is_empty() {
                            rec.relation = Some(*pick(
                                &mut r,
                                &[
                                    Relation::FineTune,
                                    Relation::Adapter,
                                    Relation::Quantization,
                                    Relation::Merge,
                                ],
                            ));
                        }
                        rec.base_model.push(parent);
                        made += 1;
                    }
                }
            }
        }
        round += 1;
    }
    let mut snapshot = Snapshot::new(Date::from_ymd_opt(2024, 11, 1));
    for rec in records {
        snapshot.insert(rec);
    }
    snapshot
}
