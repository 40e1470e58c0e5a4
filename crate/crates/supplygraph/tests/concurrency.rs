use std::sync::Arc;
use std::thread;

use supplygraph::graphio::{load_graph_dir, nodes_csv, write_graph_dir};
use supplygraph::par::build_graph_parallel;
use supplygraph::reportio::table_json;
use supplygraph_core::algo::{louvain, strongly_connected_components, weakly_connected_components, LouvainConfig};
use supplygraph_core::ingest::{build_graph, BuildOptions};
use supplygraph_core::report::{report_by_name, REPORT_NAMES};
use supplygraph_core::synth::heavy_tailed_snapshot;
use supplygraph_core::{forward_subgraph, SupplyChainGraph};

fn assert_send_sync<T: Send + Sync>() {}

#[test]
fn frozen_graph_is_shareable() {
    assert_send_sync::<SupplyChainGraph>();
}

#[test]
fn concurrent_readers_see_the_same_answers() {
    let snap = heavy_tailed_snapshot(2_000, 2_600, 9);
    let g = Arc::new(build_graph(&snap).unwrap());
    let reference: Vec<String> = REPORT_NAMES
        .iter()
        .map(|n| table_json(&report_by_name(&g, n, 10).unwrap()))
        .collect();
    let wcc = weakly_connected_components(&g);
    let scc = strongly_connected_components(&g);
    let origins: Vec<String> = g.nodes().iter().step_by(97).map(|n| n.id.to_string()).collect();
    let fwd: Vec<_> = origins.iter().map(|o| forward_subgraph(&g, o).unwrap()).collect();

    thread::scope(|s| {
        for _ in 0..8 {
            s.spawn(|| {
                let got: Vec<String> = REPORT_NAMES
                    .iter()
                    .map(|n| table_json(&report_by_name(&g, n, 10).unwrap()))
                    .collect();
                assert_eq!(got, reference);
                assert_eq!(weakly_connected_components(&g), wcc);
                assert_eq!(strongly_connected_components(&g), scc);
                for (o, want) in origins.iter().zip(&fwd) {
                    assert_eq!(&forward_subgraph(&g, o).unwrap(), want);
                }
            });
        }
    });
}

#[test]
fn louvain_is_reproducible_across_threads() {
    let g = build_graph(&heavy_tailed_snapshot(800, 1_000, 4)).unwrap();
    let cfg = LouvainConfig::default();
    let want = louvain(&g, &cfg);
    let got: Vec<_> = thread::scope(|s| {
        let hs: Vec<_> = (0..4).map(|_| s.spawn(|| louvain(&g, &cfg))).collect();
        hs.into_iter().map(|h| h.join().unwrap()).collect()
    });
    assert!(got.iter().all(|p| *p == want));
}

#[test]
fn parallel_ingestion_is_independent_of_worker_count() {
    let snap = heavy_tailed_snapshot(1_500, 2_000, 12);
    let opts = BuildOptions::default();
    let one = build_graph_parallel(&snap, &opts, 1).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_graph_dir(dir.path(), &one).unwrap();
    let bytes = std::fs::read(dir.path().join("edges.csv")).unwrap();
    for threads in [2, 5, 16] {
        let g = build_graph_parallel(&snap, &opts, threads).unwrap();
        assert_eq!(nodes_csv(&g), nodes_csv(&one));
        let d = tempfile::tempdir().unwrap();
        write_graph_dir(d.path(), &g).unwrap();
        assert_eq!(std::fs::read(d.path().join("edges.csv")).unwrap(), bytes);
    }
    assert_eq!(load_graph_dir(dir.path()).unwrap(), one);
}
