//! Bounded fan-out with results merged in input order.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::thread;

use supplygraph_core::ingest::{extract_record, materialize, BuildOptions, Evidence, Snapshot, SnapshotRecord};
use supplygraph_core::{IngestError, SupplyChainGraph};

/// Applies `f` to every item on at most `threads` workers. The output is in
/// input order whatever the scheduling.
pub fn parallel_map<T, R, F>(items: &[T], threads: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let threads = threads.max(1).min(items.len());
    if threads <= 1 {
        return items.iter().map(&f).collect();
    }
    let next = AtomicUsize::new(0);
    let mut parts: Vec<(usize, R)> = thread::scope(|s| {
        let workers: Vec<_> = (0..threads)
            .map(|_| {
                s.spawn(|| {
                    let mut out = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        let Some(item) = items.get(i) else { break };
                        out.push((i, f(item)));
                    }
                    out
                })
            })
            .collect();
        workers
            .into_iter()
            .flat_map(|w| w.join().expect("worker panicked"))
            .collect()
    });
    parts.sort_by_key(|(i, _)| *i);
    parts.into_iter().map(|(_, r)| r).collect()
}

/// Same result as `build_graph_with`, with per-card extraction spread over
/// `threads` workers.
pub fn build_graph_parallel(
    snapshot: &Snapshot,
    options: &BuildOptions,
    threads: usize,
) -> Result<SupplyChainGraph, IngestError> {
    if snapshot.is_empty() {
        return Err(IngestError::EmptySnapshot);
    }
    let records: Vec<&SnapshotRecord> = snapshot.records.values().collect();
    let extracted = parallel_map(&records, threads, |r| extract_record(r, &options.rules));
    let mut evidence = Evidence::new(options.clone());
    for (summary, deps) in extracted {
        evidence.insert_extracted(summary, deps);
    }
    Ok(materialize(evidence, snapshot.date))
}
