use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use supplygraph::adapter::{harvest, DiskAdapter};
use supplygraph::anonymize::{anonymize, write_mapping, SALT_ENV};
use supplygraph::config::Config;
use supplygraph::deltaio::{load_delta, write_delta};
use supplygraph::graphio::{load_graph_dir, parse_stub_policy, write_graph_dir};
use supplygraph::par::build_graph_parallel;
use supplygraph::reportio::{
    table_header, table_rows, write_cdf, write_churn, write_components, write_histogram, write_partition, write_table,
};
use supplygraph::snapshot::{load_snapshot, parse_date, write_rejects};
use supplygraph_core::algo::{
    degree_distribution, louvain, size_cdf, strongly_connected_components, weakly_connected_components,
};
use supplygraph_core::delta::{apply_delta, churn_report, diff_snapshots};
use supplygraph_core::report::{communities_table, graph_summary, report_by_name, REPORT_NAMES};
use supplygraph_core::{
    backward_subgraph, forward_subgraph, ArtifactClass, Date, DegreeDirection, NodeKind, SupplyChainGraph,
};

#[derive(Parser)]
#[command(
    name = "supplygraph",
    version,
    about = "Build and analyse model/dataset supply-chain graphs"
)]
struct Cli {
    /// TOML configuration file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a graph directory from a snapshot file or a card mirror.
    Build(BuildArgs),
    /// Apply a delta file to a graph directory.
    Update(UpdateArgs),
    /// Compute the delta between two snapshot files.
    Diff(DiffArgs),
    /// Daily additions and deletions over a run of delta files.
    Churn(ChurnArgs),
    /// Forward or backward lineage of one artifact, as JSON.
    Query(QueryArgs),
    /// Print the graph summary table as CSV.
    Stats(GraphArg),
    /// Degree histogram.
    Degrees(DegreesArgs),
    /// Louvain communities.
    Communities(CommunitiesArgs),
    /// Weakly or strongly connected components and their size CDF.
    Components(ComponentsArgs),
    /// Write one analysis table (or all) as CSV and JSON.
    Report(ReportArgs),
    /// Re-export a graph directory.
    Export(ExportArgs),
    /// Export a copy with keyed-digest ids.
    Anonymize(AnonymizeArgs),
}

#[derive(Args)]
struct GraphArg {
    /// Graph directory.
    #[arg(long)]
    graph: PathBuf,
}

#[derive(Args)]
struct BuildArgs {
    /// Snapshot JSONL file.
    #[arg(long, conflicts_with = "adapter_root")]
    snapshot: Option<PathBuf>,
    /// Card mirror directory for the on-disk adapter.
    #[arg(long)]
    adapter_root: Option<PathBuf>,
    /// Snapshot date (YYYY-MM-DD); defaults to a date in the file name.
    #[arg(long)]
    date: Option<String>,
    #[arg(long)]
    out: PathBuf,
    /// `create` or `reject` stubs for unrecorded endpoints.
    #[arg(long)]
    stubs: Option<String>,
    #[arg(long)]
    parallelism: Option<usize>,
    /// Where to write rejected lines; defaults to `<out>/rejects.jsonl` when any.
    #[arg(long)]
    rejects: Option<PathBuf>,
}

#[derive(Args)]
struct UpdateArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    delta: PathBuf,
    /// Output directory; defaults to updating `--graph` in place.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DiffArgs {
    #[arg(long)]
    old: PathBuf,
    #[arg(long)]
    new: PathBuf,
    #[arg(long)]
    old_date: Option<String>,
    #[arg(long)]
    new_date: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ChurnArgs {
    /// Delta files in date order.
    #[arg(long = "delta", required = true)]
    deltas: Vec<PathBuf>,
    /// CSV output; the averages are printed as JSON.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(
        long,
        value_name = "ID",
        conflicts_with = "backward",
        required_unless_present = "backward"
    )]
    forward: Option<String>,
    #[arg(long, value_name = "ID")]
    backward: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Dir {
    In,
    Out,
}

#[derive(Args)]
struct DegreesArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_enum)]
    direction: Dir,
    /// Only count nodes of this kind.
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CommunitiesArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Output directory for `partition.csv` and the communities table.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    resolution: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Args)]
struct ComponentsArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, conflicts_with = "strong", required_unless_present = "strong")]
    weak: bool,
    #[arg(long)]
    strong: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Table name, or `all`.
    #[arg(long)]
    name: String,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AnonymizeArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, env = SALT_ENV, hide_env_values = true)]
    salt: Option<String>,
    /// Also write the `original,anonymized` mapping here.
    #[arg(long)]
    mapping: Option<PathBuf>,
}

/// Errors caused by the invocation rather than by the data.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct UsageError(String);

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn date_arg(s: Option<&str>) -> anyhow::Result<Option<Date>> {
    s.map(|d| parse_date(d).ok_or_else(|| usage(format!("bad date `{d}`, expected YYYY-MM-DD"))))
        .transpose()
}

fn load(dir: &Path) -> anyhow::Result<SupplyChainGraph> {
    load_graph_dir(dir).with_context(|| format!("loading graph {}", dir.display()))
}

fn print(text: &str) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = match &cli.config {
        Some(p) => Config::load(p).map_err(|e| usage(e.to_string()))?,
        None => Config::default(),
    };
    match cli.command {
        Command::Build(a) => build(&cfg, a),
        Command::Update(a) => {
            let graph = load(&a.graph)?;
            let delta = load_delta(&a.delta)?;
            let updated = apply_delta(graph, &delta)?;
            log_warnings(&updated);
            write_graph_dir(a.out.as_deref().unwrap_or(&a.graph), &updated)?;
            Ok(())
        }
        Command::Diff(a) => {
            let old = load_snapshot(&a.old, date_arg(a.old_date.as_deref())?)?;
            let new = load_snapshot(&a.new, date_arg(a.new_date.as_deref())?)?;
            let delta = diff_snapshots(&old.snapshot, &new.snapshot)?;
            info!(
                "{} added, {} updated, {} deleted",
                delta.added.len(),
                delta.updated.len(),
                delta.deleted.len()
            );
            write_delta(&a.out, &delta)?;
            Ok(())
        }
        Command::Churn(a) => {
            let deltas = a.deltas.iter().map(|p| load_delta(p)).collect::<Result<Vec<_>, _>>()?;
            let stats = churn_report(&deltas)?;
            for w in &stats.warnings {
                warn!("{w:?}");
            }
            write_churn(&a.out, &stats)?;
            let mut avg = serde_json::Map::new();
            for (name, class) in [("models", ArtifactClass::Model), ("datasets", ArtifactClass::Dataset)] {
                avg.insert(
                    name.into(),
                    serde_json::json!({
                        "average_added": stats.average_added(class),
                        "average_deleted": stats.average_deleted(class),
                        "average_changed": stats.average_changed(class),
                    }),
                );
            }
            print(&(serde_json::to_string_pretty(&avg)? + "\n"))
        }
        Command::Query(a) => {
            let graph = load(&a.graph)?;
            let result = match (&a.forward, &a.backward) {
                (Some(id), _) => forward_subgraph(&graph, id)?,
                (_, Some(id)) => backward_subgraph(&graph, id)?,
                _ => unreachable!("clap requires one direction"),
            };
            let mut v = serde_json::to_value(&result)?;
            v["total"] = result.total().into();
            v["chains"] = serde_json::to_value(result.chains())?;
            print(&(serde_json::to_string_pretty(&v)? + "\n"))
        }
        Command::Stats(a) => {
            let t = graph_summary(&load(&a.graph)?);
            print(&csv_text(&table_header(&t), &table_rows(&t)))
        }
        Command::Degrees(a) => {
            let graph = load(&a.graph)?;
            let kind = a
                .kind
                .as_deref()
                .map(|k| NodeKind::from_token(k).ok_or_else(|| usage(format!("unknown node kind `{k}`"))))
                .transpose()?;
            let dir = match a.direction {
                Dir::In => DegreeDirection::In,
                Dir::Out => DegreeDirection::Out,
            };
            write_histogram(&a.out, &degree_distribution(&graph, dir, kind))?;
            Ok(())
        }
        Command::Communities(a) => {
            let graph = load(&a.graph)?;
            let mut lc = cfg.louvain();
            lc.resolution = a.resolution.unwrap_or(lc.resolution);
            lc.seed = a.seed.unwrap_or(lc.seed);
            if !(lc.resolution.is_finite() && lc.resolution > 0.0) {
                return Err(usage("resolution must be positive"));
            }
            let k = positive_k(a.k, &cfg)?;
            let p = louvain(&graph, &lc);
            write_partition(&a.out.join("partition.csv"), &p)?;
            write_table(&a.out, &communities_table(&graph, &p, k, 3), graph.snapshot_date())?;
            print(&format!(
                "{{\"communities\": {}, \"modularity\": {:.6}}}\n",
                p.community_count(),
                p.modularity
            ))
        }
        Command::Components(a) => {
            let graph = load(&a.graph)?;
            let (set, tag) = if a.weak {
                (weakly_connected_components(&graph), "weak")
            } else {
                (strongly_connected_components(&graph), "strong")
            };
            write_components(&a.out.join(format!("components_{tag}.csv")), &set)?;
            if !set.is_empty() {
                write_cdf(&a.out.join(format!("components_{tag}_cdf.csv")), &size_cdf(&set)?)?;
            }
            print(&format!(
                "{{\"components\": {}, \"non_trivial\": {}, \"largest\": {}}}\n",
                set.len(),
                set.non_trivial_count(),
                set.sizes().first().copied().unwrap_or(0)
            ))
        }
        Command::Report(a) => {
            let graph = load(&a.graph)?;
            let k = positive_k(a.k, &cfg)?;
            let names: Vec<&str> = if a.name == "all" {
                REPORT_NAMES.to_vec()
            } else {
                vec![a.name.as_str()]
            };
            for name in names {
                let table = report_by_name(&graph, name, k).ok_or_else(|| {
                    usage(format!(
                        "unknown report `{name}`; known: {}, all",
                        REPORT_NAMES.join(", ")
                    ))
                })?;
                let (csv, _) = write_table(&a.out, &table, graph.snapshot_date())?;
                info!("wrote {}", csv.display());
            }
            Ok(())
        }
        Command::Export(a) => {
            write_graph_dir(&a.out, &load(&a.graph)?)?;
            Ok(())
        }
        Command::Anonymize(a) => {
            let graph = load(&a.graph)?;
            let salt = a.salt.or(cfg.salt.clone());
            let anon = anonymize(&graph, salt.as_deref())?;
            write_graph_dir(&a.out, &anon.graph)?;
            if let Some(p) = &a.mapping {
                write_mapping(p, &anon.mapping)?;
            }
            Ok(())
        }
    }
}

fn positive_k(flag: Option<usize>, cfg: &Config) -> anyhow::Result<usize> {
    match flag {
        Some(0) => Err(usage("k must be at least 1")),
        Some(k) => Ok(k),
        None => Ok(cfg.k()),
    }
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
}

fn log_warnings(graph: &SupplyChainGraph) {
    if let Some(ev) = graph.evidence() {
        for w in ev.warnings() {
            warn!("{w}");
        }
    }
}

fn build(cfg: &Config, a: BuildArgs) -> anyhow::Result<()> {
    let mut options = cfg.build_options()?;
    if let Some(s) = &a.stubs {
        options.stubs =
            parse_stub_policy(s).ok_or_else(|| usage(format!("--stubs must be create or reject, got `{s}`")))?;
    }
    let parallelism = match a.parallelism {
        Some(0) => return Err(usage("parallelism must be at least 1")),
        Some(p) => p,
        None => cfg.parallelism(),
    };
    let date = date_arg(a.date.as_deref())?;
    let snapshot = if let Some(root) = a.adapter_root.clone().or(cfg.adapter.as_ref().map(|x| x.root.clone())) {
        harvest(&DiskAdapter::new(root), date, parallelism)?
    } else {
        let path = match (&a.snapshot, cfg.snapshots.as_slice()) {
            (Some(p), _) => p.clone(),
            (None, [p]) => p.clone(),
            (None, []) => return Err(usage("give --snapshot or --adapter-root")),
            (None, _) => return Err(usage("build takes one snapshot; the config lists several")),
        };
        let loaded = load_snapshot(&path, date)?;
        if !loaded.rejects.is_empty() {
            let target = a.rejects.clone().unwrap_or_else(|| a.out.join("rejects.jsonl"));
            write_rejects(&target, &loaded.rejects)?;
            warn!(
                "{} rejected line(s) listed in {}",
                loaded.rejects.len(),
                target.display()
            );
        }
        loaded.snapshot
    };
    let graph = build_graph_parallel(&snapshot, &options, parallelism)?;
    log_warnings(&graph);
    info!("{} nodes, {} edges", graph.node_count(), graph.edge_count());
    write_graph_dir(&a.out, &graph)?;
    Ok(())
}
