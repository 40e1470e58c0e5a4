//! CSV and JSON renderings of report tables and analysis series.

use std::path::{Path, PathBuf};

use serde_json::{Map, Number, Value};
use supplygraph_core::algo::{ComponentSet, DegreeHistogram, Partition};
use supplygraph_core::delta::ChurnStats;
use supplygraph_core::report::{Cell, ReportTable};
use supplygraph_core::{Date, NodeKind};

use crate::error::Result;
use crate::fsutil::atomic_write;
use crate::graphio::write_csv;

pub fn table_rows(table: &ReportTable) -> Vec<Vec<String>> {
    table
        .rows
        .iter()
        .map(|r| r.iter().map(Cell::render).collect())
        .collect()
}

pub fn table_header(table: &ReportTable) -> Vec<&str> {
    table.columns.iter().map(|c| c.name.as_str()).collect()
}

fn cell_value(cell: &Cell) -> Value {
    match cell {
        Cell::Str(s) => Value::String(s.clone()),
        Cell::Int(n) => Value::Number((*n).into()),
        Cell::Real { .. } => cell
            .render()
            .parse::<f64>()
            .ok()
            .and_then(Number::from_f64)
            .map_or(Value::Null, Value::Number),
        Cell::Empty => Value::Null,
    }
}

/// Array of row objects keyed by column name, in column order.
pub fn table_json(table: &ReportTable) -> String {
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|r| {
            let mut obj = Map::new();
            for (c, cell) in table.columns.iter().zip(r) {
                obj.insert(c.name.clone(), cell_value(cell));
            }
            Value::Object(obj)
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&Value::Array(rows)).expect("table serializes");
    s.push('\n');
    s
}

/// `report_<name>_<date>` with `undated` when the graph has no date.
pub fn report_stem(name: &str, date: Option<Date>) -> String {
    let date = date.map_or_else(|| "undated".to_string(), |d| d.to_string());
    format!("report_{name}_{date}")
}

/// Writes `<stem>.csv` and `<stem>.json` into `dir` and returns both paths.
pub fn write_table(dir: &Path, table: &ReportTable, date: Option<Date>) -> Result<(PathBuf, PathBuf)> {
    let stem = report_stem(&table.name, date);
    let csv = dir.join(format!("{stem}.csv"));
    let json = dir.join(format!("{stem}.json"));
    write_csv(&csv, &table_header(table), &table_rows(table))?;
    atomic_write(&json, table_json(table).as_bytes())?;
    Ok((csv, json))
}

pub fn write_histogram(path: &Path, h: &DegreeHistogram) -> Result<()> {
    let rows: Vec<Vec<String>> = h
        .buckets
        .iter()
        .map(|(d, c)| vec![d.to_string(), c.to_string()])
        .collect();
    write_csv(path, &["degree", "count"], &rows)
}

pub fn write_cdf(path: &Path, cdf: &[(usize, f64)]) -> Result<()> {
    let rows: Vec<Vec<String>> = cdf
        .iter()
        .map(|(s, p)| vec![s.to_string(), format!("{p:.6}")])
        .collect();
    write_csv(path, &["size", "cdf"], &rows)
}

/// One row per node: `id,component` with components numbered largest first.
pub fn write_components(path: &Path, set: &ComponentSet) -> Result<()> {
    let mut rows: Vec<Vec<String>> = set
        .components
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.iter().map(move |id| vec![id.to_string(), i.to_string()]))
        .collect();
    rows.sort();
    write_csv(path, &["id", "component"], &rows)
}

pub fn write_partition(path: &Path, p: &Partition) -> Result<()> {
    let rows: Vec<Vec<String>> = p
        .community_of
        .iter()
        .map(|(id, c)| vec![id.to_string(), c.to_string()])
        .collect();
    write_csv(path, &["id", "community"], &rows)
}

/// `date,kind,added,deleted` with one row per day and node kind.
pub fn write_churn(path: &Path, stats: &ChurnStats) -> Result<()> {
    let mut rows = Vec::new();
    for day in &stats.days {
        let date = day.date.map(|d| d.to_string()).unwrap_or_default();
        for &kind in NodeKind::ALL {
            rows.push(vec![
                date.clone(),
                kind.token().to_string(),
                day.added_of(kind).to_string(),
                day.deleted_of(kind).to_string(),
            ]);
        }
    }
    write_csv(path, &["date", "kind", "added", "deleted"], &rows)
}
