//! Merging each trace into one case row.

use std::collections::{BTreeMap, HashSet};

use indexmap::IndexMap;

use super::lists::{looks_like_list, split_lists};
use super::table::{CaseTable, Column, TextColumn};
use crate::error::{Error, Result};
use crate::log_ingest::{AttrValue, EventLog, Trace};

#[derive(Debug, Clone)]
pub struct FlattenOptions {
    /// Attribute whose value becomes the row label.
    pub result_attr: String,
    pub target_class: String,
    /// Trace attribute holding the case id; excluded from the columns.
    pub id_key: String,
    /// Keep the first write of an attribute within a trace instead of the last.
    pub first_write: bool,
    /// Column stem per list-valued attribute key, e.g. `measured_values` -> `meas`.
    pub aliases: BTreeMap<String, String>,
}

impl FlattenOptions {
    pub fn new(result_attr: impl Into<String>, target_class: impl Into<String>) -> Self {
        FlattenOptions {
            result_attr: result_attr.into(),
            target_class: target_class.into(),
            id_key: "uuid".into(),
            first_write: false,
            aliases: BTreeMap::new(),
        }
    }

    pub fn alias(mut self, key: impl Into<String>, stem: impl Into<String>) -> Self {
        self.aliases.insert(key.into(), stem.into());
        self
    }

    fn stem<'a>(&'a self, key: &'a str) -> &'a str {
        self.aliases.get(key).map_or(key, String::as_str)
    }
}

#[derive(Debug, Clone)]
enum Cell {
    Number(f64),
    List(Vec<f64>),
    Text(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum KeyKind {
    Scalar,
    List(usize),
    Text,
}

/// Builds a [`CaseTable`] with one row per trace.
///
/// Numeric attributes become base columns, list strings are split into `stem0..stemN`,
/// and everything else is kept as an excluded text column. Absent cells are missing (NaN).
pub fn flatten(log: &EventLog, opts: &FlattenOptions) -> Result<CaseTable> {
    let mut warnings = Vec::new();
    let mut rows: Vec<IndexMap<String, Cell>> = Vec::with_capacity(log.len());
    let mut labels = Vec::with_capacity(log.len());
    let mut missing = Vec::new();

    for trace in &log.traces {
        let (cells, label) = merge_trace(trace, opts, &mut warnings);
        match label {
            Some(l) => labels.push(l),
            None => missing.push(trace.case_id.clone()),
        }
        rows.push(cells);
    }
    if !missing.is_empty() {
        return Err(Error::MissingResult {
            attr: opts.result_attr.clone(),
            case_ids: missing,
        });
    }

    let mut distinct: Vec<&String> = labels.iter().collect();
    distinct.sort();
    distinct.dedup();
    if distinct.len() == 1 {
        return Err(Error::DegenerateLabels(format!(
            "`{}` only takes the value `{}`",
            opts.result_attr, distinct[0]
        )));
    }

    // Schema: keys in order of first appearance, each with one kind across all traces.
    let mut schema: IndexMap<String, KeyKind> = IndexMap::new();
    let mut mixed = HashSet::new();
    for row in &rows {
        for (key, cell) in row {
            let kind = match cell {
                Cell::Number(_) => KeyKind::Scalar,
                Cell::List(v) => KeyKind::List(v.len()),
                Cell::Text(_) => KeyKind::Text,
            };
            let merged = match (schema.get(key).copied(), kind) {
                (None, k) => k,
                (Some(KeyKind::Text), _) | (_, KeyKind::Text) => KeyKind::Text,
                (Some(KeyKind::List(a)), KeyKind::List(b)) => KeyKind::List(a.max(b)),
                (Some(KeyKind::List(a)), KeyKind::Scalar)
                | (Some(KeyKind::Scalar), KeyKind::List(a)) => KeyKind::List(a.max(1)),
                (Some(KeyKind::Scalar), KeyKind::Scalar) => KeyKind::Scalar,
            };
            let prev = schema.get(key).copied();
            if prev.is_some_and(|p| (p == KeyKind::Text) != (kind == KeyKind::Text))
                && mixed.insert(key.clone())
            {
                warnings.push(format!(
                    "attribute `{key}` mixes numeric and text values; kept as text"
                ));
            }
            schema.insert(key.clone(), merged);
        }
    }

    let mut lengths: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    let mut columns = Vec::new();
    let mut excluded = Vec::new();
    for (key, kind) in &schema {
        match kind {
            KeyKind::Scalar => {
                let values = rows
                    .iter()
                    .map(|r| match r.get(key) {
                        Some(Cell::Number(v)) => *v,
                        _ => f64::NAN,
                    })
                    .collect();
                columns.push(Column::base(key.clone(), values));
            }
            KeyKind::List(len) => {
                let stem = opts.stem(key);
                for i in 0..*len {
                    let values = rows
                        .iter()
                        .map(|r| match r.get(key) {
                            Some(Cell::List(v)) => v.get(i).copied().unwrap_or(f64::NAN),
                            Some(Cell::Number(v)) if i == 0 => *v,
                            _ => f64::NAN,
                        })
                        .collect();
                    columns.push(Column::base(format!("{stem}{i}"), values));
                }
                for r in &rows {
                    if let Some(Cell::List(v)) = r.get(key) {
                        let e = lengths.entry(key.as_str()).or_insert((v.len(), v.len()));
                        e.0 = e.0.min(v.len());
                        e.1 = e.1.max(v.len());
                    }
                }
            }
            KeyKind::Text => {
                let values = rows
                    .iter()
                    .map(|r| {
                        r.get(key).map(|c| match c {
                            Cell::Text(s) => s.clone(),
                            Cell::Number(v) => v.to_string(),
                            Cell::List(v) => super::lists::render_list(v),
                        })
                    })
                    .collect();
                excluded.push(TextColumn {
                    name: key.clone(),
                    values,
                });
            }
        }
    }
    for (key, (lo, hi)) in lengths {
        if lo != hi {
            warnings.push(format!(
                "list attribute `{key}` has between {lo} and {hi} items; short lists padded with missing"
            ));
        }
    }

    let case_ids = log.traces.iter().map(|t| t.case_id.clone()).collect();
    let mut table = CaseTable::new(
        case_ids,
        columns,
        excluded,
        labels,
        opts.target_class.clone(),
    )?;
    for w in warnings {
        table.warn(w);
    }
    if table.is_degenerate() {
        table.warn(format!(
            "target class `{}` does not occur in `{}`",
            opts.target_class, opts.result_attr
        ));
    }
    Ok(table)
}

fn merge_trace(
    trace: &Trace,
    opts: &FlattenOptions,
    warnings: &mut Vec<String>,
) -> (IndexMap<String, Cell>, Option<String>) {
    let mut cells: IndexMap<String, Cell> = IndexMap::new();
    let mut label = None;
    let writes = trace
        .trace_attributes
        .iter()
        .filter(|(k, _)| **k != opts.id_key)
        .chain(trace.events.iter().flat_map(|e| e.attributes.iter()));
    for (key, value) in writes {
        if *key == opts.result_attr {
            if label.is_none() || !opts.first_write {
                label = Some(value.to_string());
            }
            continue;
        }
        if opts.first_write && cells.contains_key(key) {
            continue;
        }
        let cell = to_cell(value, key, &trace.case_id, warnings);
        // `insert` on an existing key keeps its original position.
        cells.insert(key.clone(), cell);
    }
    (cells, label)
}

fn to_cell(value: &AttrValue, key: &str, case_id: &str, warnings: &mut Vec<String>) -> Cell {
    if let Some(v) = value.as_number() {
        return Cell::Number(v);
    }
    match value {
        AttrValue::Text(s) if looks_like_list(s) => match split_lists(s) {
            Ok(v) => Cell::List(v),
            Err(e) => {
                warnings.push(format!(
                    "case {case_id}: `{key}` is not a numeric list ({e})"
                ));
                Cell::Text(s.clone())
            }
        },
        other => Cell::Text(other.to_string()),
    }
}
