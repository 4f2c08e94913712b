//! Pre-flattened case tables in CSV form.

use std::io::Read;

use crate::error::{Error, Result};
use crate::tabulate::{CaseTable, Column, TextColumn, LABEL_HEADER};

#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub id_column: String,
    pub delimiter: u8,
    /// Column holding the class label. Defaults to `__label` when that header exists.
    pub label_column: Option<String>,
    pub target_class: String,
}

impl CsvOptions {
    pub fn new(id_column: impl Into<String>) -> Self {
        CsvOptions {
            id_column: id_column.into(),
            delimiter: b',',
            label_column: None,
            target_class: String::new(),
        }
    }

    pub fn label(mut self, column: impl Into<String>, target_class: impl Into<String>) -> Self {
        self.label_column = Some(column.into());
        self.target_class = target_class.into();
        self
    }
}

/// Reads a CSV case table. Columns whose non-empty cells all parse as finite numbers become
/// numeric columns (empty cells are missing); all other columns are kept as text.
pub fn parse_csv<R: Read>(input: R, opts: &CsvOptions) -> Result<CaseTable> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .flexible(true)
        .from_reader(input);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Csv(e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let find = |name: &str| header.iter().position(|h| h == name);
    let id_idx = find(&opts.id_column)
        .ok_or_else(|| Error::Csv(format!("id column `{}` not in header", opts.id_column)))?;
    let label_name = opts.label_column.as_deref().unwrap_or(LABEL_HEADER);
    let label_idx = find(label_name)
        .ok_or_else(|| Error::Csv(format!("label column `{label_name}` not in header")))?;

    let mut cells: Vec<Vec<String>> = vec![Vec::new(); header.len()];
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Csv(e.to_string()))?;
        // Header is row 1.
        let row_number = i + 2;
        if record.len() != header.len() {
            return Err(Error::Csv(format!(
                "row {row_number} has {} fields, header has {}",
                record.len(),
                header.len()
            )));
        }
        for (col, field) in record.iter().enumerate() {
            cells[col].push(field.trim().to_string());
        }
    }

    let mut warnings = Vec::new();
    let mut columns = Vec::new();
    let mut excluded = Vec::new();
    for (idx, name) in header.iter().enumerate() {
        if idx == id_idx || idx == label_idx {
            continue;
        }
        let values = &cells[idx];
        let parsed: Vec<Option<f64>> = values
            .iter()
            .map(|v| v.parse::<f64>().ok().filter(|x| x.is_finite()))
            .collect();
        let numeric = values
            .iter()
            .zip(&parsed)
            .filter(|(v, p)| !v.is_empty() && p.is_some())
            .count();
        let text = values
            .iter()
            .zip(&parsed)
            .filter(|(v, p)| !v.is_empty() && p.is_none())
            .count();
        if text == 0 {
            columns.push(Column::base(
                name.clone(),
                parsed.iter().map(|p| p.unwrap_or(f64::NAN)).collect(),
            ));
        } else {
            if numeric > 0 {
                warnings.push(format!(
                    "column `{name}` mixes numbers with {text} non-numeric cells; kept as text"
                ));
            }
            excluded.push(TextColumn {
                name: name.clone(),
                values: values
                    .iter()
                    .map(|v| (!v.is_empty()).then(|| v.clone()))
                    .collect(),
            });
        }
    }

    let case_ids = std::mem::take(&mut cells[id_idx]);
    let labels = std::mem::take(&mut cells[label_idx]);
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
    Ok(table)
}
