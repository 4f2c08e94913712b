use std::collections::{BTreeSet, HashMap, HashSet};
use std::io::Write;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::latent::FeatureDef;

/// Header of the label column in exported case tables.
pub const LABEL_HEADER: &str = "__label";
/// Header of the case id column in exported case tables.
pub const CASE_ID_HEADER: &str = "__case_id";

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColumnKind {
    Base,
    Latent,
}

/// A numeric mining column. Missing cells are stored as NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub def: FeatureDef,
    pub values: Vec<f64>,
}

impl Column {
    pub fn base(name: impl Into<String>, values: Vec<f64>) -> Self {
        Column {
            def: FeatureDef::Base(name.into()),
            values,
        }
    }

    pub fn name(&self) -> String {
        self.def.to_string()
    }

    pub fn kind(&self) -> ColumnKind {
        self.def.kind()
    }
}

/// A non-numeric column kept for reference but never used as a mining input.
#[derive(Debug, Clone, PartialEq)]
pub struct TextColumn {
    pub name: String,
    pub values: Vec<Option<String>>,
}

/// One row per case: numeric columns plus one class label.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseTable {
    case_ids: Vec<String>,
    columns: Vec<Column>,
    excluded: Vec<TextColumn>,
    labels: Vec<String>,
    target_class: String,
    warnings: Vec<String>,
    index: HashMap<String, usize>,
}

impl CaseTable {
    pub fn new(
        case_ids: Vec<String>,
        columns: Vec<Column>,
        excluded: Vec<TextColumn>,
        labels: Vec<String>,
        target_class: impl Into<String>,
    ) -> Result<Self> {
        let n = case_ids.len();
        if labels.len() != n {
            return Err(Error::Schema(format!(
                "{} labels for {n} cases",
                labels.len()
            )));
        }
        let mut names = HashSet::new();
        let mut index = HashMap::new();
        for (i, c) in columns.iter().enumerate() {
            if c.values.len() != n {
                return Err(Error::Schema(format!(
                    "column `{}` has {} values for {n} cases",
                    c.name(),
                    c.values.len()
                )));
            }
            if !names.insert(c.name()) {
                return Err(Error::Schema(format!("duplicate column `{}`", c.name())));
            }
            index.insert(c.name(), i);
        }
        for c in &excluded {
            if c.values.len() != n {
                return Err(Error::Schema(format!(
                    "column `{}` has {} values for {n} cases",
                    c.name,
                    c.values.len()
                )));
            }
            if !names.insert(c.name.clone()) {
                return Err(Error::Schema(format!("duplicate column `{}`", c.name)));
            }
        }
        let mut seen = HashSet::new();
        if let Some(dup) = case_ids.iter().find(|id| !seen.insert(id.as_str())) {
            return Err(Error::DuplicateCase(dup.clone()));
        }
        Ok(CaseTable {
            case_ids,
            columns,
            excluded,
            labels,
            target_class: target_class.into(),
            warnings: Vec::new(),
            index,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.case_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.case_ids.is_empty()
    }

    pub fn case_ids(&self) -> &[String] {
        &self.case_ids
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn excluded(&self) -> &[TextColumn] {
        &self.excluded
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn target_class(&self) -> &str {
        &self.target_class
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub(crate) fn warn(&mut self, message: String) {
        log::warn!("{message}");
        self.warnings.push(message);
    }

    pub fn with_target_class(mut self, target: impl Into<String>) -> Self {
        self.target_class = target.into();
        self
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.index.get(name).map(|&i| &self.columns[i])
    }

    pub fn base_columns(&self) -> impl Iterator<Item = &Column> {
        self.columns.iter().filter(|c| !c.def.is_latent())
    }

    /// Distinct labels in lexicographic order.
    pub fn classes(&self) -> Vec<String> {
        self.labels
            .iter()
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    /// Degenerate tables have fewer than two classes or do not contain the target class.
    pub fn is_degenerate(&self) -> bool {
        let classes = self.classes();
        classes.len() < 2 || !classes.contains(&self.target_class)
    }

    pub fn is_positive(&self, row: usize) -> bool {
        self.labels[row] == self.target_class
    }

    pub fn row(&self, index: usize) -> RowView<'_> {
        RowView { table: self, index }
    }

    /// Keeps only the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> CaseTable {
        CaseTable {
            case_ids: rows.iter().map(|&r| self.case_ids[r].clone()).collect(),
            columns: self
                .columns
                .iter()
                .map(|c| Column {
                    def: c.def.clone(),
                    values: rows.iter().map(|&r| c.values[r]).collect(),
                })
                .collect(),
            excluded: self
                .excluded
                .iter()
                .map(|c| TextColumn {
                    name: c.name.clone(),
                    values: rows.iter().map(|&r| c.values[r].clone()).collect(),
                })
                .collect(),
            labels: rows.iter().map(|&r| self.labels[r].clone()).collect(),
            target_class: self.target_class.clone(),
            warnings: self.warnings.clone(),
            index: self.index.clone(),
        }
    }

    /// Drops rows with a missing value in any numeric column; returns the drop count.
    pub fn drop_incomplete_rows(&self) -> (CaseTable, usize) {
        let keep: Vec<usize> = (0..self.n_rows())
            .filter(|&r| self.columns.iter().all(|c| !c.values[r].is_nan()))
            .collect();
        let dropped = self.n_rows() - keep.len();
        let mut table = self.select_rows(&keep);
        if dropped > 0 {
            table.warn(format!(
                "dropped {dropped} rows with missing numeric values"
            ));
        }
        (table, dropped)
    }

    /// Replaces all latent columns with `latent`, keeping base columns in place.
    pub(crate) fn with_latent_columns(&self, latent: Vec<Column>) -> Result<CaseTable> {
        let mut columns: Vec<Column> = self.base_columns().cloned().collect();
        columns.extend(latent);
        let mut table = CaseTable::new(
            self.case_ids.clone(),
            columns,
            self.excluded.clone(),
            self.labels.clone(),
            self.target_class.clone(),
        )?;
        table.warnings = self.warnings.clone();
        Ok(table)
    }

    /// Stable digest over the ordered feature definitions.
    pub fn fingerprint<'a>(defs: impl IntoIterator<Item = &'a FeatureDef>) -> String {
        let mut hasher = Sha256::new();
        for def in defs {
            hasher.update(def.to_string().as_bytes());
            hasher.update(b"\n");
        }
        hex::encode(&hasher.finalize()[..8])
    }

    /// Writes base numeric and excluded columns followed by `__label` and `__case_id`.
    /// Latent columns are derived data and are not exported.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let base: Vec<&Column> = self.base_columns().collect();
        let mut header: Vec<String> = base.iter().map(|c| c.name()).collect();
        header.extend(self.excluded.iter().map(|c| c.name.clone()));
        header.push(LABEL_HEADER.into());
        header.push(CASE_ID_HEADER.into());
        w.write_record(&header)
            .map_err(|e| Error::Csv(e.to_string()))?;
        for r in 0..self.n_rows() {
            let mut record: Vec<String> = base
                .iter()
                .map(|c| {
                    let v = c.values[r];
                    if v.is_nan() {
                        String::new()
                    } else {
                        v.to_string()
                    }
                })
                .collect();
            record.extend(
                self.excluded
                    .iter()
                    .map(|c| c.values[r].clone().unwrap_or_default()),
            );
            record.push(self.labels[r].clone());
            record.push(self.case_ids[r].clone());
            w.write_record(&record)
                .map_err(|e| Error::Csv(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Name-based access to one row's numeric cells.
pub trait RowLookup {
    /// The cell value, or `None` when the column is absent or the cell missing.
    fn value(&self, name: &str) -> Option<f64>;
}

#[derive(Debug, Clone, Copy)]
pub struct RowView<'a> {
    table: &'a CaseTable,
    index: usize,
}

impl RowLookup for RowView<'_> {
    fn value(&self, name: &str) -> Option<f64> {
        self.table
            .column(name)
            .map(|c| c.values[self.index])
            .filter(|v| !v.is_nan())
    }
}

impl RowLookup for std::collections::HashMap<String, f64> {
    fn value(&self, name: &str) -> Option<f64> {
        self.get(name).copied().filter(|v| !v.is_nan())
    }
}

impl RowLookup for std::collections::BTreeMap<String, f64> {
    fn value(&self, name: &str) -> Option<f64> {
        self.get(name).copied().filter(|v| !v.is_nan())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> CaseTable {
        CaseTable::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![Column::base("x", vec![1.0, f64::NAN, 3.0])],
            vec![],
            vec!["OK".into(), "NOK".into(), "OK".into()],
            "OK",
        )
        .unwrap()
    }

    #[test]
    fn rejects_ragged_and_duplicate_columns() {
        let err = CaseTable::new(
            vec!["a".into()],
            vec![Column::base("x", vec![1.0, 2.0])],
            vec![],
            vec!["OK".into()],
            "OK",
        );
        assert!(matches!(err, Err(Error::Schema(_))));
        let err = CaseTable::new(
            vec!["a".into()],
            vec![Column::base("x", vec![1.0]), Column::base("x", vec![2.0])],
            vec![],
            vec!["OK".into()],
            "OK",
        );
        assert!(matches!(err, Err(Error::Schema(_))));
    }

    #[test]
    fn drops_missing_rows() {
        let (t, dropped) = small().drop_incomplete_rows();
        assert_eq!(dropped, 1);
        assert_eq!(t.case_ids(), ["a", "c"]);
        assert_eq!(t.warnings().len(), 1);
    }

    #[test]
    fn degenerate_detection() {
        assert!(!small().is_degenerate());
        assert!(small().with_target_class("MAYBE").is_degenerate());
        let (t, _) = small().drop_incomplete_rows();
        assert!(t.is_degenerate());
    }

    #[test]
    fn row_lookup_hides_missing() {
        let t = small();
        assert_eq!(t.row(0).value("x"), Some(1.0));
        assert_eq!(t.row(1).value("x"), None);
        assert_eq!(t.row(0).value("y"), None);
    }

    #[test]
    fn csv_export_header() {
        let mut buf = Vec::new();
        small().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "x,__label,__case_id\n1,OK,a\n,NOK,b\n3,OK,c\n");
    }
}
