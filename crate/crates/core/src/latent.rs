//! Latent comparison features.
//!
//! For every unordered pair of base columns `a < b` (by name) three boolean columns are
//! appended: `a<b`, `a<=b` and `a==b`. The other three operators are negations of these,
//! and a binary split on a boolean column exposes both a condition and its negation, so
//! the canonical set covers all six comparisons between the two variables.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tabulate::{CaseTable, Column, ColumnKind, RowLookup};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ComparisonOp {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "==")]
    Eq,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "!=")]
    Ne,
}

impl ComparisonOp {
    pub const ALL: [ComparisonOp; 6] = [
        ComparisonOp::Lt,
        ComparisonOp::Le,
        ComparisonOp::Eq,
        ComparisonOp::Gt,
        ComparisonOp::Ge,
        ComparisonOp::Ne,
    ];

    /// Operators materialized as latent columns.
    pub const CANONICAL: [ComparisonOp; 3] = [ComparisonOp::Lt, ComparisonOp::Le, ComparisonOp::Eq];

    pub fn symbol(self) -> &'static str {
        match self {
            ComparisonOp::Lt => "<",
            ComparisonOp::Le => "<=",
            ComparisonOp::Eq => "==",
            ComparisonOp::Gt => ">",
            ComparisonOp::Ge => ">=",
            ComparisonOp::Ne => "!=",
        }
    }

    /// Logical negation: `!(a < b)` is `a >= b`.
    pub fn negate(self) -> Self {
        match self {
            ComparisonOp::Lt => ComparisonOp::Ge,
            ComparisonOp::Le => ComparisonOp::Gt,
            ComparisonOp::Eq => ComparisonOp::Ne,
            ComparisonOp::Gt => ComparisonOp::Le,
            ComparisonOp::Ge => ComparisonOp::Lt,
            ComparisonOp::Ne => ComparisonOp::Eq,
        }
    }

    /// Operator after exchanging operands: `a < b` is `b > a`.
    pub fn swap(self) -> Self {
        match self {
            ComparisonOp::Lt => ComparisonOp::Gt,
            ComparisonOp::Le => ComparisonOp::Ge,
            ComparisonOp::Gt => ComparisonOp::Lt,
            ComparisonOp::Ge => ComparisonOp::Le,
            ComparisonOp::Eq => ComparisonOp::Eq,
            ComparisonOp::Ne => ComparisonOp::Ne,
        }
    }

    /// The non-strict counterpart of a strict inequality (`<` -> `<=`, `>` -> `>=`).
    pub fn relaxed(self) -> Self {
        match self {
            ComparisonOp::Lt => ComparisonOp::Le,
            ComparisonOp::Gt => ComparisonOp::Ge,
            other => other,
        }
    }

    pub fn holds(self, ord: Ordering) -> bool {
        match self {
            ComparisonOp::Lt => ord == Ordering::Less,
            ComparisonOp::Le => ord != Ordering::Greater,
            ComparisonOp::Eq => ord == Ordering::Equal,
            ComparisonOp::Gt => ord == Ordering::Greater,
            ComparisonOp::Ge => ord != Ordering::Less,
            ComparisonOp::Ne => ord != Ordering::Equal,
        }
    }

    /// Compares two cells; values within `eq_epsilon` of each other are equal.
    pub fn eval(self, a: f64, b: f64, eq_epsilon: f64) -> bool {
        self.holds(compare(a, b, eq_epsilon))
    }
}

/// Three-way comparison with an equality tolerance (0 means exact).
pub fn compare(a: f64, b: f64, eq_epsilon: f64) -> Ordering {
    if (a - b).abs() <= eq_epsilon {
        Ordering::Equal
    } else if a < b {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

impl fmt::Display for ComparisonOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for ComparisonOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "<" => ComparisonOp::Lt,
            "<=" => ComparisonOp::Le,
            "==" | "=" => ComparisonOp::Eq,
            ">" => ComparisonOp::Gt,
            ">=" => ComparisonOp::Ge,
            "!=" => ComparisonOp::Ne,
            other => return Err(Error::ConditionParse(format!("unknown operator `{other}`"))),
        })
    }
}

/// A mining input: an original column or a comparison between two of them.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureDef {
    Base(String),
    Latent {
        lhs: String,
        op: ComparisonOp,
        rhs: String,
    },
}

impl FeatureDef {
    pub fn latent(lhs: impl Into<String>, op: ComparisonOp, rhs: impl Into<String>) -> Self {
        FeatureDef::Latent {
            lhs: lhs.into(),
            op,
            rhs: rhs.into(),
        }
    }

    pub fn is_latent(&self) -> bool {
        matches!(self, FeatureDef::Latent { .. })
    }

    pub fn kind(&self) -> ColumnKind {
        match self {
            FeatureDef::Base(_) => ColumnKind::Base,
            FeatureDef::Latent { .. } => ColumnKind::Latent,
        }
    }
}

impl fmt::Display for FeatureDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureDef::Base(name) => f.write_str(name),
            FeatureDef::Latent { lhs, op, rhs } => write!(f, "{lhs}{op}{rhs}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatentOptions {
    /// Tolerance below which two cells compare equal.
    pub eq_epsilon: f64,
    /// Upper bound on the number of column pairs.
    pub max_pairs: usize,
}

impl Default for LatentOptions {
    fn default() -> Self {
        LatentOptions {
            eq_epsilon: 0.0,
            max_pairs: 5_000,
        }
    }
}

/// Appends the canonical latent columns for every pair of base columns.
///
/// Existing latent columns are discarded first, so the result only depends on the base set.
/// Returns the augmented table and the generated definitions in `(lhs, op, rhs)` order.
pub fn generate_latent(
    table: &CaseTable,
    opts: &LatentOptions,
) -> Result<(CaseTable, Vec<FeatureDef>)> {
    let mut base: Vec<&Column> = table.base_columns().collect();
    if base.len() < 2 {
        return Err(Error::Latent(format!(
            "no pairs available: {} numeric base column(s)",
            base.len()
        )));
    }
    base.sort_by_key(|c| c.name());
    let pairs: Vec<(&Column, &Column)> = base
        .iter()
        .enumerate()
        .flat_map(|(i, a)| base[i + 1..].iter().map(move |b| (*a, *b)))
        .collect();
    if pairs.len() > opts.max_pairs {
        return Err(Error::Latent(format!(
            "{} column pairs exceed the limit of {}; raise --max-pairs to allow them",
            pairs.len(),
            opts.max_pairs
        )));
    }

    let eps = opts.eq_epsilon;
    let latent: Vec<Column> = pairs
        .par_iter()
        .flat_map_iter(|(a, b)| {
            ComparisonOp::CANONICAL.into_iter().map(move |op| Column {
                def: FeatureDef::latent(a.name(), op, b.name()),
                values: a
                    .values
                    .iter()
                    .zip(&b.values)
                    .map(|(&x, &y)| {
                        if x.is_nan() || y.is_nan() {
                            f64::NAN
                        } else if op.eval(x, y, eps) {
                            1.0
                        } else {
                            0.0
                        }
                    })
                    .collect(),
            })
        })
        .collect();
    let defs = latent.iter().map(|c| c.def.clone()).collect();
    Ok((table.with_latent_columns(latent)?, defs))
}

/// Evaluates a latent definition on one row.
pub fn eval_latent(def: &FeatureDef, row: &impl RowLookup, eq_epsilon: f64) -> Result<bool> {
    match def {
        FeatureDef::Base(name) => Err(Error::Eval(format!("`{name}` is not a latent feature"))),
        FeatureDef::Latent { lhs, op, rhs } => {
            let a = row
                .value(lhs)
                .ok_or_else(|| Error::Eval(format!("missing operand `{lhs}`")))?;
            let b = row
                .value(rhs)
                .ok_or_else(|| Error::Eval(format!("missing operand `{rhs}`")))?;
            Ok(op.eval(a, b, eq_epsilon))
        }
    }
}
