//! Binary decision trees grown with Gini impurity.
//!
//! Features are numeric columns of a [`CaseTable`]; latent comparison columns are just
//! 0/1 columns whose single threshold is 0.5.

mod render;
mod split;
mod tree;

use serde::{Deserialize, Serialize};

pub use render::{renderers, AsciiRenderer, DotRenderer, TreeRenderer};
pub use split::{best_split, gini, weighted_decrease, SplitCandidate};
pub use tree::{fit, DecisionTree, Node, TREE_VERSION};

use crate::error::{Error, Result};
use crate::latent::FeatureDef;
use crate::tabulate::CaseTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureMask {
    BaseOnly,
    BasePlusLatent,
}

impl FeatureMask {
    pub fn admits(self, def: &FeatureDef) -> bool {
        match self {
            FeatureMask::BaseOnly => !def.is_latent(),
            FeatureMask::BasePlusLatent => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// `None` grows until no admissible split remains.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub min_samples_split: usize,
    pub min_impurity_decrease: f64,
    pub feature_mask: FeatureMask,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            max_depth: None,
            min_samples_leaf: 1,
            min_samples_split: 2,
            min_impurity_decrease: 0.0,
            feature_mask: FeatureMask::BasePlusLatent,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_depth == Some(0) {
            return Err(Error::Config("max_depth must be positive".into()));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::Config("min_samples_leaf must be positive".into()));
        }
        if self.min_samples_split == 0 {
            return Err(Error::Config("min_samples_split must be positive".into()));
        }
        if !(self.min_impurity_decrease >= 0.0 && self.min_impurity_decrease.is_finite()) {
            return Err(Error::Config(
                "min_impurity_decrease must be a non-negative number".into(),
            ));
        }
        Ok(())
    }
}

/// Column-major training view: feature columns, class indices and the sorted class names.
#[derive(Debug, Clone)]
pub struct Dataset<'a> {
    pub features: Vec<FeatureDef>,
    pub columns: Vec<&'a [f64]>,
    pub labels: Vec<usize>,
    pub classes: Vec<String>,
}

impl<'a> Dataset<'a> {
    pub fn new(
        features: Vec<FeatureDef>,
        columns: Vec<&'a [f64]>,
        labels: Vec<usize>,
        classes: Vec<String>,
    ) -> Result<Self> {
        if features.len() != columns.len() {
            return Err(Error::Schema(format!(
                "{} feature definitions for {} columns",
                features.len(),
                columns.len()
            )));
        }
        let n = labels.len();
        if let Some((i, c)) = columns.iter().enumerate().find(|(_, c)| c.len() != n) {
            return Err(Error::Schema(format!(
                "feature `{}` has {} values for {n} labels",
                features[i],
                c.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= classes.len()) {
            return Err(Error::Schema(format!("label index {bad} out of range")));
        }
        for (def, col) in features.iter().zip(&columns) {
            if col.iter().any(|v| v.is_nan()) {
                return Err(Error::Schema(format!("feature `{def}` has missing values")));
            }
        }
        Ok(Dataset {
            features,
            columns,
            labels,
            classes,
        })
    }

    pub fn from_table(table: &'a CaseTable, mask: FeatureMask) -> Result<Self> {
        let classes = table.classes();
        let labels = table
            .labels()
            .iter()
            .map(|l| classes.binary_search(l).expect("label drawn from classes"))
            .collect();
        let (features, columns) = table
            .columns()
            .iter()
            .filter(|c| mask.admits(&c.def))
            .map(|c| (c.def.clone(), c.values.as_slice()))
            .unzip();
        Dataset::new(features, columns, labels, classes)
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }
}
