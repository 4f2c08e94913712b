//! Table to rules: split, prepare, fit, extract, score on the held-out rows.

use serde::{Deserialize, Serialize};

use crate::approach::approaches;
use crate::cart::{fit, DecisionTree, TrainConfig};
use crate::error::{Error, Result};
use crate::latent::LatentOptions;
use crate::metrics::accuracy;
use crate::rules::{extract, RuleSet};
use crate::tabulate::{train_test_split, CaseTable};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MineConfig {
    pub approach: String,
    /// Share of rows used for training.
    pub split: f64,
    pub seed: u64,
    pub tree: TrainConfig,
    pub eq_epsilon: f64,
    pub max_pairs: usize,
}

impl Default for MineConfig {
    fn default() -> Self {
        let latent = LatentOptions::default();
        MineConfig {
            approach: "edt".into(),
            split: 0.9,
            seed: 42,
            tree: TrainConfig::default(),
            eq_epsilon: latent.eq_epsilon,
            max_pairs: latent.max_pairs,
        }
    }
}

impl MineConfig {
    pub fn latent_options(&self) -> LatentOptions {
        LatentOptions {
            eq_epsilon: self.eq_epsilon,
            max_pairs: self.max_pairs,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MineOutput {
    pub tree: DecisionTree,
    pub rules: RuleSet,
    /// Training rows including derived columns.
    pub train: CaseTable,
    pub test: CaseTable,
    pub test_accuracy: f64,
    pub dropped_rows: usize,
    pub warnings: Vec<String>,
}

pub fn mine(table: &CaseTable, config: &MineConfig) -> Result<MineOutput> {
    let registry = approaches();
    let approach = registry.get(&config.approach).ok_or_else(|| {
        Error::Config(format!(
            "unknown approach `{}` (available: {})",
            config.approach,
            registry.names().join(", ")
        ))
    })?;
    if !(config.eq_epsilon >= 0.0 && config.eq_epsilon.is_finite()) {
        return Err(Error::Config(
            "eq_epsilon must be a non-negative number".into(),
        ));
    }
    config.tree.validate()?;
    if table.is_degenerate() {
        return Err(Error::DegenerateLabels(format!(
            "need at least two classes including `{}`, found {:?}",
            table.target_class(),
            table.classes()
        )));
    }

    let (complete, dropped_rows) = table.drop_incomplete_rows();
    let split = train_test_split(&complete, config.split, config.seed)?;
    let latent = config.latent_options();
    let train = approach.prepare(&split.train, &latent)?;
    let test = approach.prepare(&split.test, &latent)?;

    let tree_config = TrainConfig {
        feature_mask: approach.feature_mask(),
        ..config.tree.clone()
    };
    let tree = fit(&train, &tree_config)?;
    let mut rules = extract(&tree, table.target_class());
    rules.approach = config.approach.clone();
    rules.eq_epsilon = config.eq_epsilon;
    let test_accuracy = accuracy(&rules, &test)?;

    let mut warnings: Vec<String> = train.warnings().to_vec();
    warnings.extend(rules.warnings.iter().cloned());
    log::info!(
        "{}: {} train / {} test rows, {} features, {} leaves, test accuracy {:.4}",
        config.approach,
        train.n_rows(),
        test.n_rows(),
        tree.features.len(),
        tree.n_leaves(),
        test_accuracy
    );
    Ok(MineOutput {
        tree,
        rules,
        train,
        test,
        test_accuracy,
        dropped_rows,
        warnings,
    })
}
