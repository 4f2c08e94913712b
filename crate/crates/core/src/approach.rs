//! Mining approaches selectable by name.

use crate::cart::FeatureMask;
use crate::error::Result;
use crate::latent::{generate_latent, LatentOptions};
use crate::registry::Registry;
use crate::tabulate::CaseTable;

pub trait Approach: Send + Sync {
    fn description(&self) -> &'static str;

    /// Columns the tree may split on.
    fn feature_mask(&self) -> FeatureMask;

    /// Adds the derived columns the approach needs.
    fn prepare(&self, table: &CaseTable, latent: &LatentOptions) -> Result<CaseTable>;
}

/// Plain tree over the base columns; finds only variable-constant conditions.
pub struct Bdt;

impl Approach for Bdt {
    fn description(&self) -> &'static str {
        "decision tree on base columns"
    }

    fn feature_mask(&self) -> FeatureMask {
        FeatureMask::BaseOnly
    }

    fn prepare(&self, table: &CaseTable, _latent: &LatentOptions) -> Result<CaseTable> {
        Ok(table.clone())
    }
}

/// Tree over base columns plus pairwise comparison columns.
pub struct Edt;

impl Approach for Edt {
    fn description(&self) -> &'static str {
        "decision tree on base and pairwise comparison columns"
    }

    fn feature_mask(&self) -> FeatureMask {
        FeatureMask::BasePlusLatent
    }

    fn prepare(&self, table: &CaseTable, latent: &LatentOptions) -> Result<CaseTable> {
        Ok(generate_latent(table, latent)?.0)
    }
}

pub fn approaches() -> Registry<dyn Approach> {
    let mut r: Registry<dyn Approach> = Registry::new();
    r.register("bdt", Box::new(Bdt));
    r.register("edt", Box::new(Edt));
    r
}
