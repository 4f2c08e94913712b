//! Seeded train/test partitioning.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::table::CaseTable;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct SplitTables {
    pub train: CaseTable,
    pub test: CaseTable,
    pub seed: u64,
    pub ratio: f64,
}

/// Shuffles rows with a ChaCha8 permutation seeded by `seed`; the first `ceil(ratio * n)`
/// rows form the training set. Both partitions keep at least one row.
pub fn train_test_split(table: &CaseTable, ratio: f64, seed: u64) -> Result<SplitTables> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Config(format!(
            "split ratio {ratio} is outside (0, 1)"
        )));
    }
    let n = table.n_rows();
    if n < 2 {
        return Err(Error::Config(format!("cannot split a table with {n} rows")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = ((ratio * n as f64).ceil() as usize).clamp(1, n - 1);
    Ok(SplitTables {
        train: table.select_rows(&order[..n_train]),
        test: table.select_rows(&order[n_train..]),
        seed,
        ratio,
    })
}
