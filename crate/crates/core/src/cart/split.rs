use rayon::prelude::*;

use super::{Dataset, TrainConfig};
use crate::error::{Error, Result};
use crate::latent::FeatureDef;

/// Gini impurity `1 - sum_k (n_k / n)^2`.
pub fn gini(counts: &[usize]) -> Result<f64> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(Error::Eval("Gini impurity of an empty node".into()));
    }
    Ok(gini_unchecked(counts, total))
}

pub(crate) fn gini_unchecked(counts: &[usize], total: usize) -> f64 {
    let n = total as f64;
    1.0 - counts
        .iter()
        .map(|&c| {
            let p = c as f64 / n;
            p * p
        })
        .sum::<f64>()
}

/// Impurity decrease of splitting a node of `parent` impurity into `left` and `right`,
/// each side weighted by its share of the node.
pub fn weighted_decrease(parent: f64, left: &[usize], right: &[usize]) -> f64 {
    let nl: usize = left.iter().sum();
    let nr: usize = right.iter().sum();
    let n = (nl + nr) as f64;
    parent
        - (nl as f64 / n) * gini_unchecked(left, nl)
        - (nr as f64 / n) * gini_unchecked(right, nr)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitCandidate {
    /// Index into the dataset's features.
    pub feature: usize,
    pub def: FeatureDef,
    /// Rows with `value <= threshold` go left.
    pub threshold: f64,
    pub gini_decrease: f64,
    pub left_count: usize,
    pub right_count: usize,
}

/// Midpoint between consecutive distinct values that still separates them.
pub(crate) fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid >= hi || !mid.is_finite() {
        lo
    } else {
        mid
    }
}

pub(crate) fn class_counts(labels: &[usize], rows: &[usize], n_classes: usize) -> Vec<usize> {
    let mut counts = vec![0; n_classes];
    for &r in rows {
        counts[labels[r]] += 1;
    }
    counts
}

/// Finds the split with the largest Gini decrease over all eligible features.
///
/// Thresholds sit at midpoints between consecutive distinct values. Ties go to the feature
/// that comes first, then to the smaller threshold.
pub fn best_split(
    data: &Dataset<'_>,
    rows: &[usize],
    config: &TrainConfig,
) -> Option<SplitCandidate> {
    if rows.len() < config.min_samples_split.max(2) {
        return None;
    }
    let n_classes = data.classes.len();
    let parent_counts = class_counts(&data.labels, rows, n_classes);
    let parent = gini_unchecked(&parent_counts, rows.len());
    if parent == 0.0 {
        return None;
    }

    let per_feature: Vec<Option<(Purity, SplitCandidate)>> = (0..data.features.len())
        .into_par_iter()
        .map(|f| best_for_feature(data, f, rows, &parent_counts, parent, config))
        .collect();

    // Sequential reduction keeps the tie-break independent of scheduling.
    let mut best: Option<(Purity, SplitCandidate)> = None;
    for (key, cand) in per_feature.into_iter().flatten() {
        if best.as_ref().is_none_or(|(b, _)| key.beats(b)) {
            best = Some((key, cand));
        }
    }
    best.map(|(_, c)| c)
        .filter(|b| b.gini_decrease >= config.min_impurity_decrease)
}

/// Exact comparison key `sum_l c^2 / n_l + sum_r c^2 / n_r`, stored as a fraction.
///
/// Larger means a larger Gini decrease. Kept in integers so tied candidates compare equal.
#[derive(Debug, Clone, Copy)]
struct Purity {
    num: u128,
    den: u128,
}

impl Purity {
    fn of(left: &[usize], nl: usize, right: &[usize], nr: usize) -> Self {
        let sq = |c: &[usize]| c.iter().map(|&k| (k as u128) * (k as u128)).sum::<u128>();
        let (nl, nr) = (nl as u128, nr as u128);
        Purity {
            num: sq(left) * nr + sq(right) * nl,
            den: nl * nr,
        }
    }

    fn beats(&self, other: &Purity) -> bool {
        self.num * other.den > other.num * self.den
    }
}

fn best_for_feature(
    data: &Dataset<'_>,
    feature: usize,
    rows: &[usize],
    parent_counts: &[usize],
    parent: f64,
    config: &TrainConfig,
) -> Option<(Purity, SplitCandidate)> {
    let column = data.columns[feature];
    let mut sorted: Vec<(f64, usize)> = rows.iter().map(|&r| (column[r], data.labels[r])).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));

    let n = sorted.len();
    let min_leaf = config.min_samples_leaf.max(1);
    let mut left = vec![0; parent_counts.len()];
    let mut right = parent_counts.to_vec();
    let mut best: Option<(Purity, SplitCandidate)> = None;
    for i in 0..n - 1 {
        let (value, label) = sorted[i];
        left[label] += 1;
        right[label] -= 1;
        let next = sorted[i + 1].0;
        if value == next {
            continue;
        }
        let (nl, nr) = (i + 1, n - i - 1);
        if nl < min_leaf || nr < min_leaf {
            continue;
        }
        let key = Purity::of(&left, nl, &right, nr);
        if best.as_ref().is_none_or(|(b, _)| key.beats(b)) {
            let candidate = SplitCandidate {
                feature,
                def: data.features[feature].clone(),
                threshold: midpoint(value, next),
                gini_decrease: weighted_decrease(parent, &left, &right),
                left_count: nl,
                right_count: nr,
            };
            best = Some((key, candidate));
        }
    }
    best
}
