use serde::{Deserialize, Serialize};

use super::split::{best_split, class_counts};
use super::{Dataset, FeatureMask, TrainConfig};
use crate::error::{Error, Result};
use crate::latent::FeatureDef;
use crate::tabulate::{CaseTable, RowLookup};

pub const TREE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Internal {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        counts: Vec<usize>,
    },
    Leaf {
        counts: Vec<usize>,
    },
}

impl Node {
    /// Class counts of the training rows that reached this node.
    pub fn counts(&self) -> &[usize] {
        match self {
            Node::Internal { counts, .. } | Node::Leaf { counts } => counts,
        }
    }

    pub fn n_samples(&self) -> usize {
        self.counts().iter().sum()
    }

    /// Majority class index; ties go to the lowest index, i.e. the lexicographically
    /// smallest label.
    pub fn majority(&self) -> usize {
        let counts = self.counts();
        let mut best = 0;
        for (i, &c) in counts.iter().enumerate() {
            if c > counts[best] {
                best = i;
            }
        }
        best
    }
}

/// A fitted tree. Node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub version: u32,
    pub features: Vec<FeatureDef>,
    pub classes: Vec<String>,
    pub nodes: Vec<Node>,
    /// Digest of `features`, see [`CaseTable::fingerprint`].
    pub trained_on: String,
    pub config: TrainConfig,
}

/// Grows a tree on every mask-admitted column of `table`.
pub fn fit(table: &CaseTable, config: &TrainConfig) -> Result<DecisionTree> {
    config.validate()?;
    if table.is_empty() {
        return Err(Error::DegenerateLabels(
            "cannot fit a tree on an empty table".into(),
        ));
    }
    let data = Dataset::from_table(table, config.feature_mask)?;
    Ok(fit_dataset(&data, config))
}

pub(crate) fn fit_dataset(data: &Dataset<'_>, config: &TrainConfig) -> DecisionTree {
    let mut nodes = Vec::new();
    // Explicit stack instead of recursion: (node slot, rows, depth).
    let root_rows: Vec<usize> = (0..data.n_rows()).collect();
    let mut stack = vec![(push_leaf(&mut nodes, data, &root_rows), root_rows, 0usize)];
    while let Some((slot, rows, depth)) = stack.pop() {
        if config.max_depth.is_some_and(|m| depth >= m) {
            continue;
        }
        let Some(split) = best_split(data, &rows, config) else {
            continue;
        };
        let column = data.columns[split.feature];
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&r| column[r] <= split.threshold);
        debug_assert_eq!(left_rows.len(), split.left_count);
        let left = push_leaf(&mut nodes, data, &left_rows);
        let right = push_leaf(&mut nodes, data, &right_rows);
        let counts = nodes[slot].counts().to_vec();
        nodes[slot] = Node::Internal {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
            counts,
        };
        stack.push((right, right_rows, depth + 1));
        stack.push((left, left_rows, depth + 1));
    }
    DecisionTree {
        version: TREE_VERSION,
        trained_on: CaseTable::fingerprint(&data.features),
        features: data.features.clone(),
        classes: data.classes.clone(),
        nodes,
        config: config.clone(),
    }
}

fn push_leaf(nodes: &mut Vec<Node>, data: &Dataset<'_>, rows: &[usize]) -> usize {
    nodes.push(Node::Leaf {
        counts: class_counts(&data.labels, rows, data.classes.len()),
    });
    nodes.len() - 1
}

impl DecisionTree {
    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn feature_mask(&self) -> FeatureMask {
        self.config.feature_mask
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    pub fn depth(&self) -> usize {
        fn go(t: &DecisionTree, i: usize) -> usize {
            match &t.nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Internal { left, right, .. } => 1 + go(t, *left).max(go(t, *right)),
            }
        }
        go(self, 0)
    }

    pub fn class_name(&self, index: usize) -> &str {
        &self.classes[index]
    }

    fn walk(&self, mut value: impl FnMut(usize) -> Result<f64>) -> Result<usize> {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { .. } => return Ok(i),
                Node::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    i = if value(*feature)? <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
            }
        }
    }

    /// Index of the leaf `row` reaches.
    pub fn leaf_for(&self, row: &impl RowLookup) -> Result<usize> {
        self.walk(|f| {
            let name = self.features[f].to_string();
            row.value(&name)
                .ok_or_else(|| Error::Schema(format!("row has no value for feature `{name}`")))
        })
    }

    pub fn predict(&self, row: &impl RowLookup) -> Result<&str> {
        let leaf = self.leaf_for(row)?;
        Ok(self.class_name(self.nodes[leaf].majority()))
    }

    /// Leaf index per table row. Every tree feature must be a column of `table`.
    pub fn leaves_for_table(&self, table: &CaseTable) -> Result<Vec<usize>> {
        let columns = self
            .features
            .iter()
            .map(|def| {
                let name = def.to_string();
                table
                    .column(&name)
                    .map(|c| c.values.as_slice())
                    .ok_or_else(|| Error::Schema(format!("table has no column `{name}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        (0..table.n_rows())
            .map(|r| {
                self.walk(|f| {
                    let v = columns[f][r];
                    if v.is_nan() {
                        Err(Error::Schema(format!(
                            "case `{}` has no value for `{}`",
                            table.case_ids()[r],
                            self.features[f]
                        )))
                    } else {
                        Ok(v)
                    }
                })
            })
            .collect()
    }

    pub fn predict_table(&self, table: &CaseTable) -> Result<Vec<&str>> {
        Ok(self
            .leaves_for_table(table)?
            .into_iter()
            .map(|leaf| self.class_name(self.nodes[leaf].majority()))
            .collect())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tree serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let tree: DecisionTree = serde_json::from_str(text)?;
        if tree.version != TREE_VERSION {
            return Err(Error::Version {
                found: tree.version,
                expected: TREE_VERSION,
            });
        }
        tree.check()?;
        Ok(tree)
    }

    fn check(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::Schema("tree has no nodes".into()));
        }
        for node in &self.nodes {
            if node.counts().len() != self.classes.len() {
                return Err(Error::Schema(
                    "node counts do not match the class list".into(),
                ));
            }
            if let Node::Internal {
                feature,
                left,
                right,
                ..
            } = node
            {
                if *feature >= self.features.len()
                    || *left >= self.nodes.len()
                    || *right >= self.nodes.len()
                {
                    return Err(Error::Schema("node refers past the end of the tree".into()));
                }
            }
        }
        if CaseTable::fingerprint(&self.features) != self.trained_on {
            return Err(Error::Schema("feature fingerprint does not match".into()));
        }
        Ok(())
    }
}
