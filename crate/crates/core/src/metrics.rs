//! Accuracy on held-out rows and condition-level recall/precision/F1 against a declared rule.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::latent::ComparisonOp;
use crate::rules::{parse_rule_text, Condition, Operand, RuleSet};
use crate::tabulate::CaseTable;

/// The declared decision logic: a conjunction for one target class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub target_class: String,
    pub conditions: Vec<Condition>,
}

impl GroundTruth {
    pub fn new(target_class: impl Into<String>, conditions: Vec<Condition>) -> Result<Self> {
        if conditions.is_empty() {
            return Err(Error::Config(
                "ground truth needs at least one condition".into(),
            ));
        }
        Ok(GroundTruth {
            target_class: target_class.into(),
            conditions: conditions.iter().map(Condition::normalize).collect(),
        })
    }

    /// Parses `c1 AND c2 ...`, with or without the `WHEN .. THEN` frame.
    pub fn parse(target_class: impl Into<String>, text: &str) -> Result<Self> {
        GroundTruth::new(target_class, parse_rule_text(text)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: GroundTruth = serde_json::from_str(text)?;
        GroundTruth::new(raw.target_class, raw.conditions)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ground truth serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scope {
    /// Only the highest-support rule.
    #[default]
    Dominant,
    AllRules,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchOptions {
    /// Largest constant difference for two variable-constant conditions to match.
    pub const_eps: f64,
    /// Treat `<`/`<=` and `>`/`>=` as the same operator between variables.
    pub strictness_tolerant: bool,
    pub scope: Scope,
}

impl Default for MatchOptions {
    fn default() -> Self {
        MatchOptions {
            const_eps: 1e-9,
            strictness_tolerant: false,
            scope: Scope::Dominant,
        }
    }
}

/// Whether a discovered condition counts as a ground-truth condition. Both are normalized
/// first; unary and binary conditions never match each other.
pub fn condition_match(discovered: &Condition, truth: &Condition, opts: &MatchOptions) -> bool {
    let (d, t) = (discovered.normalize(), truth.normalize());
    if d.lhs != t.lhs {
        return false;
    }
    match (&d.rhs, &t.rhs) {
        (Operand::Variable(a), Operand::Variable(b)) => {
            a == b
                && (d.op == t.op || (opts.strictness_tolerant && d.op.relaxed() == t.op.relaxed()))
        }
        (Operand::Constant(a), Operand::Constant(b)) => {
            d.direction() == t.direction() && (a - b).abs() <= opts.const_eps
        }
        _ => false,
    }
}

/// Fraction of rows whose rule-set verdict agrees with their label.
pub fn accuracy(rs: &RuleSet, test: &CaseTable) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::Eval("accuracy of an empty test table".into()));
    }
    let verdicts = rs.classify_table(test)?;
    let correct = verdicts
        .iter()
        .enumerate()
        .filter(|(i, &fired)| fired == (test.labels()[*i] == rs.class))
        .count();
    Ok(correct as f64 / test.n_rows() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum F1 {
    Defined(f64),
    /// Precision and recall are both zero.
    Undefined,
}

impl F1 {
    pub fn from_pr(precision: f64, recall: f64) -> Self {
        if precision + recall == 0.0 {
            F1::Undefined
        } else {
            F1::Defined(2.0 * precision * recall / (precision + recall))
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            F1::Defined(v) => Some(v),
            F1::Undefined => None,
        }
    }
}

impl Serialize for F1 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            F1::Defined(v) => s.serialize_f64(*v),
            F1::Undefined => s.serialize_str("U"),
        }
    }
}

impl<'de> Deserialize<'de> for F1 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(F1::Defined(v)),
            Repr::Text(t) if t == "U" => Ok(F1::Undefined),
            Repr::Text(t) => Err(serde::de::Error::custom(format!(
                "unexpected F1 value `{t}`"
            ))),
        }
    }
}

impl fmt::Display for F1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            F1::Defined(v) => f.write_str(&truncate2(*v)),
            F1::Undefined => f.write_str("U"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub discovered: String,
    pub ground_truth: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: Option<f64>,
    pub recall: f64,
    pub precision: f64,
    pub f1: F1,
    pub relevant_discovered: usize,
    pub discovered_total: usize,
    pub ground_truth_total: usize,
    pub matched_conditions: Vec<MatchedPair>,
    pub notes: Vec<String>,
    pub warnings: Vec<String>,
}

/// Distinct normalized conditions of the scored rules.
fn discovered_conditions(rs: &RuleSet, scope: Scope) -> Vec<Condition> {
    let rules: Vec<_> = match scope {
        Scope::Dominant => rs.dominant_rule().into_iter().collect(),
        Scope::AllRules => rs.rules.iter().collect(),
    };
    let mut out: Vec<Condition> = Vec::new();
    for c in rules
        .iter()
        .flat_map(|r| &r.conditions)
        .map(Condition::normalize)
    {
        if !out.contains(&c) {
            out.push(c);
        }
    }
    out
}

/// Maximum bipartite matching (augmenting paths); returns `truth_of[d]` per discovered item.
fn max_matching(edges: &[Vec<usize>], n_truth: usize) -> Vec<Option<usize>> {
    fn augment(
        d: usize,
        edges: &[Vec<usize>],
        seen: &mut [bool],
        owner: &mut [Option<usize>],
    ) -> bool {
        for &t in &edges[d] {
            if seen[t] {
                continue;
            }
            seen[t] = true;
            if owner[t].is_none_or(|o| augment(o, edges, seen, owner)) {
                owner[t] = Some(d);
                return true;
            }
        }
        false
    }
    let mut owner = vec![None; n_truth];
    for d in 0..edges.len() {
        let mut seen = vec![false; n_truth];
        augment(d, edges, &mut seen, &mut owner);
    }
    let mut truth_of = vec![None; edges.len()];
    for (t, o) in owner.iter().enumerate() {
        if let Some(d) = o {
            truth_of[*d] = Some(t);
        }
    }
    truth_of
}

/// Condition-level scores; each ground-truth condition is credited at most once.
pub fn score(rs: &RuleSet, gt: &GroundTruth, opts: &MatchOptions) -> Result<MetricsReport> {
    if rs.class != gt.target_class {
        return Err(Error::ClassMismatch {
            rules: rs.class.clone(),
            truth: gt.target_class.clone(),
        });
    }
    let discovered = discovered_conditions(rs, opts.scope);
    let edges: Vec<Vec<usize>> = discovered
        .iter()
        .map(|d| {
            (0..gt.conditions.len())
                .filter(|&t| condition_match(d, &gt.conditions[t], opts))
                .collect()
        })
        .collect();
    let truth_of = max_matching(&edges, gt.conditions.len());
    let matched_conditions: Vec<MatchedPair> = truth_of
        .iter()
        .enumerate()
        .filter_map(|(d, t)| {
            t.map(|t| MatchedPair {
                discovered: discovered[d].to_string(),
                ground_truth: gt.conditions[t].to_string(),
            })
        })
        .collect();
    let relevant = matched_conditions.len();

    let mut warnings = Vec::new();
    let precision = if discovered.is_empty() {
        warnings.push("no discovered conditions; precision set to 0".to_string());
        0.0
    } else {
        relevant as f64 / discovered.len() as f64
    };
    let recall = relevant as f64 / gt.conditions.len() as f64;
    let mut notes =
        vec!["precision = relevant discovered conditions / all discovered conditions".to_string()];
    if opts.strictness_tolerant {
        notes.push("strictness-tolerant matching: < and <= (and > and >=) treated as equal".into());
    }
    Ok(MetricsReport {
        accuracy: None,
        recall,
        precision,
        f1: F1::from_pr(precision, recall),
        relevant_discovered: relevant,
        discovered_total: discovered.len(),
        ground_truth_total: gt.conditions.len(),
        matched_conditions,
        notes,
        warnings,
    })
}

/// [`score`] plus accuracy on `test` when given.
pub fn evaluate(
    rs: &RuleSet,
    gt: &GroundTruth,
    test: Option<&CaseTable>,
    opts: &MatchOptions,
) -> Result<MetricsReport> {
    let mut report = score(rs, gt, opts)?;
    if let Some(t) = test {
        report.accuracy = Some(accuracy(rs, t)?);
    }
    Ok(report)
}

/// Two decimals, truncated, trailing zeros dropped: `1`, `0.14`, `0.16`.
pub fn truncate2(v: f64) -> String {
    let hundredths = (v * 100.0 + 1e-9).floor() as i64;
    let text = format!("{}.{:02}", hundredths / 100, hundredths % 100);
    text.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Whole percent, truncated: `100%`, `98%`.
pub fn percent(v: f64) -> String {
    format!("{}%", (v * 100.0 + 1e-9).floor() as i64)
}

pub const TABLE_HEADER: [&str; 5] = ["Rule", "Accuracy", "Recall", "Precision", "F1 Measure"];

impl MetricsReport {
    /// Cells of one results-table row; accuracy prints `-` when not measured.
    pub fn table_cells(&self, label: &str) -> [String; 5] {
        [
            label.to_string(),
            self.accuracy.map(percent).unwrap_or_else(|| "-".into()),
            truncate2(self.recall),
            truncate2(self.precision),
            self.f1.to_string(),
        ]
    }

    pub fn table_row(&self, label: &str) -> String {
        self.table_cells(label).join("  ")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Ground truth of the running example: every measure lies within its range pair.
pub fn synthetic_ground_truth(n_measures: usize, target_class: &str) -> GroundTruth {
    let conditions = (0..n_measures)
        .flat_map(|i| {
            let m = format!("meas{i}");
            [
                Condition::vars(m.clone(), ComparisonOp::Ge, format!("range{}", 2 * i)),
                Condition::vars(m, ComparisonOp::Le, format!("range{}", 2 * i + 1)),
            ]
        })
        .collect();
    GroundTruth::new(target_class, conditions).expect("non-empty for n_measures > 0")
}
