//! Conjunctive rules read off decision-tree paths.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cart::{DecisionTree, Node};
use crate::error::{Error, Result};
use crate::latent::{ComparisonOp, FeatureDef};
use crate::tabulate::{CaseTable, RowLookup};

pub const RULESET_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Operand {
    Variable(String),
    Constant(f64),
}

impl Operand {
    pub fn var(name: impl Into<String>) -> Self {
        Operand::Variable(name.into())
    }

    pub fn is_variable(&self) -> bool {
        matches!(self, Operand::Variable(_))
    }

    pub fn as_variable(&self) -> Option<&str> {
        match self {
            Operand::Variable(v) => Some(v),
            Operand::Constant(_) => None,
        }
    }

    fn value(&self, row: &impl RowLookup) -> Result<f64> {
        match self {
            Operand::Constant(c) => Ok(*c),
            Operand::Variable(v) => row
                .value(v)
                .ok_or_else(|| Error::Eval(format!("no value for variable `{v}`"))),
        }
    }

    fn parse(token: &str) -> Result<Self> {
        if token.is_empty() {
            return Err(Error::ConditionParse("empty operand".into()));
        }
        match token.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Operand::Constant(v)),
            Ok(_) => Err(Error::ConditionParse(format!(
                "non-finite constant `{token}`"
            ))),
            Err(_) if token.chars().any(char::is_whitespace) => Err(Error::ConditionParse(
                format!("malformed operand `{token}`"),
            )),
            Err(_) => Ok(Operand::Variable(token.to_string())),
        }
    }
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Variable(v) => f.write_str(v),
            // Rust's float Display is the shortest text that parses back to the same value.
            Operand::Constant(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum OperandRepr {
    Var {
        var: String,
    },
    Const {
        #[serde(rename = "const")]
        value: f64,
    },
    Bare(String),
    Number(f64),
}

impl Serialize for Operand {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Operand::Variable(v) => OperandRepr::Var { var: v.clone() },
            Operand::Constant(c) => OperandRepr::Const { value: *c },
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Operand {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(match OperandRepr::deserialize(d)? {
            OperandRepr::Var { var } | OperandRepr::Bare(var) => Operand::Variable(var),
            OperandRepr::Const { value } | OperandRepr::Number(value) => Operand::Constant(value),
        })
    }
}

/// Side of an interval a condition bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Upper,
    Lower,
    Equal,
    NotEqual,
}

impl Direction {
    pub fn of(op: ComparisonOp) -> Self {
        match op {
            ComparisonOp::Lt | ComparisonOp::Le => Direction::Upper,
            ComparisonOp::Gt | ComparisonOp::Ge => Direction::Lower,
            ComparisonOp::Eq => Direction::Equal,
            ComparisonOp::Ne => Direction::NotEqual,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub lhs: Operand,
    pub op: ComparisonOp,
    pub rhs: Operand,
}

impl Condition {
    pub fn new(lhs: Operand, op: ComparisonOp, rhs: Operand) -> Self {
        Condition { lhs, op, rhs }
    }

    pub fn vars(lhs: impl Into<String>, op: ComparisonOp, rhs: impl Into<String>) -> Self {
        Condition::new(Operand::var(lhs), op, Operand::var(rhs))
    }

    pub fn constant(var: impl Into<String>, op: ComparisonOp, value: f64) -> Self {
        Condition::new(Operand::var(var), op, Operand::Constant(value))
    }

    /// Both operands are variables.
    pub fn is_binary(&self) -> bool {
        self.lhs.is_variable() && self.rhs.is_variable()
    }

    pub fn is_unary(&self) -> bool {
        self.lhs.is_variable() != self.rhs.is_variable()
    }

    pub fn direction(&self) -> Direction {
        Direction::of(self.op)
    }

    pub fn negate(&self) -> Self {
        Condition::new(self.lhs.clone(), self.op.negate(), self.rhs.clone())
    }

    /// Canonical representative: the variable goes left of a constant, and of two variables
    /// the lexicographically smaller one goes left.
    pub fn normalize(&self) -> Self {
        let swap = match (&self.lhs, &self.rhs) {
            (Operand::Constant(_), Operand::Variable(_)) => true,
            (Operand::Variable(a), Operand::Variable(b)) => a > b,
            _ => false,
        };
        if swap {
            Condition::new(self.rhs.clone(), self.op.swap(), self.lhs.clone())
        } else {
            self.clone()
        }
    }

    /// Normal form of the statement `(self) = asserted`.
    pub fn normalize_asserted(&self, asserted: bool) -> Self {
        if asserted {
            self.normalize()
        } else {
            self.negate().normalize()
        }
    }

    /// Evaluates the condition on one row. `eq_epsilon` applies only between two variables,
    /// mirroring how latent columns are computed.
    pub fn eval(&self, row: &impl RowLookup, eq_epsilon: f64) -> Result<bool> {
        let a = self.lhs.value(row)?;
        let b = self.rhs.value(row)?;
        let eps = if self.is_binary() { eq_epsilon } else { 0.0 };
        Ok(self.op.eval(a, b, eps))
    }

    /// Parses `lhs op rhs`, optionally parenthesized, negated as `!(..)`, or followed by
    /// `= true` / `= false`.
    pub fn parse(text: &str) -> Result<Self> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let mut body = compact.as_str();
        let mut asserted = true;
        for (suffix, value) in [
            ("==true", true),
            ("==false", false),
            ("=true", true),
            ("=false", false),
        ] {
            if let Some(rest) = body.strip_suffix(suffix) {
                body = rest;
                asserted = value;
                break;
            }
        }
        if let Some(inner) = body.strip_prefix("!(").and_then(|b| b.strip_suffix(')')) {
            body = inner;
            asserted = !asserted;
        } else if let Some(inner) = body.strip_prefix('(').and_then(|b| b.strip_suffix(')')) {
            body = inner;
        }
        let start = body
            .find(['<', '>', '=', '!'])
            .ok_or_else(|| Error::ConditionParse(format!("no comparison operator in `{text}`")))?;
        let len = if body[start + 1..].starts_with('=') {
            2
        } else {
            1
        };
        let op: ComparisonOp = body[start..start + len]
            .parse()
            .map_err(|_| Error::ConditionParse(format!("bad operator in `{text}`")))?;
        let lhs = Operand::parse(&body[..start])?;
        let rhs = Operand::parse(&body[start + len..])?;
        if !lhs.is_variable() && !rhs.is_variable() {
            return Err(Error::ConditionParse(format!(
                "`{text}` compares two constants"
            )));
        }
        let c = Condition::new(lhs, op, rhs);
        Ok(if asserted { c } else { c.negate() })
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.lhs, self.op, self.rhs)
    }
}

impl std::str::FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Condition::parse(s)
    }
}

/// Parses a rule written as `WHEN c1 AND c2 ... THEN ...`, as in published rule boxes.
/// Math delimiters (`$`) and `\colorbox{..}{..}` highlighting are ignored.
pub fn parse_rule_text(text: &str) -> Result<Vec<Condition>> {
    let mut body = text.trim();
    if let Some(rest) = body.strip_prefix("WHEN") {
        body = rest;
    }
    if let Some(pos) = body.find("THEN") {
        body = &body[..pos];
    }
    let cleaned = body
        .replace("\\colorbox{yellow}", "")
        .replace(['$', '{', '}'], "");
    let cleaned = cleaned.trim().trim_end_matches(',');
    if cleaned.trim() == "true" {
        return Ok(Vec::new());
    }
    cleaned.split(" AND ").map(Condition::parse).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjunctiveRule {
    pub conditions: Vec<Condition>,
    pub class: String,
    /// Training rows of `class` at the rule's leaf.
    pub support: usize,
    /// All training rows at the rule's leaf.
    pub covered: usize,
    pub training_accuracy: f64,
    pub leaf: usize,
}

impl ConjunctiveRule {
    pub fn matches(&self, row: &impl RowLookup, eq_epsilon: f64) -> Result<bool> {
        for c in &self.conditions {
            if !c.eval(row, eq_epsilon)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl fmt::Display for ConjunctiveRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("WHEN ")?;
        if self.conditions.is_empty() {
            f.write_str("true")?;
        }
        for (i, c) in self.conditions.iter().enumerate() {
            if i > 0 {
                f.write_str(" AND ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(" THEN Y=1")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleStyle {
    /// The dominant rule only.
    Dominant,
    /// Every rule, joined by `OR`.
    Dnf,
}

/// Disjunction of the rules describing one class, highest support first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleSet {
    pub version: u32,
    pub approach: String,
    pub class: String,
    pub eq_epsilon: f64,
    pub rules: Vec<ConjunctiveRule>,
    pub dominant: Option<usize>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl RuleSet {
    pub fn dominant_rule(&self) -> Option<&ConjunctiveRule> {
        self.dominant.map(|i| &self.rules[i])
    }

    /// True when any rule fires on `row`.
    pub fn classify(&self, row: &impl RowLookup) -> Result<bool> {
        for r in &self.rules {
            if r.matches(row, self.eq_epsilon)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    pub fn classify_table(&self, table: &CaseTable) -> Result<Vec<bool>> {
        (0..table.n_rows())
            .map(|i| self.classify(&table.row(i)))
            .collect()
    }

    pub fn render(&self, style: RuleStyle) -> String {
        match style {
            RuleStyle::Dominant => match self.dominant_rule() {
                Some(r) => r.to_string(),
                None => "WHEN false THEN Y=1".into(),
            },
            RuleStyle::Dnf if self.rules.is_empty() => "WHEN false THEN Y=1".into(),
            RuleStyle::Dnf => self
                .rules
                .iter()
                .map(|r| r.to_string())
                .collect::<Vec<_>>()
                .join(" OR "),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("rule set serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rs: RuleSet = serde_json::from_str(text)?;
        if rs.version != RULESET_VERSION {
            return Err(Error::Version {
                found: rs.version,
                expected: RULESET_VERSION,
            });
        }
        if rs.dominant.is_some_and(|d| d >= rs.rules.len()) {
            return Err(Error::Schema("dominant rule index out of range".into()));
        }
        Ok(rs)
    }
}

/// Condition for taking the left (`left = true`) or right branch of a split.
fn edge_condition(def: &FeatureDef, threshold: f64, left: bool) -> Condition {
    match def {
        FeatureDef::Latent { lhs, op, rhs } => {
            // Latent cells are 0/1, so the left branch is the comparison being false.
            let op = if left { op.negate() } else { *op };
            Condition::vars(lhs.clone(), op, rhs.clone())
        }
        FeatureDef::Base(name) => {
            let op = if left {
                ComparisonOp::Le
            } else {
                ComparisonOp::Gt
            };
            Condition::constant(name.clone(), op, threshold)
        }
    }
}

/// Keeps the tighter of two bounds on the same side; strict wins at equal bounds.
fn tighter(a: &Condition, b: &Condition) -> Option<Condition> {
    if a.lhs != b.lhs || a.direction() != b.direction() {
        return None;
    }
    let strict = |op| matches!(op, ComparisonOp::Lt | ComparisonOp::Gt);
    match (a.direction(), &a.rhs, &b.rhs) {
        (Direction::Upper | Direction::Lower, Operand::Constant(x), Operand::Constant(y)) => {
            let upper = a.direction() == Direction::Upper;
            Some(if x == y {
                if strict(a.op) {
                    a.clone()
                } else {
                    b.clone()
                }
            } else if (x < y) == upper {
                a.clone()
            } else {
                b.clone()
            })
        }
        (Direction::Upper | Direction::Lower, Operand::Variable(x), Operand::Variable(y))
            if x == y =>
        {
            Some(if strict(a.op) { a.clone() } else { b.clone() })
        }
        _ if a == b => Some(a.clone()),
        _ => None,
    }
}

/// Normalizes, then merges redundant bounds, keeping each group at its first position.
pub fn simplify(conditions: &[Condition]) -> Vec<Condition> {
    let mut out: Vec<Condition> = Vec::new();
    for c in conditions.iter().map(Condition::normalize) {
        match out.iter().position(|o| tighter(o, &c).is_some()) {
            Some(i) => out[i] = tighter(&out[i], &c).expect("checked above"),
            None => out.push(c),
        }
    }
    out
}

/// One rule per leaf predicting `target`.
pub fn extract(tree: &DecisionTree, target: &str) -> RuleSet {
    let mut rules = Vec::new();
    let target_idx = tree.classes.iter().position(|c| c == target);
    let mut stack: Vec<(usize, Vec<Condition>)> = vec![(0, Vec::new())];
    while let Some((i, path)) = stack.pop() {
        match &tree.nodes[i] {
            Node::Internal {
                feature,
                threshold,
                left,
                right,
                ..
            } => {
                let def = &tree.features[*feature];
                let mut r = path.clone();
                r.push(edge_condition(def, *threshold, false));
                stack.push((*right, r));
                let mut l = path;
                l.push(edge_condition(def, *threshold, true));
                stack.push((*left, l));
            }
            leaf @ Node::Leaf { counts } => {
                let Some(t) = target_idx else { continue };
                if leaf.majority() != t {
                    continue;
                }
                let covered = leaf.n_samples();
                rules.push(ConjunctiveRule {
                    conditions: simplify(&path),
                    class: target.to_string(),
                    support: counts[t],
                    covered,
                    training_accuracy: counts[t] as f64 / covered as f64,
                    leaf: i,
                });
            }
        }
    }
    rules.sort_by(|a, b| b.support.cmp(&a.support).then(a.leaf.cmp(&b.leaf)));
    let mut warnings = Vec::new();
    if rules.is_empty() {
        let w = format!("no leaf predicts class `{target}`");
        log::warn!("{w}");
        warnings.push(w);
    }
    RuleSet {
        version: RULESET_VERSION,
        approach: String::new(),
        class: target.to_string(),
        eq_epsilon: 0.0,
        dominant: (!rules.is_empty()).then_some(0),
        rules,
        warnings,
    }
}
