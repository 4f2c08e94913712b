use std::fmt::Write;

use super::{DecisionTree, Node};
use crate::registry::Registry;

pub trait TreeRenderer: Send + Sync {
    fn render(&self, tree: &DecisionTree) -> String;
}

/// Built-in renderers: `ascii` and `dot`.
pub fn renderers() -> Registry<dyn TreeRenderer> {
    let mut r: Registry<dyn TreeRenderer> = Registry::new();
    r.register("ascii", Box::new(AsciiRenderer));
    r.register("dot", Box::new(DotRenderer));
    r
}

fn leaf_text(tree: &DecisionTree, node: &Node) -> String {
    format!(
        "{} (n={})",
        tree.class_name(node.majority()),
        node.n_samples()
    )
}

/// Node and edge labels for an internal node.
fn split_labels(tree: &DecisionTree, feature: usize, threshold: f64) -> (String, String, String) {
    let def = &tree.features[feature];
    if def.is_latent() {
        (def.to_string(), "false".into(), "true".into())
    } else {
        (
            def.to_string(),
            format!("<= {threshold}"),
            format!("> {threshold}"),
        )
    }
}

pub struct AsciiRenderer;

impl AsciiRenderer {
    fn node(&self, tree: &DecisionTree, index: usize, prefix: &str, out: &mut String) {
        let Node::Internal {
            feature,
            threshold,
            left,
            right,
            ..
        } = &tree.nodes[index]
        else {
            return;
        };
        let (_, l, r) = split_labels(tree, *feature, *threshold);
        for (child, edge, last) in [(*left, l, false), (*right, r, true)] {
            let (branch, indent) = if last {
                ("└── ", "    ")
            } else {
                ("├── ", "│   ")
            };
            let node = &tree.nodes[child];
            let text = match node {
                Node::Leaf { .. } => leaf_text(tree, node),
                Node::Internal {
                    feature, threshold, ..
                } => split_labels(tree, *feature, *threshold).0,
            };
            let _ = writeln!(out, "{prefix}{branch}{edge}: {text}");
            self.node(tree, child, &format!("{prefix}{indent}"), out);
        }
    }
}

impl TreeRenderer for AsciiRenderer {
    fn render(&self, tree: &DecisionTree) -> String {
        let mut out = String::new();
        match tree.root() {
            root @ Node::Leaf { .. } => {
                let _ = writeln!(out, "{}", leaf_text(tree, root));
            }
            Node::Internal {
                feature, threshold, ..
            } => {
                let _ = writeln!(out, "{}", split_labels(tree, *feature, *threshold).0);
                self.node(tree, 0, "", &mut out);
            }
        }
        out
    }
}

pub struct DotRenderer;

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

impl TreeRenderer for DotRenderer {
    fn render(&self, tree: &DecisionTree) -> String {
        let mut out = String::from("digraph tree {\n  node [shape=box, fontname=\"Helvetica\"];\n");
        for (i, node) in tree.nodes.iter().enumerate() {
            let label = match node {
                Node::Leaf { .. } => leaf_text(tree, node),
                Node::Internal {
                    feature, threshold, ..
                } => split_labels(tree, *feature, *threshold).0,
            };
            let _ = writeln!(out, "  n{i} [label=\"{}\"];", dot_escape(&label));
        }
        for (i, node) in tree.nodes.iter().enumerate() {
            if let Node::Internal {
                feature,
                threshold,
                left,
                right,
                ..
            } = node
            {
                let (_, l, r) = split_labels(tree, *feature, *threshold);
                let _ = writeln!(out, "  n{i} -> n{left} [label=\"{}\"];", dot_escape(&l));
                let _ = writeln!(out, "  n{i} -> n{right} [label=\"{}\"];", dot_escape(&r));
            }
        }
        out.push_str("}\n");
        out
    }
}
