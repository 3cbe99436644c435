//! Flat text serialization of a [`Forest`].
//!
//! ```text
//! locfuse-forest v1 classifier 2 g1 g2 w1
//! labels lab1 lab2 outside
//! I 0 -63.5
//! L lab1
//! L outside
//! L lab2
//! ```
//!
//! The header names the kind, the tree count and the feature columns.
//! Classifiers follow it with a `labels` line. Every tree is then written
//! in pre-order, one node per line: `I <feature> <threshold>` for a split,
//! `L <label>` or `L <x> <y>` for a leaf. Floats use the shortest decimal
//! that parses back to the same double, so the round trip is exact.

use std::io::{BufRead, Write};

use super::{DecisionTree, Forest, ForestKind, Leaf, TreeNode};
use crate::error::{Error, Result};

const MAGIC: &str = "locfuse-forest";
const VERSION: &str = "v1";

fn check_token(kind: &str, s: &str) -> Result<()> {
    if s.is_empty() || s.chars().any(char::is_whitespace) {
        return Err(Error::InvalidParam(format!(
            "{kind} {s:?} cannot be written as a single token"
        )));
    }
    Ok(())
}

pub fn write_forest(forest: &Forest, mut out: impl Write) -> Result<()> {
    for c in &forest.columns {
        check_token("column", c)?;
    }
    for l in &forest.labels {
        check_token("label", l)?;
    }
    write!(out, "{MAGIC} {VERSION} {} {}", forest.kind, forest.trees.len())?;
    for c in &forest.columns {
        write!(out, " {c}")?;
    }
    writeln!(out)?;
    if forest.kind == ForestKind::Classifier {
        writeln!(out, "labels {}", forest.labels.join(" "))?;
    }
    for tree in &forest.trees {
        for node in &tree.nodes {
            match node {
                TreeNode::Split { feature, threshold, .. } => writeln!(out, "I {feature} {threshold}")?,
                TreeNode::Leaf(Leaf::Class(c)) => writeln!(out, "L {}", forest.labels[*c as usize])?,
                TreeNode::Leaf(Leaf::Point { x, y }) => writeln!(out, "L {x} {y}")?,
            }
        }
    }
    out.flush()?;
    Ok(())
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    number: u64,
}

impl<R: BufRead> Lines<R> {
    fn next_line(&mut self) -> Result<Option<String>> {
        loop {
            match self.inner.next() {
                None => return Ok(None),
                Some(line) => {
                    self.number += 1;
                    let line = line?;
                    if !line.trim().is_empty() {
                        return Ok(Some(line));
                    }
                }
            }
        }
    }

    fn expect_line(&mut self, what: &str) -> Result<String> {
        self.next_line()?
            .ok_or_else(|| Error::parse(self.number + 1, format!("unexpected end of file, expected {what}")))
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::parse(self.number, message)
    }
}

fn parse_f64(lines: &Lines<impl BufRead>, s: &str) -> Result<f64> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(lines.err(format!("bad number {s:?}"))),
    }
}

pub fn read_forest(input: impl BufRead) -> Result<Forest> {
    let mut lines = Lines {
        inner: input.lines(),
        number: 0,
    };
    let header = lines.expect_line("header")?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.len() < 5 || tokens[0] != MAGIC {
        return Err(lines.err("not a locfuse forest file"));
    }
    if tokens[1] != VERSION {
        return Err(lines.err(format!("unsupported format version {}", tokens[1])));
    }
    let kind = match tokens[2] {
        "classifier" => ForestKind::Classifier,
        "regressor" => ForestKind::Regressor2D,
        other => return Err(lines.err(format!("unknown forest kind {other:?}"))),
    };
    let n_trees: usize = tokens[3]
        .parse()
        .map_err(|_| lines.err(format!("bad tree count {:?}", tokens[3])))?;
    let columns: Vec<String> = tokens[4..].iter().map(|s| s.to_string()).collect();

    let labels: Vec<String> = if kind == ForestKind::Classifier {
        let line = lines.expect_line("labels line")?;
        let mut parts = line.split_whitespace();
        if parts.next() != Some("labels") {
            return Err(lines.err("expected labels line"));
        }
        parts.map(str::to_string).collect()
    } else {
        Vec::new()
    };

    let mut trees = Vec::with_capacity(n_trees);
    for _ in 0..n_trees {
        let mut nodes = Vec::new();
        // number of subtrees still to read for this tree
        let mut open = 1usize;
        while open > 0 {
            let line = lines.expect_line("tree node")?;
            let parts: Vec<&str> = line.split_whitespace().collect();
            match parts.as_slice() {
                ["I", feature, threshold] => {
                    let feature: usize = feature.parse().map_err(|_| lines.err("bad feature index"))?;
                    if feature >= columns.len() {
                        return Err(lines.err(format!("feature index {feature} out of range")));
                    }
                    let threshold = parse_f64(&lines, threshold)?;
                    nodes.push(TreeNode::Split {
                        feature,
                        threshold,
                        left: 0,
                        right: 0,
                    });
                    open += 1;
                }
                ["L", label] if kind == ForestKind::Classifier => {
                    let c = labels
                        .iter()
                        .position(|l| l == label)
                        .ok_or_else(|| lines.err(format!("unknown label {label:?}")))?;
                    nodes.push(TreeNode::Leaf(Leaf::Class(c as u32)));
                    open -= 1;
                }
                ["L", x, y] if kind == ForestKind::Regressor2D => {
                    let x = parse_f64(&lines, x)?;
                    let y = parse_f64(&lines, y)?;
                    nodes.push(TreeNode::Leaf(Leaf::Point { x, y }));
                    open -= 1;
                }
                _ => return Err(lines.err(format!("malformed node line {line:?}"))),
            }
        }
        trees.push(DecisionTree::from_preorder(nodes));
    }
    if lines.next_line()?.is_some() {
        return Err(lines.err("trailing content after the last tree"));
    }
    Forest::from_parts(kind, trees, columns, labels).map_err(|e| lines.err(e.to_string()))
}
