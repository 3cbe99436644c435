//! Greedy CART-style tree induction over RSSI feature rows.

use rand::seq::index;

use super::{ForestKind, Targets};
use crate::error::{Error, Result};
use crate::seed::Rng;

/// Relative tolerance under which two candidate split scores are treated as
/// tied, and under which a split is not considered an improvement.
pub const IMPURITY_TIE_EPS: f64 = 1e-12;

pub(crate) fn tie_tolerance(v: f64) -> f64 {
    IMPURITY_TIE_EPS * (1.0 + v.abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Leaf {
    /// Index into the forest's sorted label list.
    Class(u32),
    /// Mean horizontal position of the training samples in the leaf.
    Point { x: f64, y: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TreeNode {
    /// Rows with `row[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf(Leaf),
}

/// A fitted tree stored as a pre-order node arena; `nodes[0]` is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    pub(crate) nodes: Vec<TreeNode>,
}

impl DecisionTree {
    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn leaf_for(&self, x: &[f64]) -> &Leaf {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] <= *threshold { *left } else { *right },
                TreeNode::Leaf(leaf) => return leaf,
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], i: usize) -> usize {
            match nodes[i] {
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
                TreeNode::Leaf(_) => 0,
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, TreeNode::Leaf(_))).count()
    }

    /// Rebuilds from pre-order nodes, recomputing child links.
    pub(crate) fn from_preorder(nodes: Vec<TreeNode>) -> Self {
        let mut tree = DecisionTree { nodes };
        fn relink(nodes: &mut [TreeNode], i: usize) -> usize {
            match nodes[i] {
                TreeNode::Leaf(_) => i + 1,
                TreeNode::Split { feature, threshold, .. } => {
                    let right = relink(nodes, i + 1);
                    let end = relink(nodes, right);
                    nodes[i] = TreeNode::Split {
                        feature,
                        threshold,
                        left: i + 1,
                        right,
                    };
                    end
                }
            }
        }
        relink(&mut tree.nodes, 0);
        tree
    }
}

/// Resolved tree-growing settings.
#[derive(Debug, Clone, Copy)]
pub(crate) struct GrowSettings {
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub features_per_split: usize,
}

pub(crate) fn check_rows(rows: &[Vec<f64>], n_targets: usize) -> Result<usize> {
    if rows.is_empty() {
        return Err(Error::EmptyInput("training set has no rows"));
    }
    if rows.len() != n_targets {
        return Err(Error::InvalidParam(format!(
            "{} feature rows but {} targets",
            rows.len(),
            n_targets
        )));
    }
    let width = rows[0].len();
    if width == 0 {
        return Err(Error::InvalidParam("feature rows have zero width".into()));
    }
    if let Some(bad) = rows.iter().find(|r| r.len() != width) {
        return Err(Error::WidthMismatch {
            expected: width,
            actual: bad.len(),
        });
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParam("feature rows contain non-finite values".into()));
    }
    Ok(width)
}

/// Grows one tree on `indices` (which may repeat, for bootstrap samples).
pub(crate) fn grow(
    rows: &[Vec<f64>],
    targets: &Targets,
    mut indices: Vec<usize>,
    settings: GrowSettings,
    rng: &mut Rng,
) -> DecisionTree {
    let width = rows[0].len();
    let mut builder = Builder {
        rows,
        targets,
        settings,
        width,
        rng,
        nodes: Vec::new(),
        sorted: Vec::with_capacity(indices.len()),
        left_counts: vec![0; targets.n_classes()],
        total_counts: vec![0; targets.n_classes()],
    };
    builder.build(&mut indices, 0);
    DecisionTree { nodes: builder.nodes }
}

struct Builder<'a> {
    rows: &'a [Vec<f64>],
    targets: &'a Targets,
    settings: GrowSettings,
    width: usize,
    rng: &'a mut Rng,
    nodes: Vec<TreeNode>,
    sorted: Vec<(f64, usize)>,
    left_counts: Vec<u64>,
    total_counts: Vec<u64>,
}

struct Candidate {
    feature: usize,
    threshold: f64,
    score: f64,
}

impl Builder<'_> {
    fn build(&mut self, idx: &mut [usize], depth: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(TreeNode::Leaf(Leaf::Class(0)));
        let impurity = self.node_impurity(idx);
        let can_split = impurity > 0.0
            && self.settings.max_depth.is_none_or(|d| depth < d)
            && idx.len() >= 2 * self.settings.min_samples_leaf;
        let split = if can_split { self.best_split(idx) } else { None };
        match split {
            Some(c) if c.score < impurity - tie_tolerance(impurity) => {
                let mid = partition(idx, |i| self.rows[i][c.feature] <= c.threshold);
                let (l, r) = idx.split_at_mut(mid);
                let left = self.build(l, depth + 1);
                let right = self.build(r, depth + 1);
                self.nodes[id] = TreeNode::Split {
                    feature: c.feature,
                    threshold: c.threshold,
                    left,
                    right,
                };
            }
            _ => self.nodes[id] = TreeNode::Leaf(self.leaf(idx)),
        }
        id
    }

    fn node_impurity(&mut self, idx: &[usize]) -> f64 {
        match self.targets {
            Targets::Classes { y, .. } => {
                self.total_counts.iter_mut().for_each(|c| *c = 0);
                for &i in idx {
                    self.total_counts[y[i] as usize] += 1;
                }
                let n = idx.len() as f64;
                let sum_sq: u64 = self.total_counts.iter().map(|c| c * c).sum();
                1.0 - sum_sq as f64 / (n * n)
            }
            Targets::Positions(p) => {
                let n = idx.len() as f64;
                let (sx, sy) = idx.iter().fold((0.0, 0.0), |(a, b), &i| (a + p[i].0, b + p[i].1));
                let (mx, my) = (sx / n, sy / n);
                idx.iter()
                    .map(|&i| (p[i].0 - mx).powi(2) + (p[i].1 - my).powi(2))
                    .sum::<f64>()
                    / n
            }
        }
    }

    fn leaf(&mut self, idx: &[usize]) -> Leaf {
        match self.targets {
            Targets::Classes { y, .. } => {
                self.total_counts.iter_mut().for_each(|c| *c = 0);
                for &i in idx {
                    self.total_counts[y[i] as usize] += 1;
                }
                // first maximum = lexicographically smallest label
                let mut best = 0;
                for (c, &count) in self.total_counts.iter().enumerate() {
                    if count > self.total_counts[best] {
                        best = c;
                    }
                }
                Leaf::Class(best as u32)
            }
            Targets::Positions(p) => {
                let n = idx.len() as f64;
                let (sx, sy) = idx.iter().fold((0.0, 0.0), |(a, b), &i| (a + p[i].0, b + p[i].1));
                Leaf::Point { x: sx / n, y: sy / n }
            }
        }
    }

    fn best_split(&mut self, idx: &[usize]) -> Option<Candidate> {
        let mut features = index::sample(self.rng, self.width, self.settings.features_per_split).into_vec();
        features.sort_unstable();
        let mut best: Option<Candidate> = None;
        for feature in features {
            self.sorted.clear();
            self.sorted.extend(idx.iter().map(|&i| (self.rows[i][feature], i)));
            self.sorted
                .sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            if self.sorted[0].0 == self.sorted[self.sorted.len() - 1].0 {
                continue;
            }
            let found = match self.targets {
                Targets::Classes { y, .. } => self.sweep_classes(y),
                Targets::Positions(p) => self.sweep_positions(p),
            };
            if let Some((threshold, score)) = found {
                let better = match &best {
                    None => true,
                    Some(b) => score < b.score - tie_tolerance(b.score),
                };
                if better {
                    best = Some(Candidate {
                        feature,
                        threshold,
                        score,
                    });
                }
            }
        }
        best
    }

    /// Admissible cut positions `k` (left = first `k` sorted rows), in
    /// increasing threshold order.
    fn cut_allowed(&self, k: usize) -> bool {
        let n = self.sorted.len();
        let min = self.settings.min_samples_leaf;
        k >= min && n - k >= min && self.sorted[k - 1].0 < self.sorted[k].0
    }

    fn threshold_at(&self, k: usize) -> f64 {
        midpoint(self.sorted[k - 1].0, self.sorted[k].0)
    }

    fn sweep_classes(&mut self, y: &[u32]) -> Option<(f64, f64)> {
        let n = self.sorted.len();
        self.left_counts.iter_mut().for_each(|c| *c = 0);
        // total_counts still holds this node's class counts
        let mut left_sq: u64 = 0;
        let mut right_sq: u64 = self.total_counts.iter().map(|c| c * c).sum();
        let mut best: Option<(f64, f64)> = None;
        for k in 1..n {
            let c = y[self.sorted[k - 1].1] as usize;
            let l = self.left_counts[c];
            let r = self.total_counts[c] - l;
            left_sq += 2 * l + 1;
            right_sq -= 2 * r - 1;
            self.left_counts[c] = l + 1;
            if !self.cut_allowed(k) {
                continue;
            }
            let (nl, nr) = (k as f64, (n - k) as f64);
            let score = ((nl - left_sq as f64 / nl) + (nr - right_sq as f64 / nr)) / n as f64;
            if best.is_none_or(|(_, s)| score < s - tie_tolerance(s)) {
                best = Some((self.threshold_at(k), score));
            }
        }
        best
    }

    fn sweep_positions(&mut self, p: &[(f64, f64)]) -> Option<(f64, f64)> {
        let n = self.sorted.len();
        let nf = n as f64;
        let (sx, sy) = self
            .sorted
            .iter()
            .fold((0.0, 0.0), |(a, b), &(_, i)| (a + p[i].0, b + p[i].1));
        let (mx, my) = (sx / nf, sy / nf);
        let centered = |i: usize| (p[i].0 - mx, p[i].1 - my);
        let (mut tx, mut ty, mut tq) = (0.0, 0.0, 0.0);
        for &(_, i) in &self.sorted {
            let (dx, dy) = centered(i);
            tx += dx;
            ty += dy;
            tq += dx * dx + dy * dy;
        }
        let (mut lx, mut ly, mut lq) = (0.0, 0.0, 0.0);
        let mut best: Option<(f64, f64)> = None;
        for k in 1..n {
            let (dx, dy) = centered(self.sorted[k - 1].1);
            lx += dx;
            ly += dy;
            lq += dx * dx + dy * dy;
            if !self.cut_allowed(k) {
                continue;
            }
            let (nl, nr) = (k as f64, (n - k) as f64);
            let sse_l = lq - (lx * lx + ly * ly) / nl;
            let (rx, ry) = (tx - lx, ty - ly);
            let sse_r = (tq - lq) - (rx * rx + ry * ry) / nr;
            let score = (sse_l.max(0.0) + sse_r.max(0.0)) / nf;
            if best.is_none_or(|(_, s)| score < s - tie_tolerance(s)) {
                best = Some((self.threshold_at(k), score));
            }
        }
        best
    }
}

/// Midpoint of two consecutive distinct values that still separates them.
pub(crate) fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    if m < b {
        m
    } else {
        a
    }
}

/// In-place partition; returns the number of elements satisfying `pred`,
/// which end up first.
fn partition(idx: &mut [usize], pred: impl Fn(usize) -> bool) -> usize {
    let mut mid = 0;
    for j in 0..idx.len() {
        if pred(idx[j]) {
            idx.swap(mid, j);
            mid += 1;
        }
    }
    mid
}

pub(crate) fn default_features_per_split(kind: ForestKind, width: usize) -> usize {
    match kind {
        ForestKind::Classifier => (width as f64).sqrt().ceil() as usize,
        ForestKind::Regressor2D => width.div_ceil(3),
    }
    .clamp(1, width)
}
