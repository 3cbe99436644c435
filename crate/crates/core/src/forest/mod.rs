//! Random forests grown from scratch: bootstrapped CART trees combined by
//! majority vote (zone classification) or by averaging leaf positions (2D
//! position regression).

mod format;
mod impurity;
mod tree;

use std::fmt;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FeatureMatrix, Position};
use crate::seed::{child_rng, Rng};

pub use format::{read_forest, write_forest};
pub use impurity::{gini, variance_impurity};
pub use tree::{DecisionTree, Leaf, TreeNode, IMPURITY_TIE_EPS};

use tree::{check_rows, default_features_per_split, grow, GrowSettings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ForestKind {
    Classifier,
    #[serde(rename = "regressor")]
    Regressor2D,
}

impl ForestKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ForestKind::Classifier => "classifier",
            ForestKind::Regressor2D => "regressor",
        }
    }
}

impl fmt::Display for ForestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Training targets, already encoded for the tree builder.
#[derive(Debug, Clone, PartialEq)]
pub enum Targets {
    /// `y[i]` indexes into `labels`, which is sorted and deduplicated.
    Classes { labels: Vec<String>, y: Vec<u32> },
    /// Horizontal positions `(x, y)`.
    Positions(Vec<(f64, f64)>),
}

impl Targets {
    pub fn classes<S: AsRef<str>>(labels: &[S]) -> Self {
        let mut set: Vec<String> = labels.iter().map(|l| l.as_ref().to_string()).collect();
        set.sort();
        set.dedup();
        let y = labels
            .iter()
            .map(|l| set.binary_search_by(|s| s.as_str().cmp(l.as_ref())).unwrap() as u32)
            .collect();
        Targets::Classes { labels: set, y }
    }

    pub fn positions(points: &[Position]) -> Self {
        Targets::Positions(points.iter().map(|p| (p.x, p.y)).collect())
    }

    pub fn kind(&self) -> ForestKind {
        match self {
            Targets::Classes { .. } => ForestKind::Classifier,
            Targets::Positions(_) => ForestKind::Regressor2D,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Targets::Classes { y, .. } => y.len(),
            Targets::Positions(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub(crate) fn n_classes(&self) -> usize {
        match self {
            Targets::Classes { labels, .. } => labels.len(),
            Targets::Positions(_) => 0,
        }
    }

    fn labels(&self) -> Vec<String> {
        match self {
            Targets::Classes { labels, .. } => labels.clone(),
            Targets::Positions(_) => Vec::new(),
        }
    }
}

/// How many candidate features are drawn at each split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "FeaturesRepr", into = "FeaturesRepr")]
pub enum FeaturesPerSplit {
    /// `ceil(sqrt(p))` for classifiers, `ceil(p / 3)` for regressors.
    #[default]
    Auto,
    All,
    Count(usize),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum FeaturesRepr {
    Count(usize),
    Rule(String),
}

impl TryFrom<FeaturesRepr> for FeaturesPerSplit {
    type Error = String;

    fn try_from(r: FeaturesRepr) -> std::result::Result<Self, String> {
        match r {
            FeaturesRepr::Count(n) => Ok(FeaturesPerSplit::Count(n)),
            FeaturesRepr::Rule(s) if s == "auto" => Ok(FeaturesPerSplit::Auto),
            FeaturesRepr::Rule(s) if s == "all" => Ok(FeaturesPerSplit::All),
            FeaturesRepr::Rule(s) => Err(format!(
                "features_per_split must be \"auto\", \"all\" or a count, got {s:?}"
            )),
        }
    }
}

impl From<FeaturesPerSplit> for FeaturesRepr {
    fn from(f: FeaturesPerSplit) -> Self {
        match f {
            FeaturesPerSplit::Auto => FeaturesRepr::Rule("auto".into()),
            FeaturesPerSplit::All => FeaturesRepr::Rule("all".into()),
            FeaturesPerSplit::Count(n) => FeaturesRepr::Count(n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub features_per_split: FeaturesPerSplit,
    /// Resample the training set with replacement, to its own size, per tree.
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: None,
            min_samples_leaf: 2,
            features_per_split: FeaturesPerSplit::Auto,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl ForestParams {
    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    fn settings(&self, kind: ForestKind, width: usize) -> Result<GrowSettings> {
        if self.n_trees == 0 {
            return Err(Error::InvalidParam("n_trees must be at least 1".into()));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::InvalidParam("min_samples_leaf must be at least 1".into()));
        }
        let features_per_split = match self.features_per_split {
            FeaturesPerSplit::Auto => default_features_per_split(kind, width),
            FeaturesPerSplit::All => width,
            FeaturesPerSplit::Count(n) if (1..=width).contains(&n) => n,
            FeaturesPerSplit::Count(n) => {
                return Err(Error::InvalidParam(format!(
                    "features_per_split {n} outside [1, {width}]"
                )))
            }
        };
        Ok(GrowSettings {
            max_depth: self.max_depth,
            min_samples_leaf: self.min_samples_leaf,
            features_per_split,
        })
    }
}

/// Grows a single tree on every row (no resampling), drawing split
/// candidates from `rng`.
pub fn fit_tree(rows: &[Vec<f64>], targets: &Targets, params: &ForestParams, rng: &mut Rng) -> Result<DecisionTree> {
    let width = check_rows(rows, targets.len())?;
    let settings = params.settings(targets.kind(), width)?;
    Ok(grow(rows, targets, (0..rows.len()).collect(), settings, rng))
}

/// A trained ensemble bound to an ordered list of access-point columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    pub(crate) kind: ForestKind,
    pub(crate) trees: Vec<DecisionTree>,
    pub(crate) columns: Vec<String>,
    pub(crate) labels: Vec<String>,
}

/// Tree `t` is grown with the generator `child_rng(params.seed, t)`: first the
/// bootstrap draw, then the per-split feature draws. Trees may be grown in
/// parallel; the result does not depend on scheduling.
pub fn fit_forest(x: &FeatureMatrix, targets: &Targets, params: &ForestParams) -> Result<Forest> {
    let width = check_rows(&x.rows, targets.len())?;
    if width != x.columns.len() {
        return Err(Error::WidthMismatch {
            expected: x.columns.len(),
            actual: width,
        });
    }
    let settings = params.settings(targets.kind(), width)?;
    let n = x.rows.len();
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = child_rng(params.seed, t as u64);
            let indices: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            grow(&x.rows, targets, indices, settings, &mut rng)
        })
        .collect();
    Ok(Forest {
        kind: targets.kind(),
        trees,
        columns: x.columns.clone(),
        labels: targets.labels(),
    })
}

impl Forest {
    /// Assembles a forest from already-built trees, checking that every
    /// node is consistent with `kind`, `columns` and `labels`.
    pub fn from_parts(
        kind: ForestKind,
        trees: Vec<DecisionTree>,
        columns: Vec<String>,
        labels: Vec<String>,
    ) -> Result<Self> {
        if trees.is_empty() {
            return Err(Error::InvalidParam("forest needs at least one tree".into()));
        }
        if columns.is_empty() {
            return Err(Error::InvalidParam("forest needs at least one column".into()));
        }
        if kind == ForestKind::Classifier && labels.is_empty() {
            return Err(Error::InvalidParam("classifier forest needs a label list".into()));
        }
        for node in trees.iter().flat_map(|t| t.nodes.iter()) {
            let ok = match node {
                TreeNode::Split { feature, .. } => *feature < columns.len(),
                TreeNode::Leaf(Leaf::Class(c)) => kind == ForestKind::Classifier && (*c as usize) < labels.len(),
                TreeNode::Leaf(Leaf::Point { .. }) => kind == ForestKind::Regressor2D,
            };
            if !ok {
                return Err(Error::InvalidParam(format!(
                    "node {node:?} does not fit a {kind} forest"
                )));
            }
        }
        Ok(Self {
            kind,
            trees,
            columns,
            labels,
        })
    }

    pub fn kind(&self) -> ForestKind {
        self.kind
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    fn check_width(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.columns.len() {
            return Err(Error::WidthMismatch {
                expected: self.columns.len(),
                actual: x.len(),
            });
        }
        Ok(())
    }

    /// Per-label vote counts, in label order.
    pub fn votes(&self, x: &[f64]) -> Result<Vec<usize>> {
        if self.kind != ForestKind::Classifier {
            return Err(Error::InvalidParam("vote counts need a classifier forest".into()));
        }
        self.check_width(x)?;
        let mut votes = vec![0usize; self.labels.len()];
        for tree in &self.trees {
            if let Leaf::Class(c) = tree.leaf_for(x) {
                votes[*c as usize] += 1;
            }
        }
        Ok(votes)
    }
}

/// Majority vote over trees; ties go to the lexicographically smallest label.
pub fn predict_class<'f>(forest: &'f Forest, x: &[f64]) -> Result<&'f str> {
    let votes = forest.votes(x)?;
    let mut best = 0;
    for (c, &v) in votes.iter().enumerate() {
        if v > votes[best] {
            best = c;
        }
    }
    Ok(&forest.labels[best])
}

/// Unweighted mean of the trees' leaf positions; `z` is 0.
pub fn predict_position(forest: &Forest, x: &[f64]) -> Result<Position> {
    if forest.kind != ForestKind::Regressor2D {
        return Err(Error::InvalidParam(
            "position prediction needs a regressor forest".into(),
        ));
    }
    forest.check_width(x)?;
    let (mut sx, mut sy) = (0.0, 0.0);
    for tree in &forest.trees {
        if let Leaf::Point { x, y } = tree.leaf_for(x) {
            sx += x;
            sy += y;
        }
    }
    let n = forest.trees.len() as f64;
    Ok(Position::new(sx / n, sy / n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;

    fn matrix(rows: Vec<Vec<f64>>) -> FeatureMatrix {
        let width = rows[0].len();
        FeatureMatrix {
            columns: (0..width).map(|i| format!("ap{i}")).collect(),
            rows,
        }
    }

    fn leaf_tree(leaf: Leaf) -> DecisionTree {
        DecisionTree {
            nodes: vec![TreeNode::Leaf(leaf)],
        }
    }

    #[test]
    fn two_samples_force_one_split() {
        let rows = vec![vec![-50.0, -70.0], vec![-80.0, -70.0]];
        let targets = Targets::classes(&["A", "B"]);
        let params = ForestParams {
            min_samples_leaf: 1,
            features_per_split: FeaturesPerSplit::All,
            ..Default::default()
        };
        let tree = fit_tree(&rows, &targets, &params, &mut rng_from_seed(0)).unwrap();
        assert_eq!(tree.depth(), 1);
        match tree.nodes[0] {
            TreeNode::Split { feature, threshold, .. } => {
                assert_eq!(feature, 0);
                assert_eq!(threshold, -65.0);
            }
            _ => panic!("expected split"),
        }
    }

    #[test]
    fn pure_node_is_a_leaf() {
        let rows = vec![vec![-50.0], vec![-60.0], vec![-70.0]];
        let tree = fit_tree(
            &rows,
            &Targets::classes(&["A", "A", "A"]),
            &ForestParams::default(),
            &mut rng_from_seed(0),
        )
        .unwrap();
        assert_eq!(tree.nodes, vec![TreeNode::Leaf(Leaf::Class(0))]);
    }

    #[test]
    fn fit_tree_rejects_ragged_rows() {
        let rows = vec![vec![-50.0, -1.0], vec![-60.0]];
        let err = fit_tree(
            &rows,
            &Targets::classes(&["A", "B"]),
            &ForestParams::default(),
            &mut rng_from_seed(0),
        )
        .unwrap_err();
        assert!(matches!(err, Error::WidthMismatch { .. }));
    }

    #[test]
    fn empty_training_set_rejected() {
        let x = FeatureMatrix {
            columns: vec!["a".into()],
            rows: vec![],
        };
        let empty: [&str; 0] = [];
        assert!(fit_forest(&x, &Targets::classes(&empty), &ForestParams::default()).is_err());
    }

    #[test]
    fn bad_params_rejected() {
        let x = matrix(vec![vec![1.0], vec![2.0]]);
        let t = Targets::classes(&["A", "B"]);
        for params in [
            ForestParams {
                n_trees: 0,
                ..Default::default()
            },
            ForestParams {
                min_samples_leaf: 0,
                ..Default::default()
            },
            ForestParams {
                features_per_split: FeaturesPerSplit::Count(2),
                ..Default::default()
            },
        ] {
            assert!(matches!(fit_forest(&x, &t, &params), Err(Error::InvalidParam(_))));
        }
    }

    #[test]
    fn max_depth_is_respected() {
        let rows: Vec<Vec<f64>> = (0..64).map(|i| vec![i as f64]).collect();
        let labels: Vec<String> = (0..64).map(|i| format!("c{}", i % 4)).collect();
        let params = ForestParams {
            max_depth: Some(2),
            min_samples_leaf: 1,
            ..Default::default()
        };
        let tree = fit_tree(&rows, &Targets::classes(&labels), &params, &mut rng_from_seed(1)).unwrap();
        assert!(tree.depth() <= 2);
    }

    #[test]
    fn unanimous_and_tied_votes() {
        let labels = vec!["lab1".to_string(), "lab2".to_string()];
        let f = Forest::from_parts(
            ForestKind::Classifier,
            vec![leaf_tree(Leaf::Class(0)); 3],
            vec!["g1".into()],
            labels.clone(),
        )
        .unwrap();
        assert_eq!(predict_class(&f, &[-50.0]).unwrap(), "lab1");

        let trees = vec![
            leaf_tree(Leaf::Class(1)),
            leaf_tree(Leaf::Class(0)),
            leaf_tree(Leaf::Class(1)),
            leaf_tree(Leaf::Class(0)),
        ];
        let f = Forest::from_parts(ForestKind::Classifier, trees, vec!["g1".into()], labels).unwrap();
        assert_eq!(predict_class(&f, &[-50.0]).unwrap(), "lab1");
    }

    #[test]
    fn hand_tallied_vote() {
        // Five stumps on feature 0. At x = -62 the trees vote B, A, A, B, C:
        // tally A:2 B:2 C:1, tie resolved to A.
        let labels: Vec<String> = ["A", "B", "C"].iter().map(|s| s.to_string()).collect();
        let stump = |thr: f64, left: u32, right: u32| {
            DecisionTree::from_preorder(vec![
                TreeNode::Split {
                    feature: 0,
                    threshold: thr,
                    left: 0,
                    right: 0,
                },
                TreeNode::Leaf(Leaf::Class(left)),
                TreeNode::Leaf(Leaf::Class(right)),
            ])
        };
        let trees = vec![
            stump(-65.0, 0, 1),
            stump(-60.0, 0, 1),
            stump(-55.0, 0, 2),
            stump(-70.0, 2, 1),
            stump(-61.0, 2, 0),
        ];
        let f = Forest::from_parts(ForestKind::Classifier, trees, vec!["g1".into()], labels).unwrap();
        assert_eq!(f.votes(&[-62.0]).unwrap(), vec![2, 2, 1]);
        assert_eq!(predict_class(&f, &[-62.0]).unwrap(), "A");
        // at -80 every tree goes left: A, A, A, C, C
        assert_eq!(predict_class(&f, &[-80.0]).unwrap(), "A");
        // at -50 every tree goes right: B, B, C, B, A
        assert_eq!(predict_class(&f, &[-50.0]).unwrap(), "B");
    }

    #[test]
    fn position_averaging() {
        let f = Forest::from_parts(
            ForestKind::Regressor2D,
            vec![leaf_tree(Leaf::Point { x: 3.0, y: 4.0 }); 5],
            vec!["g1".into()],
            vec![],
        )
        .unwrap();
        assert_eq!(predict_position(&f, &[-50.0]).unwrap(), Position::new(3.0, 4.0));
        let f = Forest::from_parts(
            ForestKind::Regressor2D,
            vec![
                leaf_tree(Leaf::Point { x: 0.0, y: 0.0 }),
                leaf_tree(Leaf::Point { x: 2.0, y: 2.0 }),
            ],
            vec!["g1".into()],
            vec![],
        )
        .unwrap();
        assert_eq!(predict_position(&f, &[-50.0]).unwrap(), Position::new(1.0, 1.0));
        assert!(matches!(
            predict_position(&f, &[-50.0, 1.0]),
            Err(Error::WidthMismatch { .. })
        ));
        assert!(predict_class(&f, &[-50.0]).is_err());
    }

    #[test]
    fn separable_data_fits_perfectly() {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..40 {
            let a = -90.0 + i as f64;
            rows.push(vec![a, -40.0 - i as f64 * 0.5]);
            labels.push(if a < -70.0 { "lab1" } else { "lab2" });
        }
        let x = matrix(rows);
        let forest = fit_forest(
            &x,
            &Targets::classes(&labels),
            &ForestParams {
                n_trees: 50,
                seed: 3,
                ..Default::default()
            },
        )
        .unwrap();
        let correct = x
            .rows
            .iter()
            .zip(&labels)
            .filter(|(r, l)| predict_class(&forest, r).unwrap() == **l)
            .count();
        assert_eq!(correct, labels.len());
    }

    #[test]
    fn single_class_forest() {
        let x = matrix(vec![vec![-50.0], vec![-60.0]]);
        let f = fit_forest(&x, &Targets::classes(&["lab1", "lab1"]), &ForestParams::default()).unwrap();
        assert_eq!(predict_class(&f, &[-99.0]).unwrap(), "lab1");
    }

    #[test]
    fn features_per_split_config_forms() {
        #[derive(Deserialize)]
        struct W {
            f: FeaturesPerSplit,
        }
        assert_eq!(toml::from_str::<W>("f = 2").unwrap().f, FeaturesPerSplit::Count(2));
        assert_eq!(toml::from_str::<W>("f = \"all\"").unwrap().f, FeaturesPerSplit::All);
        assert_eq!(toml::from_str::<W>("f = \"auto\"").unwrap().f, FeaturesPerSplit::Auto);
        assert!(toml::from_str::<W>("f = \"half\"").is_err());
    }
}
