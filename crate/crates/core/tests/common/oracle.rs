//! Brute-force reference for tree induction on tiny datasets: every feature,
//! every midpoint threshold, impurities recomputed from scratch with `gini` /
//! `variance_impurity` on the child subsets.

#![allow(dead_code)]

use locfuse::forest::{fit_tree, gini, variance_impurity, FeaturesPerSplit, IMPURITY_TIE_EPS};
use locfuse::model::FeatureMatrix;
use locfuse::seed::rng_from_seed;
use locfuse::{fit_forest, predict_class, predict_position, ForestParams, Position, Targets};
use rand::Rng as _;

#[derive(Debug, Clone)]
pub enum Target {
    Class(Vec<&'static str>),
    Point(Vec<Position>),
}

#[derive(Debug, Clone)]
pub struct Case {
    pub rows: Vec<Vec<f64>>,
    pub target: Target,
}

#[derive(Debug, PartialEq)]
pub enum RefTree {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<RefTree>,
        right: Box<RefTree>,
    },
    Class(&'static str),
    Point(f64, f64),
}

pub fn tol(v: f64) -> f64 {
    IMPURITY_TIE_EPS * (1.0 + v.abs())
}

pub fn impurity(case: &Case, idx: &[usize]) -> f64 {
    match &case.target {
        Target::Class(l) => gini(&idx.iter().map(|&i| l[i]).collect::<Vec<_>>()).unwrap(),
        Target::Point(p) => variance_impurity(&idx.iter().map(|&i| p[i]).collect::<Vec<_>>()).unwrap(),
    }
}

pub fn leaf(case: &Case, idx: &[usize]) -> RefTree {
    match &case.target {
        Target::Class(l) => {
            let mut names: Vec<&str> = idx.iter().map(|&i| l[i]).collect();
            names.sort();
            let mut best = (0usize, "");
            for &name in &names {
                let count = names.iter().filter(|&&n| n == name).count();
                // sorted order: the first label reaching the maximum is the smallest
                if count > best.0 {
                    best = (count, name);
                }
            }
            RefTree::Class(l.iter().copied().find(|&n| n == best.1).unwrap())
        }
        Target::Point(p) => {
            let n = idx.len() as f64;
            let sx: f64 = idx.iter().map(|&i| p[i].x).sum();
            let sy: f64 = idx.iter().map(|&i| p[i].y).sum();
            RefTree::Point(sx / n, sy / n)
        }
    }
}

pub fn reference(case: &Case, idx: &[usize], depth: usize, min_leaf: usize, max_depth: Option<usize>) -> RefTree {
    let parent = impurity(case, idx);
    if parent == 0.0 || max_depth.is_some_and(|d| depth >= d) || idx.len() < 2 * min_leaf {
        return leaf(case, idx);
    }
    let n = idx.len() as f64;
    // (feature, threshold, weighted child impurity), in (feature, threshold) order
    let mut candidates: Vec<(usize, f64, f64)> = Vec::new();
    for f in 0..case.rows[0].len() {
        let mut values: Vec<f64> = idx.iter().map(|&i| case.rows[i][f]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for w in values.windows(2) {
            let t = w[0] + (w[1] - w[0]) / 2.0;
            let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| case.rows[i][f] <= t);
            if l.len() < min_leaf || r.len() < min_leaf {
                continue;
            }
            let score = (l.len() as f64 * impurity(case, &l) + r.len() as f64 * impurity(case, &r)) / n;
            candidates.push((f, t, score));
        }
    }
    let Some(min) = candidates.iter().map(|c| c.2).min_by(f64::total_cmp) else {
        return leaf(case, idx);
    };
    let &(feature, threshold, score) = candidates.iter().find(|c| c.2 <= min + tol(min)).unwrap();
    if score >= parent - tol(parent) {
        return leaf(case, idx);
    }
    let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| case.rows[i][feature] <= threshold);
    RefTree::Split {
        feature,
        threshold,
        left: Box::new(reference(case, &l, depth + 1, min_leaf, max_depth)),
        right: Box::new(reference(case, &r, depth + 1, min_leaf, max_depth)),
    }
}

pub fn ref_predict<'t>(tree: &'t RefTree, x: &[f64]) -> &'t RefTree {
    match tree {
        RefTree::Split {
            feature,
            threshold,
            left,
            right,
        } => ref_predict(if x[*feature] <= *threshold { left } else { right }, x),
        leaf => leaf,
    }
}

pub fn targets(case: &Case) -> Targets {
    match &case.target {
        Target::Class(l) => Targets::classes(l),
        Target::Point(p) => Targets::positions(p),
    }
}

pub fn matrix(case: &Case) -> FeatureMatrix {
    FeatureMatrix {
        columns: (0..case.rows[0].len()).map(|f| format!("f{f}")).collect(),
        rows: case.rows.clone(),
    }
}

/// Fixed corpus: hand-picked edge cases plus seeded random tiny datasets with
/// small-integer features (many duplicates) and coordinates on a 0.5 m grid.
pub fn corpus() -> Vec<Case> {
    let mut cases = vec![
        Case {
            rows: vec![vec![-70.0], vec![-60.0], vec![-50.0], vec![-40.0]],
            target: Target::Class(vec!["lab1", "lab1", "lab2", "lab2"]),
        },
        Case {
            rows: vec![vec![1.0, 5.0], vec![1.0, 5.0], vec![1.0, 5.0]],
            target: Target::Class(vec!["a", "b", "a"]),
        },
        Case {
            rows: vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]],
            target: Target::Class(vec!["a", "b", "b", "a"]),
        },
        Case {
            rows: vec![vec![2.0], vec![2.0], vec![3.0]],
            target: Target::Point(vec![
                Position::new(0.0, 0.0),
                Position::new(1.0, 0.0),
                Position::new(4.0, 4.0),
            ]),
        },
        Case {
            rows: vec![vec![1.0]],
            target: Target::Class(vec!["only"]),
        },
    ];
    let mut rng = rng_from_seed(0x0ac1e);
    let names = ["lab1", "lab2", "outside"];
    for k in 0..400 {
        let n = rng.random_range(2..=10);
        let p = rng.random_range(1..=3);
        let spread = rng.random_range(1..=6);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..p).map(|_| f64::from(rng.random_range(-spread..=spread))).collect())
            .collect();
        let target = if k % 2 == 0 {
            let n_classes = rng.random_range(1..=3);
            Target::Class((0..n).map(|_| names[rng.random_range(0..n_classes)]).collect())
        } else {
            Target::Point(
                (0..n)
                    .map(|_| {
                        Position::new(
                            f64::from(rng.random_range(0..=28)) * 0.5,
                            f64::from(rng.random_range(0..=14)) * 0.5,
                        )
                    })
                    .collect(),
            )
        };
        cases.push(Case { rows, target });
    }
    cases
}

pub fn queries(case: &Case) -> Vec<Vec<f64>> {
    let p = case.rows[0].len();
    let grid: Vec<f64> = (-14..=14).map(|v| f64::from(v) * 0.5).collect();
    let mut out = case.rows.clone();
    match p {
        1 => out.extend(grid.iter().map(|&a| vec![a])),
        2 => out.extend(grid.iter().flat_map(|&a| grid.iter().map(move |&b| vec![a, b]))),
        _ => {
            let coarse: Vec<f64> = (-7..=7).map(f64::from).collect();
            for &a in &coarse {
                for &b in &coarse {
                    for &c in &coarse {
                        out.push(vec![a, b, c]);
                    }
                }
            }
        }
    }
    out
}

pub fn plain_params(min_samples_leaf: usize, max_depth: Option<usize>) -> ForestParams {
    ForestParams {
        n_trees: 1,
        max_depth,
        min_samples_leaf,
        features_per_split: FeaturesPerSplit::All,
        bootstrap: false,
        seed: 99,
    }
}

/// Fits every corpus case under several stopping settings and compares the
/// crate's predictions with the reference on a dense query set. Also checks
/// that a one-tree forest without bootstrap equals `fit_tree`. Returns the
/// number of predictions compared.
pub fn check_corpus() -> Result<usize, String> {
    let mut checked = 0;
    for (c, case) in corpus().iter().enumerate() {
        let idx: Vec<usize> = (0..case.rows.len()).collect();
        for (min_leaf, max_depth) in [(1, None), (2, None), (1, Some(2)), (3, Some(1))] {
            let params = plain_params(min_leaf, max_depth);
            let tree = fit_tree(&case.rows, &targets(case), &params, &mut rng_from_seed(c as u64))
                .map_err(|e| e.to_string())?;
            let forest = fit_forest(&matrix(case), &targets(case), &params).map_err(|e| e.to_string())?;
            if forest.trees()[0] != tree {
                return Err(format!("case {c}: single-tree forest differs from fit_tree"));
            }
            let oracle = reference(case, &idx, 0, min_leaf, max_depth);
            for q in queries(case) {
                let same = match ref_predict(&oracle, &q) {
                    RefTree::Class(label) => predict_class(&forest, &q).map_err(|e| e.to_string())? == *label,
                    RefTree::Point(x, y) => {
                        predict_position(&forest, &q).map_err(|e| e.to_string())? == Position::new(*x, *y)
                    }
                    RefTree::Split { .. } => unreachable!(),
                };
                if !same {
                    return Err(format!("case {c} {case:?}: prediction differs at {q:?}"));
                }
                checked += 1;
            }
        }
    }
    Ok(checked)
}
