use std::collections::HashMap;
use std::hash::Hash;

use crate::error::{Error, Result};
use crate::model::Position;

/// Gini impurity `1 - sum_c p_c^2` of a multiset of labels.
pub fn gini<L: Eq + Hash>(labels: &[L]) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::EmptyInput("gini of an empty label set"));
    }
    let mut counts: HashMap<&L, usize> = HashMap::new();
    for l in labels {
        *counts.entry(l).or_default() += 1;
    }
    let n = labels.len() as f64;
    let sum_sq: f64 = counts.values().map(|&c| (c * c) as f64).sum();
    Ok(1.0 - sum_sq / (n * n))
}

/// Summed per-axis population variance `Var(x) + Var(y)` of 2D targets.
pub fn variance_impurity(targets: &[Position]) -> Result<f64> {
    if targets.is_empty() {
        return Err(Error::EmptyInput("variance of an empty target set"));
    }
    let n = targets.len() as f64;
    let (sx, sy) = targets.iter().fold((0.0, 0.0), |(a, b), p| (a + p.x, b + p.y));
    let (mx, my) = (sx / n, sy / n);
    let sse: f64 = targets.iter().map(|p| (p.x - mx).powi(2) + (p.y - my).powi(2)).sum();
    Ok(sse / n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gini_examples() {
        assert_eq!(gini(&["A", "A", "A"]).unwrap(), 0.0);
        assert_eq!(gini(&["A", "A", "B", "B"]).unwrap(), 0.5);
        // 1 - (0.25 + 0.0625 + 0.0625)
        assert_eq!(gini(&["A", "A", "B", "C"]).unwrap(), 0.625);
        assert!(gini::<&str>(&[]).is_err());
    }

    #[test]
    fn variance_examples() {
        let p = Position::new;
        assert_eq!(variance_impurity(&[p(1.5, 2.5); 4]).unwrap(), 0.0);
        assert_eq!(variance_impurity(&[p(0.0, 0.0), p(2.0, 0.0)]).unwrap(), 1.0);
        assert_eq!(
            variance_impurity(&[p(0.0, 0.0), p(0.0, 2.0), p(2.0, 0.0), p(2.0, 2.0)]).unwrap(),
            2.0
        );
        assert!(variance_impurity(&[]).is_err());
    }

    #[test]
    fn gini_stays_below_one() {
        let labels: Vec<u32> = (0..50).collect();
        let g = gini(&labels).unwrap();
        assert!(g < 1.0 && g > 0.97);
    }
}
