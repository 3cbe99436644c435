use crate::error::{Error, Result};
use crate::model::Position;

/// Euclidean error in the horizontal plane; `z` is ignored.
pub fn horizontal_error(estimate: &Position, truth: &Position) -> f64 {
    estimate.horizontal_distance(truth)
}

/// Right-continuous empirical distribution function of a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    /// `F(e) = #{errors <= e} / N`.
    pub fn eval(&self, e: f64) -> f64 {
        let count = self.sorted.partition_point(|&v| v <= e);
        count as f64 / self.sorted.len() as f64
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// Distinct support points with the cumulative fraction reached at each.
    pub fn steps(&self) -> Vec<(f64, f64)> {
        let n = self.sorted.len() as f64;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (i, &v) in self.sorted.iter().enumerate() {
            let frac = (i + 1) as f64 / n;
            match out.last_mut() {
                Some(last) if last.0 == v => last.1 = frac,
                _ => out.push((v, frac)),
            }
        }
        out
    }

    /// Smallest sample value `e` with `F(e) >= q`.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q <= 1.0) {
            return Err(Error::InvalidParam(format!("quantile level {q} outside (0, 1]")));
        }
        let n = self.sorted.len();
        let nf = n as f64;
        let mut k = ((q * nf).ceil() as usize).clamp(1, n);
        while k > 1 && (k - 1) as f64 / nf >= q {
            k -= 1;
        }
        while k < n && (k as f64 / nf) < q {
            k += 1;
        }
        Ok(self.sorted[k - 1])
    }
}

pub fn empirical_cdf(errors: &[f64]) -> Result<EmpiricalCdf> {
    if errors.is_empty() {
        return Err(Error::EmptyInput("CDF of an empty error list"));
    }
    if errors.iter().any(|e| e.is_nan()) {
        return Err(Error::InvalidParam("error list contains NaN".into()));
    }
    let mut sorted = errors.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(EmpiricalCdf { sorted })
}

pub fn percentile(errors: &[f64], q: f64) -> Result<f64> {
    empirical_cdf(errors)?.quantile(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn horizontal_error_cases() {
        assert_eq!(
            horizontal_error(&Position::new(3.0, 4.0), &Position::new(0.0, 0.0)),
            5.0
        );
        assert_eq!(
            horizontal_error(&Position::new(1.0, 2.0), &Position::new(1.0, 2.0)),
            0.0
        );
        assert_eq!(
            horizontal_error(&Position::new_3d(1.0, 1.0, 5.0), &Position::new(1.0, 1.0)),
            0.0
        );
    }

    #[test]
    fn cdf_cases() {
        let cdf = empirical_cdf(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!(cdf.eval(3.0), 0.6);
        assert_eq!(cdf.eval(5.0), 1.0);
        assert_eq!(cdf.eval(-1.0), 0.0);
        assert_eq!(cdf.eval(2.5), 0.4);
        assert!(empirical_cdf(&[]).is_err());
    }

    #[test]
    fn percentile_cases() {
        let e = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(percentile(&e, 0.8).unwrap(), 4.0);
        assert_eq!(percentile(&e, 1.0).unwrap(), 5.0);
        assert_eq!(percentile(&e, 0.81).unwrap(), 5.0);
        assert_eq!(percentile(&[2.5], 0.3).unwrap(), 2.5);
        assert!(percentile(&[], 0.5).is_err());
        assert!(percentile(&e, 0.0).is_err());
    }

    #[test]
    fn steps_merge_duplicates() {
        let cdf = empirical_cdf(&[2.0, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(cdf.steps(), vec![(1.0, 0.25), (2.0, 0.75), (3.0, 1.0)]);
    }

    proptest! {
        #[test]
        fn cdf_is_monotone_and_percentile_is_member(
            errors in prop::collection::vec(0.0f64..50.0, 1..200),
            q in 0.001f64..=1.0,
        ) {
            let cdf = empirical_cdf(&errors).unwrap();
            let n = errors.len() as f64;
            let steps = cdf.steps();
            for w in steps.windows(2) {
                prop_assert!(w[0].0 < w[1].0 && w[0].1 < w[1].1);
            }
            let min = cdf.sorted()[0];
            let max = *cdf.sorted().last().unwrap();
            prop_assert!(cdf.eval(min) >= 1.0 / n);
            prop_assert_eq!(cdf.eval(max), 1.0);
            let p = cdf.quantile(q).unwrap();
            prop_assert!(errors.contains(&p));
            prop_assert!(cdf.eval(p) >= q);
            // nothing smaller in the sample reaches q
            for &e in &errors {
                if e < p {
                    prop_assert!(cdf.eval(e) < q);
                }
            }
        }
    }
}
