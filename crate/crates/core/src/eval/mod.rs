//! Monte Carlo evaluation: repeated random train/test splits, per-technology
//! classifier and regressor forests, accuracy statistics and pooled
//! horizontal-error distributions.

mod report;
mod stats;

use std::fmt;
use std::path::Path;

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::{fit_forest, predict_class, predict_position, ForestParams, Targets};
use crate::model::{feature_matrix, validate_dataset, zone_of, Dataset, FeatureMatrix, Position, TechSelector};
use crate::seed::{child_rng, derive_seed, Rng};

pub use report::{write_report, SUMMARY_FILE};
pub use stats::{empirical_cdf, horizontal_error, percentile, EmpiricalCdf};

/// Quantile reported as the headline localization figure.
pub const CDF_LEVEL: f64 = 0.8;

/// Attendance-control requirement: 5 m horizontal accuracy for 80% of fixes.
pub const ATTENDANCE_ACCURACY_M: f64 = 5.0;
/// Attendance-control requirement: 1 s latency.
pub const ATTENDANCE_LATENCY_S: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    /// Zone predicted directly by a classifier forest.
    #[serde(rename = "classify")]
    Classification,
    /// Position predicted by a regressor forest, then mapped to its zone.
    #[serde(rename = "regress")]
    RegressThenClassify,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::Classification, Method::RegressThenClassify];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Classification => "classify",
            Method::RegressThenClassify => "regress",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub test_fraction: f64,
    pub n_iterations: usize,
    pub master_seed: u64,
    /// Forest settings for direct classification. `seed` is ignored: every
    /// iteration derives its own.
    pub classifier: ForestParams,
    /// Forest settings for position regression; `seed` is ignored.
    pub regressor: ForestParams,
    pub technologies: Vec<TechSelector>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            test_fraction: 0.2,
            n_iterations: 1000,
            master_seed: 0,
            classifier: ForestParams::default(),
            regressor: ForestParams::default(),
            technologies: TechSelector::ALL.to_vec(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::InvalidParam(format!(
                "test_fraction {} outside (0, 1)",
                self.test_fraction
            )));
        }
        if self.n_iterations == 0 {
            return Err(Error::InvalidParam("n_iterations must be at least 1".into()));
        }
        if self.technologies.is_empty() {
            return Err(Error::InvalidParam("no technologies configured".into()));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment config serializes to TOML")
    }
}

/// Random train/test partition of `0..n_samples`: `round(test_fraction * N)`
/// test indices drawn uniformly without replacement. Both lists are sorted.
pub fn monte_carlo_split(n_samples: usize, test_fraction: f64, rng: &mut Rng) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidParam(format!(
            "test_fraction {test_fraction} outside (0, 1)"
        )));
    }
    let n_test = (test_fraction * n_samples as f64).round() as usize;
    if n_test < 1 || n_test >= n_samples {
        return Err(Error::DatasetTooSmall(format!(
            "{n_samples} samples cannot be split with test fraction {test_fraction}"
        )));
    }
    let mut test = index::sample(rng, n_samples, n_test).into_vec();
    test.sort_unstable();
    let mut is_test = vec![false; n_samples];
    for &i in &test {
        is_test[i] = true;
    }
    let train = (0..n_samples).filter(|&i| !is_test[i]).collect();
    Ok((train, test))
}

/// Predictions of one technology in one Monte Carlo iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct TechOutcome {
    pub technology: TechSelector,
    pub test_indices: Vec<usize>,
    /// Zone predicted by the classifier forest, per test sample.
    pub class_predictions: Vec<String>,
    /// Position predicted by the regressor forest, per test sample.
    pub position_predictions: Vec<Position>,
    /// Zone containing each predicted position.
    pub regression_labels: Vec<String>,
}

impl TechOutcome {
    pub fn predictions(&self, method: Method) -> &[String] {
        match method {
            Method::Classification => &self.class_predictions,
            Method::RegressThenClassify => &self.regression_labels,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationOutcome {
    pub iteration: usize,
    pub techs: Vec<TechOutcome>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracySummary {
    pub technology: TechSelector,
    pub method: Method,
    pub mean: f64,
    /// Sample standard deviation over iterations (0 for a single iteration).
    pub std: f64,
    pub per_iteration: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSummary {
    pub technology: TechSelector,
    /// Horizontal regression errors pooled over all iterations.
    pub cdf: EmpiricalCdf,
    pub cdf80: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub n_samples: usize,
    pub accuracy: Vec<AccuracySummary>,
    pub errors: Vec<ErrorSummary>,
    pub iterations: Vec<IterationOutcome>,
}

impl ExperimentReport {
    pub fn accuracy(&self, technology: TechSelector, method: Method) -> Option<&AccuracySummary> {
        self.accuracy
            .iter()
            .find(|a| a.technology == technology && a.method == method)
    }

    pub fn mean_accuracy(&self, technology: TechSelector, method: Method) -> Option<f64> {
        self.accuracy(technology, method).map(|a| a.mean)
    }

    pub fn error_summary(&self, technology: TechSelector) -> Option<&ErrorSummary> {
        self.errors.iter().find(|e| e.technology == technology)
    }

    pub fn cdf80(&self, technology: TechSelector) -> Option<f64> {
        self.error_summary(technology).map(|e| e.cdf80)
    }
}

fn tech_code(t: TechSelector) -> u64 {
    match t {
        TechSelector::FiveG => 0,
        TechSelector::WiFi => 1,
        TechSelector::Fusion => 2,
    }
}

fn subset(x: &FeatureMatrix, idx: &[usize]) -> FeatureMatrix {
    FeatureMatrix {
        columns: x.columns.clone(),
        rows: idx.iter().map(|&i| x.rows[i].clone()).collect(),
    }
}

/// Runs the full protocol. Iteration `i` uses seed `derive_seed(master, i)`:
/// child stream 0 draws the split, and technology `t` trains its classifier
/// and regressor with child seeds `1 + 2t` and `2 + 2t` (5G = 0, WiFi = 1,
/// fusion = 2). Iterations run in parallel; aggregation happens afterwards in
/// iteration order, so the report does not depend on scheduling.
pub fn run_experiment(dataset: &Dataset, config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    validate_dataset(dataset).into_result()?;
    let matrices = config
        .technologies
        .iter()
        .map(|&t| Ok((t, feature_matrix(dataset, t)?)))
        .collect::<Result<Vec<_>>>()?;
    let labels: Vec<&str> = dataset.samples.iter().map(|s| s.zone.as_str()).collect();
    let truths: Vec<Position> = dataset.samples.iter().map(|s| s.truth).collect();
    let n = dataset.len();

    let iterations = (0..config.n_iterations)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(config.master_seed, i as u64);
            let (train, test) = monte_carlo_split(n, config.test_fraction, &mut child_rng(seed, 0))?;
            let train_labels: Vec<&str> = train.iter().map(|&j| labels[j]).collect();
            let train_truths: Vec<Position> = train.iter().map(|&j| truths[j]).collect();
            let class_targets = Targets::classes(&train_labels);
            let position_targets = Targets::positions(&train_truths);
            let techs = matrices
                .iter()
                .map(|(tech, x)| {
                    let code = tech_code(*tech);
                    let train_x = subset(x, &train);
                    let classifier = fit_forest(
                        &train_x,
                        &class_targets,
                        &config.classifier.with_seed(derive_seed(seed, 1 + 2 * code)),
                    )?;
                    let regressor = fit_forest(
                        &train_x,
                        &position_targets,
                        &config.regressor.with_seed(derive_seed(seed, 2 + 2 * code)),
                    )?;
                    let mut out = TechOutcome {
                        technology: *tech,
                        test_indices: test.clone(),
                        class_predictions: Vec::with_capacity(test.len()),
                        position_predictions: Vec::with_capacity(test.len()),
                        regression_labels: Vec::with_capacity(test.len()),
                    };
                    for &j in &test {
                        let row = &x.rows[j];
                        out.class_predictions.push(predict_class(&classifier, row)?.to_string());
                        let p = predict_position(&regressor, row)?;
                        out.regression_labels.push(zone_of(&p, &dataset.zones)?.to_string());
                        out.position_predictions.push(p);
                    }
                    Ok(out)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(IterationOutcome { iteration: i, techs })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut accuracy = Vec::new();
    let mut errors = Vec::new();
    for (k, tech) in config.technologies.iter().enumerate() {
        for method in Method::ALL {
            let per_iteration: Vec<f64> = iterations
                .iter()
                .map(|it| accuracy_of(&it.techs[k], method, &labels))
                .collect();
            let (mean, std) = mean_std(&per_iteration);
            accuracy.push(AccuracySummary {
                technology: *tech,
                method,
                mean,
                std,
                per_iteration,
            });
        }
        let pooled: Vec<f64> = iterations
            .iter()
            .flat_map(|it| {
                let o = &it.techs[k];
                o.test_indices
                    .iter()
                    .zip(&o.position_predictions)
                    .map(|(&j, p)| horizontal_error(p, &truths[j]))
            })
            .collect();
        let cdf = empirical_cdf(&pooled)?;
        let cdf80 = cdf.quantile(CDF_LEVEL)?;
        errors.push(ErrorSummary {
            technology: *tech,
            cdf,
            cdf80,
        });
    }

    Ok(ExperimentReport {
        config: config.clone(),
        n_samples: n,
        accuracy,
        errors,
        iterations,
    })
}

/// Fraction of test samples whose predicted zone equals the recorded one.
pub fn accuracy_of(outcome: &TechOutcome, method: Method, labels: &[&str]) -> f64 {
    let preds = outcome.predictions(method);
    let hits = outcome
        .test_indices
        .iter()
        .zip(preds)
        .filter(|(&j, p)| labels[j] == p.as_str())
        .count();
    hits as f64 / outcome.test_indices.len() as f64
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
