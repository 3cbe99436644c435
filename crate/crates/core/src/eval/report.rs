use std::fs;
use std::io::Write;
use std::path::Path;

use super::{ExperimentReport, Method};
use crate::error::Result;

pub const SUMMARY_FILE: &str = "summary.csv";

/// Writes `summary.csv` (one row per technology and method) and one
/// `errors_<technology>.csv` per technology with the pooled regression
/// errors in ascending order.
pub fn write_report(report: &ExperimentReport, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;

    let mut summary = String::from("technology,method,mean_accuracy,std_accuracy,cdf80_m,n_iterations,n_samples\n");
    for acc in &report.accuracy {
        let cdf80 = match acc.method {
            Method::RegressThenClassify => report.cdf80(acc.technology).map(|v| v.to_string()).unwrap_or_default(),
            Method::Classification => String::new(),
        };
        summary.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            acc.technology,
            acc.method,
            acc.mean,
            acc.std,
            cdf80,
            acc.per_iteration.len(),
            report.n_samples
        ));
    }
    fs::write(dir.join(SUMMARY_FILE), summary)?;

    for e in &report.errors {
        let mut out = std::io::BufWriter::new(fs::File::create(dir.join(format!("errors_{}.csv", e.technology)))?);
        writeln!(out, "error_m")?;
        for v in e.cdf.sorted() {
            writeln!(out, "{v}")?;
        }
        out.flush()?;
    }
    Ok(())
}
