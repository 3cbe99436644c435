//! Monte Carlo evaluation on a simulated reference dataset.
//!
//!     cargo run --release --example monte_carlo -- [iterations] [samples] [seed]

use std::time::Instant;

use locfuse::eval::CDF_LEVEL;
use locfuse::{generate_dataset, reference_scenario, run_experiment, ExperimentConfig, Method, TechSelector};

fn main() -> locfuse::Result<()> {
    let mut args = std::env::args()
        .skip(1)
        .map(|a| a.parse::<u64>().expect("numeric argument"));
    let iterations = args.next().unwrap_or(100) as usize;
    let samples = args.next().unwrap_or(250) as usize;
    let seed = args.next().unwrap_or(2024);

    let dataset = generate_dataset(&reference_scenario(), samples, seed)?;
    let config = ExperimentConfig {
        n_iterations: iterations,
        master_seed: seed,
        ..ExperimentConfig::default()
    };
    let started = Instant::now();
    let report = run_experiment(&dataset, &config)?;
    println!(
        "{iterations} iterations on {samples} samples in {:.1?}",
        started.elapsed()
    );

    println!("{:<8} {:>10} {:>10} {:>10}", "tech", "classify", "regress", "cdf80 (m)");
    for tech in TechSelector::ALL {
        let acc = |m| report.mean_accuracy(tech, m).unwrap_or(f64::NAN) * 100.0;
        println!(
            "{:<8} {:>9.1}% {:>9.1}% {:>10.2}",
            tech.as_str(),
            acc(Method::Classification),
            acc(Method::RegressThenClassify),
            report.cdf80(tech).unwrap_or(f64::NAN)
        );
    }
    let fusion = report
        .error_summary(TechSelector::Fusion)
        .expect("fusion was evaluated");
    println!(
        "fusion: {:.0}% of errors within {:.2} m",
        CDF_LEVEL * 100.0,
        fusion.cdf80
    );
    Ok(())
}
