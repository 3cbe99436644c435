//! Attendance decisions for a stream of check-ins: a regress-then-classify
//! forest trained once, then each new measurement is placed in a zone and the
//! decision time is compared against the one-second budget.
//!
//!     cargo run --release --example attendance_check

use std::time::Instant;

use locfuse::eval::{horizontal_error, ATTENDANCE_ACCURACY_M, ATTENDANCE_LATENCY_S};
use locfuse::model::feature_vector;
use locfuse::{
    feature_matrix, fit_forest, generate_dataset, predict_position, reference_scenario, zone_of, ForestParams, Targets,
    TechSelector, OUTSIDE,
};

fn main() -> locfuse::Result<()> {
    let scenario = reference_scenario();
    let train = generate_dataset(&scenario, 250, 3)?;
    let x = feature_matrix(&train, TechSelector::Fusion)?;
    let truths: Vec<_> = train.samples.iter().map(|s| s.truth).collect();
    let forest = fit_forest(&x, &Targets::positions(&truths), &ForestParams::default())?;

    let arrivals = generate_dataset(&scenario, 20, 4)?;
    let mut slowest = 0.0f64;
    let (mut correct, mut within) = (0, 0);
    for s in &arrivals.samples {
        let started = Instant::now();
        let p = predict_position(&forest, &feature_vector(s, forest.columns()))?;
        let zone = zone_of(&p, &scenario.zones)?;
        slowest = slowest.max(started.elapsed().as_secs_f64());
        let err = horizontal_error(&p, &s.truth);
        correct += usize::from(zone == s.zone);
        within += usize::from(err <= ATTENDANCE_ACCURACY_M);
        let status = if zone == OUTSIDE { "absent" } else { "present" };
        println!(
            "{:>4}: {status:<7} {zone:<7} (truth {:<7}) error {err:4.2} m",
            s.id, s.zone
        );
    }
    println!(
        "{correct}/{} zones correct, {within} within {ATTENDANCE_ACCURACY_M} m, slowest decision {:.3} ms (budget {} s)",
        arrivals.len(),
        slowest * 1e3,
        ATTENDANCE_LATENCY_S
    );
    Ok(())
}
