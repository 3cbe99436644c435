//! Compares the classical techniques on one train/test split: proximity,
//! RSSI ranging with multilateration, range (RTT) multilateration and kNN
//! fingerprinting.
//!
//!     cargo run --release --example classical_baselines

use locfuse::eval::{horizontal_error, percentile, CDF_LEVEL};
use locfuse::locate::{
    knn_locate, multilaterate, proximity_locate, range_observations, rssi_to_range, FingerprintDb, RangeObservation,
};
use locfuse::model::feature_vector;
use locfuse::{generate_dataset, reference_scenario, Position, RadioTechnology, Result, Sample, TechSelector};

fn report(name: &str, errors: &[f64]) -> Result<()> {
    let mean = errors.iter().sum::<f64>() / errors.len() as f64;
    println!(
        "{name:<22} mean {mean:5.2} m   p{:.0} {:5.2} m   ({} located)",
        CDF_LEVEL * 100.0,
        percentile(errors, CDF_LEVEL)?,
        errors.len()
    );
    Ok(())
}

fn main() -> Result<()> {
    let scenario = reference_scenario();
    let train = generate_dataset(&scenario, 250, 11)?;
    let test = generate_dataset(&scenario, 100, 12)?;
    let db = FingerprintDb::from_dataset(&train, TechSelector::Fusion)?;

    let rssi_ranges = |s: &Sample| -> Vec<RangeObservation> {
        scenario
            .roster
            .iter()
            .filter_map(|ap| {
                let params = scenario.params_for(ap.tech).ok()?;
                let d = rssi_to_range(*s.rssi.get(&ap.id)?, ap.tx_power_dbm, params).ok()?;
                Some(RangeObservation::new(ap.position, d))
            })
            .collect()
    };
    let wifi_only = |obs: Vec<RangeObservation>| -> Vec<RangeObservation> {
        obs.into_iter()
            .filter(|o| {
                scenario
                    .roster
                    .iter()
                    .any(|ap| ap.tech == RadioTechnology::WiFi && ap.position == o.ap_position)
            })
            .collect()
    };

    let mut errs: [Vec<f64>; 5] = Default::default();
    for s in &test.samples {
        let x = feature_vector(s, &db.columns);
        let mut push = |slot: usize, p: Result<Position>| {
            if let Ok(p) = p {
                errs[slot].push(horizontal_error(&p, &s.truth));
            }
        };
        push(0, proximity_locate(&x, &scenario.roster, &db.columns));
        push(1, multilaterate(&rssi_ranges(s), None));
        push(
            2,
            multilaterate(&wifi_only(range_observations(s, &scenario.roster)), None),
        );
        push(3, multilaterate(&range_observations(s, &scenario.roster), None));
        push(4, knn_locate(&db, &x, 5));
    }
    report("proximity", &errs[0])?;
    report("rssi multilateration", &errs[1])?;
    report("wifi rtt ranging", &errs[2])?;
    report("all-ap ranging", &errs[3])?;
    report("knn (k=5)", &errs[4])?;
    Ok(())
}
