//! Simulates a labelled measurement dataset on the reference scenario and
//! writes it as CSV.
//!
//!     cargo run --example simulate_dataset -- [samples] [seed] [out.csv]

use std::collections::BTreeMap;

use locfuse::sim::scenario_to_toml;
use locfuse::{generate_dataset, load_dataset_csv, reference_scenario, save_dataset_csv, validate_dataset};

fn main() -> locfuse::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n = args.first().map_or(250, |a| a.parse().expect("sample count"));
    let seed = args.get(1).map_or(7, |a| a.parse().expect("seed"));
    let out = args.get(2).cloned().unwrap_or_else(|| "reference.csv".into());

    let scenario = reference_scenario();
    println!("# scenario\n{}", scenario_to_toml(&scenario));

    let dataset = generate_dataset(&scenario, n, seed)?;
    validate_dataset(&dataset).into_result()?;
    let mut per_zone: BTreeMap<&str, usize> = BTreeMap::new();
    for s in &dataset.samples {
        *per_zone.entry(&s.zone).or_default() += 1;
    }
    println!("{} samples: {per_zone:?}", dataset.len());

    let first = &dataset.samples[0];
    println!(
        "{} at ({}, {}) in {}",
        first.id, first.truth.x, first.truth.y, first.zone
    );
    for (ap, rssi) in &first.rssi {
        println!("  {ap}: {rssi} dBm, range {} m", first.ranges[ap]);
    }

    save_dataset_csv(&dataset, &out)?;
    let back = load_dataset_csv(&out, &scenario.roster, &scenario.zones)?;
    assert_eq!(back, dataset);
    println!("wrote {out} (reloads identically)");
    Ok(())
}
