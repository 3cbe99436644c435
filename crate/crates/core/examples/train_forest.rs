//! Trains a zone classifier and a position regressor on fused 5G + WiFi
//! features, stores them in the flat-text model format and reloads them.
//!
//!     cargo run --release --example train_forest

use std::io::BufReader;

use locfuse::eval::horizontal_error;
use locfuse::forest::{read_forest, write_forest};
use locfuse::locate::{classify_pipeline, regress_then_classify};
use locfuse::model::feature_vector;
use locfuse::{
    feature_matrix, fit_forest, generate_dataset, predict_position, reference_scenario, ForestParams, Targets,
    TechSelector,
};

fn main() -> locfuse::Result<()> {
    let scenario = reference_scenario();
    let train = generate_dataset(&scenario, 250, 1)?;
    let test = generate_dataset(&scenario, 50, 2)?;

    let x = feature_matrix(&train, TechSelector::Fusion)?;
    let labels: Vec<&str> = train.samples.iter().map(|s| s.zone.as_str()).collect();
    let truths: Vec<_> = train.samples.iter().map(|s| s.truth).collect();
    let params = ForestParams::default().with_seed(42);
    let classifier = fit_forest(&x, &Targets::classes(&labels), &params)?;
    let regressor = fit_forest(&x, &Targets::positions(&truths), &params)?;

    let mut text = Vec::new();
    write_forest(&regressor, &mut text)?;
    let reloaded = read_forest(BufReader::new(text.as_slice()))?;
    assert_eq!(reloaded, regressor);
    let depth = regressor.trees().iter().map(|t| t.depth()).max().unwrap_or(0);
    println!(
        "regressor: {} trees, max depth {depth}, {} bytes serialized",
        regressor.trees().len(),
        text.len()
    );

    let (mut hits_c, mut hits_r, mut err) = (0, 0, 0.0);
    for s in &test.samples {
        let f = feature_vector(s, classifier.columns());
        hits_c += usize::from(classify_pipeline(&classifier, &f)? == s.zone);
        hits_r += usize::from(regress_then_classify(&reloaded, &f, &scenario.zones)? == s.zone);
        err += horizontal_error(&predict_position(&reloaded, &f)?, &s.truth);
    }
    let n = test.len() as f64;
    println!("classify accuracy        {:.1}%", 100.0 * hits_c as f64 / n);
    println!("regress-then-classify    {:.1}%", 100.0 * hits_r as f64 / n);
    println!("mean horizontal error    {:.2} m", err / n);
    Ok(())
}
