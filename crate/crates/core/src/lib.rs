//! Indoor localization for attendance control from 5G and WiFi signal
//! strength.
//!
//! The crate covers the whole pipeline: a propagation simulator that produces
//! labelled measurement datasets ([`sim`]), random forests grown from scratch
//! ([`forest`]), classical baselines and the two attendance pipelines
//! ([`locate`]), Monte Carlo evaluation ([`eval`]), and the operational shell
//! around them: dataset CSV ([`csvio`]), the HTTP ingestion service
//! ([`service`]) and the `locfuse` command line ([`cli`]).
//!
//! ```
//! use locfuse::{feature_matrix, fit_forest, generate_dataset, reference_scenario};
//! use locfuse::{ForestParams, Targets, TechSelector};
//!
//! let scenario = reference_scenario();
//! let data = generate_dataset(&scenario, 60, 7).unwrap();
//! let x = feature_matrix(&data, TechSelector::Fusion).unwrap();
//! let labels: Vec<&str> = data.samples.iter().map(|s| s.zone.as_str()).collect();
//! let params = ForestParams { n_trees: 10, ..ForestParams::default() };
//! let forest = fit_forest(&x, &Targets::classes(&labels), &params).unwrap();
//! assert_eq!(forest.trees().len(), 10);
//! ```

pub mod cli;
pub mod csvio;
pub mod decimal;
pub mod error;
pub mod eval;
pub mod forest;
pub mod locate;
pub mod model;
pub mod seed;
pub mod service;
pub mod sim;

pub use csvio::{load_dataset_csv, read_dataset_csv, save_dataset_csv, write_dataset_csv};
pub use error::{Error, Result};
pub use eval::{run_experiment, ExperimentConfig, ExperimentReport, Method};
pub use forest::{fit_forest, predict_class, predict_position, Forest, ForestKind, ForestParams, Targets};
pub use model::{
    feature_matrix, validate_dataset, zone_of, AccessPoint, Dataset, FeatureMatrix, Position, RadioTechnology, Rect,
    Sample, TechSelector, Zone, OUTSIDE, RSSI_FLOOR,
};
pub use sim::{generate_dataset, reference_scenario, PropagationParams, Scenario};
