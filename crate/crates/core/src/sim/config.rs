//! TOML form of a [`Scenario`].
//!
//! ```toml
//! ue_height_m = 1.5
//!
//! [sampling_region]
//! x_min = 0.0
//! y_min = 0.0
//! x_max = 14.0
//! y_max = 7.0
//!
//! [[access_points]]
//! id = "g1"
//! tech = "5g"
//! x = 1.5
//! y = 1.0
//! z = 2.5
//! tx_power_dbm = 20.0
//!
//! [[zones]]
//! id = "lab1"
//! x_min = 0.0
//! ...
//!
//! [[walls]]
//! x1 = 7.0
//! ...
//!
//! [propagation.5g]
//! pl0_db = 44.0
//! exponent = 2.2
//! shadow_sigma_db = 4.0
//! wall_loss_db = 8.0
//! range_noise_sigma_m = 1.0
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{PropagationParams, Scenario, Wall, UE_HEIGHT_M};
use crate::error::{Error, Result};
use crate::model::{AccessPoint, Position, RadioTechnology, Rect, Zone};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(default = "default_ue_height")]
    ue_height_m: f64,
    sampling_region: Rect,
    access_points: Vec<ApEntry>,
    #[serde(default)]
    zones: Vec<Zone>,
    #[serde(default)]
    walls: Vec<Wall>,
    propagation: BTreeMap<String, PropagationParams>,
}

fn default_ue_height() -> f64 {
    UE_HEIGHT_M
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ApEntry {
    id: String,
    tech: RadioTechnology,
    x: f64,
    y: f64,
    z: f64,
    tx_power_dbm: f64,
}

pub fn scenario_to_toml(scenario: &Scenario) -> String {
    let file = ScenarioFile {
        ue_height_m: scenario.ue_height_m,
        sampling_region: scenario.sampling_region,
        access_points: scenario
            .roster
            .iter()
            .map(|ap| ApEntry {
                id: ap.id.clone(),
                tech: ap.tech,
                x: ap.position.x,
                y: ap.position.y,
                z: ap.position.z,
                tx_power_dbm: ap.tx_power_dbm,
            })
            .collect(),
        zones: scenario.zones.clone(),
        walls: scenario.walls.clone(),
        propagation: scenario
            .params
            .iter()
            .map(|(t, p)| (t.as_str().to_string(), *p))
            .collect(),
    };
    toml::to_string(&file).expect("scenario serializes to TOML")
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let params = file
        .propagation
        .into_iter()
        .map(|(k, v)| Ok((k.parse::<RadioTechnology>()?, v)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    let scenario = Scenario {
        roster: file
            .access_points
            .into_iter()
            .map(|a| AccessPoint::new(a.id, a.tech, Position::new_3d(a.x, a.y, a.z), a.tx_power_dbm))
            .collect(),
        zones: file.zones,
        walls: file.walls,
        params,
        sampling_region: file.sampling_region,
        ue_height_m: file.ue_height_m,
    };
    scenario.validate()?;
    Ok(scenario)
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    parse_scenario(&std::fs::read_to_string(path)?)
}
