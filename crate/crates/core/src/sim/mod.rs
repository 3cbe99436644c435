//! Log-distance path-loss simulator with log-normal shadowing and per-wall
//! attenuation, plus the two-laboratory reference scenario.

mod config;
mod reference;

use std::collections::BTreeMap;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decimal;
use crate::error::{Error, Result};
use crate::model::{zone_of, AccessPoint, Dataset, Position, RadioTechnology, Rect, Sample, Zone, RSSI_FLOOR};
use crate::seed::{child_rng, Rng};

pub use config::{load_scenario, parse_scenario, scenario_to_toml};
pub use reference::{
    reference_scenario, FIVEG_FREQUENCY_MHZ, FIVEG_TX_POWER_DBM, UE_HEIGHT_M, WIFI_AP_HEIGHT_M, WIFI_FREQUENCY_MHZ,
    WIFI_TX_POWER_DBM,
};

/// Propagation constants for one radio technology. Reference distance is 1 m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagationParams {
    /// Path loss at 1 m, dB.
    pub pl0_db: f64,
    /// Path-loss exponent.
    pub exponent: f64,
    /// Standard deviation of log-normal shadowing, dB.
    pub shadow_sigma_db: f64,
    /// Attenuation per wall crossed, dB.
    pub wall_loss_db: f64,
    /// Standard deviation of simulated ranging noise, m.
    #[serde(default = "default_range_noise")]
    pub range_noise_sigma_m: f64,
}

fn default_range_noise() -> f64 {
    1.0
}

impl PropagationParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.pl0_db.is_finite()
            && self.exponent.is_finite()
            && self.exponent > 0.0
            && self.shadow_sigma_db >= 0.0
            && self.wall_loss_db >= 0.0
            && self.range_noise_sigma_m >= 0.0
            && self.shadow_sigma_db.is_finite()
            && self.wall_loss_db.is_finite()
            && self.range_noise_sigma_m.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParam(format!(
                "propagation parameters out of range: {self:?}"
            )))
        }
    }
}

/// Straight wall segment in the horizontal plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wall {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl Wall {
    pub const fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Self {
        Self { x1, y1, x2, y2 }
    }

    /// Whether the closed segment from `a` to `b` (horizontal projection)
    /// touches this wall.
    pub fn crosses(&self, a: &Position, b: &Position) -> bool {
        segments_intersect((a.x, a.y), (b.x, b.y), (self.x1, self.y1), (self.x2, self.y2))
    }
}

fn orient(p: (f64, f64), q: (f64, f64), r: (f64, f64)) -> f64 {
    (q.0 - p.0) * (r.1 - p.1) - (q.1 - p.1) * (r.0 - p.0)
}

fn on_segment(p: (f64, f64), q: (f64, f64), r: (f64, f64)) -> bool {
    r.0 >= p.0.min(q.0) && r.0 <= p.0.max(q.0) && r.1 >= p.1.min(q.1) && r.1 <= p.1.max(q.1)
}

fn segments_intersect(p1: (f64, f64), p2: (f64, f64), q1: (f64, f64), q2: (f64, f64)) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub roster: Vec<AccessPoint>,
    pub zones: Vec<Zone>,
    pub walls: Vec<Wall>,
    pub params: BTreeMap<RadioTechnology, PropagationParams>,
    pub sampling_region: Rect,
    /// Height at which simulated UEs are held.
    pub ue_height_m: f64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.roster.is_empty() {
            return Err(Error::InvalidParam("scenario roster is empty".into()));
        }
        let mut ids = std::collections::HashSet::new();
        for ap in &self.roster {
            if !ids.insert(ap.id.as_str()) {
                return Err(Error::InvalidParam(format!("duplicate access point id {:?}", ap.id)));
            }
            if !ap.position.is_finite() || !ap.tx_power_dbm.is_finite() {
                return Err(Error::InvalidParam(format!(
                    "access point {:?} has non-finite fields",
                    ap.id
                )));
            }
            if !self.params.contains_key(&ap.tech) {
                return Err(Error::InvalidParam(format!(
                    "no propagation parameters for {}",
                    ap.tech
                )));
            }
        }
        for p in self.params.values() {
            p.validate()?;
        }
        if !self.sampling_region.is_well_formed() {
            return Err(Error::InvalidParam("sampling region is empty".into()));
        }
        if !self.ue_height_m.is_finite() {
            return Err(Error::InvalidParam("UE height must be finite".into()));
        }
        for z in &self.zones {
            if !z.rect.is_well_formed() {
                return Err(Error::InvalidParam(format!(
                    "zone {:?} is not a proper rectangle",
                    z.id
                )));
            }
        }
        zone_of(&Position::default(), &self.zones)?;
        Ok(())
    }

    pub fn params_for(&self, tech: RadioTechnology) -> Result<&PropagationParams> {
        self.params
            .get(&tech)
            .ok_or_else(|| Error::InvalidParam(format!("no propagation parameters for {tech}")))
    }

    pub fn walls_crossed(&self, a: &Position, b: &Position) -> usize {
        self.walls.iter().filter(|w| w.crosses(a, b)).count()
    }
}

/// Free-space path loss in dB at `distance_m` for a carrier of `frequency_mhz`.
pub fn free_space_path_loss_db(distance_m: f64, frequency_mhz: f64) -> f64 {
    20.0 * distance_m.log10() + 20.0 * frequency_mhz.log10() - 27.55
}

/// Deterministic log-distance path loss: `pl0 + 10 n log10(d / 1 m)`.
pub fn path_loss_db(distance_m: f64, params: &PropagationParams) -> Result<f64> {
    if distance_m.is_nan() || distance_m <= 0.0 {
        return Err(Error::NonPositiveDistance(distance_m));
    }
    Ok(params.pl0_db + 10.0 * params.exponent * distance_m.log10())
}

/// Received power at `ue` from `ap`, in dBm, clipped to `[RSSI_FLOOR, 0]`.
///
/// Exactly one standard-normal draw is taken from `rng` per call, whatever
/// the shadowing sigma.
pub fn simulate_rssi(ap: &AccessPoint, ue: &Position, scenario: &Scenario, rng: &mut Rng) -> Result<f64> {
    let params = scenario.params_for(ap.tech)?;
    let distance = ap.position.distance_3d(ue);
    if distance == 0.0 {
        return Err(Error::DegenerateGeometry("UE coincides with access point"));
    }
    let loss = path_loss_db(distance, params)?;
    let walls = scenario.walls_crossed(&ap.position, ue) as f64;
    let z: f64 = StandardNormal.sample(rng);
    let rssi = ap.tx_power_dbm - loss - walls * params.wall_loss_db - params.shadow_sigma_db * z;
    Ok(rssi.clamp(RSSI_FLOOR, 0.0))
}

/// Simulated time-of-flight range: true 3D distance plus Gaussian noise,
/// clamped at zero.
pub fn simulate_range(ap: &AccessPoint, ue: &Position, params: &PropagationParams, rng: &mut Rng) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    (ap.position.distance_3d(ue) + params.range_noise_sigma_m * z).max(0.0)
}

/// Draws `n_samples` UE positions uniformly over the sampling region and
/// simulates RSSI and range to every access point.
///
/// Sample `i` uses the generator `child_rng(seed, i)`, so the output does not
/// depend on how the index space is split across threads. Stored values are
/// rounded to nine significant digits. The recorded ground truth is
/// horizontal (`z = 0`); the UE height only enters the simulated distances.
pub fn generate_dataset(scenario: &Scenario, n_samples: usize, seed: u64) -> Result<Dataset> {
    scenario.validate()?;
    if n_samples == 0 {
        return Err(Error::InvalidParam("n_samples must be at least 1".into()));
    }
    let width = n_samples.to_string().len();
    let samples = (0..n_samples)
        .into_par_iter()
        .map(|i| simulate_sample(scenario, i, width, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset::new(scenario.roster.clone(), scenario.zones.clone(), samples))
}

fn simulate_sample(scenario: &Scenario, index: usize, id_width: usize, seed: u64) -> Result<Sample> {
    let mut rng = child_rng(seed, index as u64);
    let region = &scenario.sampling_region;
    let x = decimal::quantize(region.x_min + region.width() * rng.random::<f64>());
    let y = decimal::quantize(region.y_min + region.height() * rng.random::<f64>());
    let ue = Position::new_3d(x, y, scenario.ue_height_m);
    let mut rssi = BTreeMap::new();
    let mut ranges = BTreeMap::new();
    for ap in &scenario.roster {
        let params = scenario.params_for(ap.tech)?;
        rssi.insert(
            ap.id.clone(),
            decimal::quantize(simulate_rssi(ap, &ue, scenario, &mut rng)?),
        );
        ranges.insert(
            ap.id.clone(),
            decimal::quantize(simulate_range(ap, &ue, params, &mut rng)),
        );
    }
    let truth = Position::new(x, y);
    Ok(Sample {
        id: format!("s{:0id_width$}", index + 1),
        rssi,
        ranges,
        zone: zone_of(&truth, &scenario.zones)?.to_string(),
        truth,
    })
}
