use std::collections::BTreeMap;

use super::{free_space_path_loss_db, PropagationParams, Scenario, Wall};
use crate::model::{AccessPoint, Position, RadioTechnology, Rect, Zone};

pub const FIVEG_FREQUENCY_MHZ: f64 = 3774.990;
pub const FIVEG_TX_POWER_DBM: f64 = 20.0;
/// 2.4 GHz channel 6.
pub const WIFI_FREQUENCY_MHZ: f64 = 2437.0;
pub const WIFI_TX_POWER_DBM: f64 = 20.0;
pub const WIFI_AP_HEIGHT_M: f64 = 2.0;
/// Handheld phone height.
pub const UE_HEIGHT_M: f64 = 1.5;

const LAB_WIDTH_M: f64 = 7.0;
const LAB_DEPTH_M: f64 = 5.0;
const CORRIDOR_DEPTH_M: f64 = 2.0;

fn pl0_for(frequency_mhz: f64) -> f64 {
    // one decimal, so the config file shows a readable constant
    (free_space_path_loss_db(1.0, frequency_mhz) * 10.0).round() / 10.0
}

/// Two adjacent 7 m x 5 m laboratories sharing one interior wall, with a
/// 2 m corridor strip running along their north side. Three gNBs and three
/// WiFi APs are spread over the map.
///
/// Geometry and propagation constants are a calibrated stand-in for the
/// measured site, not a survey of it.
pub fn reference_scenario() -> Scenario {
    let total_w = 2.0 * LAB_WIDTH_M;
    let total_h = LAB_DEPTH_M + CORRIDOR_DEPTH_M;
    let zones = vec![
        Zone::new("lab1", Rect::new(0.0, 0.0, LAB_WIDTH_M, LAB_DEPTH_M).unwrap()),
        Zone::new("lab2", Rect::new(LAB_WIDTH_M, 0.0, total_w, LAB_DEPTH_M).unwrap()),
    ];
    let walls = vec![
        Wall::new(LAB_WIDTH_M, 0.0, LAB_WIDTH_M, LAB_DEPTH_M),
        Wall::new(0.0, LAB_DEPTH_M, total_w, LAB_DEPTH_M),
    ];
    let g = |id: &str, x: f64, y: f64, z: f64| {
        AccessPoint::new(
            id,
            RadioTechnology::FiveG,
            Position::new_3d(x, y, z),
            FIVEG_TX_POWER_DBM,
        )
    };
    let w = |id: &str, x: f64, y: f64| {
        AccessPoint::new(
            id,
            RadioTechnology::WiFi,
            Position::new_3d(x, y, WIFI_AP_HEIGHT_M),
            WIFI_TX_POWER_DBM,
        )
    };
    let roster = vec![
        g("g1", 1.5, 1.0, 2.5),
        g("g2", 12.5, 4.0, 3.5),
        g("g3", 7.5, 6.5, 3.5),
        w("w1", 5.5, 4.5),
        w("w2", 9.5, 0.5),
        w("w3", 0.5, 6.5),
    ];
    let params = BTreeMap::from([
        (
            RadioTechnology::FiveG,
            PropagationParams {
                pl0_db: pl0_for(FIVEG_FREQUENCY_MHZ),
                exponent: 2.2,
                shadow_sigma_db: 4.0,
                wall_loss_db: 8.0,
                range_noise_sigma_m: 1.0,
            },
        ),
        (
            RadioTechnology::WiFi,
            PropagationParams {
                pl0_db: pl0_for(WIFI_FREQUENCY_MHZ),
                exponent: 2.5,
                shadow_sigma_db: 4.0,
                wall_loss_db: 8.0,
                range_noise_sigma_m: 1.0,
            },
        ),
    ]);
    Scenario {
        roster,
        zones,
        walls,
        params,
        sampling_region: Rect::new(0.0, 0.0, total_w, total_h).unwrap(),
        ue_height_m: UE_HEIGHT_M,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_roster_shape() {
        let sc = reference_scenario();
        sc.validate().unwrap();
        let gnbs: Vec<_> = sc.roster.iter().filter(|a| a.tech == RadioTechnology::FiveG).collect();
        let aps: Vec<_> = sc.roster.iter().filter(|a| a.tech == RadioTechnology::WiFi).collect();
        assert_eq!(sc.roster.len(), 6);
        assert_eq!(gnbs.len(), 3);
        assert_eq!(aps.len(), 3);
        assert!(gnbs.iter().any(|a| a.position.z == 2.5));
        assert!(gnbs.iter().any(|a| a.position.z == 3.5));
        assert!(gnbs.iter().all(|a| a.tx_power_dbm == 20.0));
        assert!(aps.iter().all(|a| a.position.z == 2.0));
        assert_eq!(sc.params[&RadioTechnology::FiveG].pl0_db, 44.0);
        assert_eq!(sc.zones.len(), 2);
        assert_eq!(sc.zones[0].rect.area(), 35.0);
    }
}
