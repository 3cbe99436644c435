//! Domain types shared by every other module: access points, zones,
//! measurement samples, datasets and the feature matrices fed to the models.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// RSSI assigned to an access point that was not heard in a sample.
pub const RSSI_FLOOR: f64 = -120.0;

/// Label for a position that falls in no zone.
pub const OUTSIDE: &str = "outside";

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub z: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y, z: 0.0 }
    }

    pub const fn new_3d(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn horizontal_distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn distance_3d(&self, other: &Position) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RadioTechnology {
    #[serde(rename = "5g")]
    FiveG,
    #[serde(rename = "wifi")]
    WiFi,
}

impl RadioTechnology {
    pub const ALL: [RadioTechnology; 2] = [RadioTechnology::FiveG, RadioTechnology::WiFi];

    pub fn as_str(&self) -> &'static str {
        match self {
            RadioTechnology::FiveG => "5g",
            RadioTechnology::WiFi => "wifi",
        }
    }
}

impl fmt::Display for RadioTechnology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RadioTechnology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "5g" | "fiveg" | "nr" => Ok(RadioTechnology::FiveG),
            "wifi" => Ok(RadioTechnology::WiFi),
            other => Err(Error::InvalidParam(format!("unknown radio technology {other:?}"))),
        }
    }
}

/// Which access points feed a model: one technology alone, or all of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TechSelector {
    #[serde(rename = "5g")]
    FiveG,
    #[serde(rename = "wifi")]
    WiFi,
    #[serde(rename = "fusion")]
    Fusion,
}

impl TechSelector {
    pub const ALL: [TechSelector; 3] = [TechSelector::FiveG, TechSelector::WiFi, TechSelector::Fusion];

    pub fn matches(&self, tech: RadioTechnology) -> bool {
        match self {
            TechSelector::FiveG => tech == RadioTechnology::FiveG,
            TechSelector::WiFi => tech == RadioTechnology::WiFi,
            TechSelector::Fusion => true,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            TechSelector::FiveG => "5g",
            TechSelector::WiFi => "wifi",
            TechSelector::Fusion => "fusion",
        }
    }
}

impl fmt::Display for TechSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TechSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fusion" => Ok(TechSelector::Fusion),
            other => match other.parse::<RadioTechnology>()? {
                RadioTechnology::FiveG => Ok(TechSelector::FiveG),
                RadioTechnology::WiFi => Ok(TechSelector::WiFi),
            },
        }
    }
}

/// A fixed transmitter: a 5G gNB or a WiFi access point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccessPoint {
    pub id: String,
    pub tech: RadioTechnology,
    pub position: Position,
    pub tx_power_dbm: f64,
}

impl AccessPoint {
    pub fn new(id: impl Into<String>, tech: RadioTechnology, position: Position, tx_power_dbm: f64) -> Self {
        Self {
            id: id.into(),
            tech,
            position,
            tx_power_dbm,
        }
    }
}

/// Axis-aligned rectangle in the horizontal plane, closed on all sides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self> {
        let rect = Self {
            x_min,
            y_min,
            x_max,
            y_max,
        };
        if !rect.is_well_formed() {
            return Err(Error::InvalidParam(format!(
                "rectangle ({x_min}, {y_min}, {x_max}, {y_max}) needs min < max on both axes"
            )));
        }
        Ok(rect)
    }

    pub fn is_well_formed(&self) -> bool {
        [self.x_min, self.y_min, self.x_max, self.y_max]
            .iter()
            .all(|v| v.is_finite())
            && self.x_min < self.x_max
            && self.y_min < self.y_max
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.x_min <= x && x <= self.x_max && self.y_min <= y && y <= self.y_max
    }

    /// True when the interiors intersect; sharing an edge is not an overlap.
    pub fn overlaps(&self, other: &Rect) -> bool {
        self.x_min < other.x_max && other.x_min < self.x_max && self.y_min < other.y_max && other.y_min < self.y_max
    }

    pub fn area(&self) -> f64 {
        (self.x_max - self.x_min) * (self.y_max - self.y_min)
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }
}

/// A labelled room used as an attendance class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Zone {
    pub id: String,
    #[serde(flatten)]
    pub rect: Rect,
}

impl Zone {
    pub fn new(id: impl Into<String>, rect: Rect) -> Self {
        Self { id: id.into(), rect }
    }
}

/// One measurement instant.
///
/// `rssi` and `ranges` only hold access points that were actually measured;
/// the floor value is substituted later, when a [`FeatureMatrix`] is built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub id: String,
    pub rssi: BTreeMap<String, f64>,
    #[serde(default)]
    pub ranges: BTreeMap<String, f64>,
    pub truth: Position,
    pub zone: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub roster: Vec<AccessPoint>,
    pub zones: Vec<Zone>,
    pub samples: Vec<Sample>,
}

impl Dataset {
    pub fn new(roster: Vec<AccessPoint>, zones: Vec<Zone>, samples: Vec<Sample>) -> Self {
        Self { roster, zones, samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn access_point(&self, id: &str) -> Option<&AccessPoint> {
        self.roster.iter().find(|ap| ap.id == id)
    }

    /// Label set the attendance classifiers work over: every zone id plus
    /// [`OUTSIDE`], sorted.
    pub fn label_set(&self) -> Vec<String> {
        let mut labels: Vec<String> = self.zones.iter().map(|z| z.id.clone()).collect();
        labels.push(OUTSIDE.to_string());
        labels.sort();
        labels.dedup();
        labels
    }
}

/// Returns the zone whose closed rectangle contains `p`, or [`OUTSIDE`].
pub fn zone_of<'a>(p: &Position, zones: &'a [Zone]) -> Result<&'a str> {
    check_disjoint(zones)?;
    Ok(zones
        .iter()
        .find(|z| z.rect.contains(p.x, p.y))
        .map(|z| z.id.as_str())
        .unwrap_or(OUTSIDE))
}

fn check_disjoint(zones: &[Zone]) -> Result<()> {
    for (i, a) in zones.iter().enumerate() {
        for b in &zones[i + 1..] {
            if a.rect.overlaps(&b.rect) {
                return Err(Error::AmbiguousZones(a.id.clone(), b.id.clone()));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub rule: &'static str,
    pub sample_id: Option<String>,
    pub detail: String,
}

impl Violation {
    fn roster(rule: &'static str, detail: String) -> Self {
        Self {
            rule,
            sample_id: None,
            detail,
        }
    }

    fn sample(rule: &'static str, sample: &Sample, detail: String) -> Self {
        Self {
            rule,
            sample_id: Some(sample.id.clone()),
            detail,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.rule)?;
        if let Some(id) = &self.sample_id {
            write!(f, ", sample {id}")?;
        }
        if !self.detail.is_empty() {
            write!(f, ": {}", self.detail)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn rules(&self) -> Vec<&'static str> {
        self.violations.iter().map(|v| v.rule).collect()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            return Ok(());
        }
        let lines: Vec<String> = self.violations.iter().map(ToString::to_string).collect();
        Err(Error::InvalidDataset(lines.join("; ")))
    }
}

/// Collects every invariant violation in `dataset`. Nothing is thrown; an
/// empty report means the dataset is accepted by every downstream operation.
pub fn validate_dataset(dataset: &Dataset) -> ValidationReport {
    let mut out = Vec::new();
    validate_layout(&dataset.roster, &dataset.zones, &mut out);
    let zones_ok = check_disjoint(&dataset.zones).is_ok() && dataset.zones.iter().all(|z| z.rect.is_well_formed());
    let known: HashSet<&str> = dataset.roster.iter().map(|ap| ap.id.as_str()).collect();
    let mut seen = HashSet::new();
    for sample in &dataset.samples {
        if !seen.insert(sample.id.as_str()) {
            out.push(Violation::sample("duplicate-sample-id", sample, String::new()));
        }
        validate_sample_against(sample, &known, zones_ok.then_some(dataset.zones.as_slice()), &mut out);
    }
    ValidationReport { violations: out }
}

/// Checks a single sample against a roster and zone layout, as done by the
/// ingestion service before a record is persisted.
pub fn validate_sample(sample: &Sample, roster: &[AccessPoint], zones: &[Zone]) -> ValidationReport {
    let known: HashSet<&str> = roster.iter().map(|ap| ap.id.as_str()).collect();
    let zones_ok = check_disjoint(zones).is_ok();
    let mut out = Vec::new();
    validate_sample_against(sample, &known, zones_ok.then_some(zones), &mut out);
    ValidationReport { violations: out }
}

fn validate_layout(roster: &[AccessPoint], zones: &[Zone], out: &mut Vec<Violation>) {
    if roster.is_empty() {
        out.push(Violation::roster("empty-roster", String::new()));
    }
    let mut ids = HashSet::new();
    for ap in roster {
        if !ids.insert(ap.id.as_str()) {
            out.push(Violation::roster("duplicate-ap", ap.id.clone()));
        }
        if !ap.tx_power_dbm.is_finite() || !ap.position.is_finite() {
            out.push(Violation::roster("invalid-ap", ap.id.clone()));
        }
    }
    let mut zone_ids = HashSet::new();
    for (i, zone) in zones.iter().enumerate() {
        if !zone_ids.insert(zone.id.as_str()) || zone.id == OUTSIDE {
            out.push(Violation::roster("duplicate-zone", zone.id.clone()));
        }
        if !zone.rect.is_well_formed() {
            out.push(Violation::roster("invalid-zone", zone.id.clone()));
        }
        for other in &zones[i + 1..] {
            if zone.rect.overlaps(&other.rect) {
                out.push(Violation::roster(
                    "ambiguous-zones",
                    format!("{} / {}", zone.id, other.id),
                ));
            }
        }
    }
}

fn validate_sample_against(sample: &Sample, known: &HashSet<&str>, zones: Option<&[Zone]>, out: &mut Vec<Violation>) {
    for (ap, &rssi) in &sample.rssi {
        if !known.contains(ap.as_str()) {
            out.push(Violation::sample("unknown-ap", sample, ap.clone()));
        } else if !(RSSI_FLOOR..=0.0).contains(&rssi) {
            out.push(Violation::sample("rssi-out-of-range", sample, format!("{ap}={rssi}")));
        }
    }
    for (ap, &range) in &sample.ranges {
        if !known.contains(ap.as_str()) {
            out.push(Violation::sample("unknown-ap", sample, ap.clone()));
        } else if !(range >= 0.0 && range.is_finite()) {
            out.push(Violation::sample("negative-range", sample, format!("{ap}={range}")));
        }
    }
    if !sample.truth.is_finite() {
        out.push(Violation::sample("non-finite-position", sample, String::new()));
    } else if let Some(zones) = zones {
        let expected = zones
            .iter()
            .find(|z| z.rect.contains(sample.truth.x, sample.truth.y))
            .map(|z| z.id.as_str())
            .unwrap_or(OUTSIDE);
        if sample.zone != expected {
            out.push(Violation::sample(
                "label-mismatch",
                sample,
                format!("labelled {:?}, position is in {expected:?}", sample.zone),
            ));
        }
    }
}

/// Per-sample RSSI vectors over a fixed, ordered set of access points.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl FeatureMatrix {
    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Roster ids matching `selector`, in roster order.
pub fn selected_columns(roster: &[AccessPoint], selector: TechSelector) -> Result<Vec<String>> {
    let columns: Vec<String> = roster
        .iter()
        .filter(|ap| selector.matches(ap.tech))
        .map(|ap| ap.id.clone())
        .collect();
    if columns.is_empty() {
        return Err(Error::EmptySelector(selector.to_string()));
    }
    Ok(columns)
}

/// RSSI of `sample` at each of `columns`, floor-filled.
pub fn feature_vector(sample: &Sample, columns: &[String]) -> Vec<f64> {
    columns
        .iter()
        .map(|id| sample.rssi.get(id).copied().unwrap_or(RSSI_FLOOR))
        .collect()
}

pub fn feature_matrix(dataset: &Dataset, selector: TechSelector) -> Result<FeatureMatrix> {
    let columns = selected_columns(&dataset.roster, selector)?;
    let rows = dataset.samples.iter().map(|s| feature_vector(s, &columns)).collect();
    Ok(FeatureMatrix { columns, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zone(id: &str, x0: f64, y0: f64, x1: f64, y1: f64) -> Zone {
        Zone::new(id, Rect::new(x0, y0, x1, y1).unwrap())
    }

    fn roster() -> Vec<AccessPoint> {
        vec![
            AccessPoint::new("g1", RadioTechnology::FiveG, Position::new_3d(0.0, 0.0, 2.5), 20.0),
            AccessPoint::new("g2", RadioTechnology::FiveG, Position::new_3d(10.0, 0.0, 3.5), 20.0),
            AccessPoint::new("w1", RadioTechnology::WiFi, Position::new_3d(0.0, 10.0, 2.0), 20.0),
        ]
    }

    fn sample(id: &str, rssi: &[(&str, f64)], truth: Position, zone: &str) -> Sample {
        Sample {
            id: id.into(),
            rssi: rssi.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            ranges: BTreeMap::new(),
            truth,
            zone: zone.into(),
        }
    }

    fn lab_zones() -> Vec<Zone> {
        vec![zone("lab1", 0.0, 0.0, 5.0, 7.0), zone("lab2", 5.0, 0.0, 10.0, 7.0)]
    }

    #[test]
    fn zone_of_interior_boundary_exterior() {
        let zones = vec![zone("A", 0.0, 0.0, 5.0, 7.0)];
        assert_eq!(zone_of(&Position::new(1.0, 1.0), &zones).unwrap(), "A");
        assert_eq!(zone_of(&Position::new(5.0, 7.0), &zones).unwrap(), "A");
        assert_eq!(zone_of(&Position::new(-1.0, 0.0), &zones).unwrap(), OUTSIDE);
    }

    #[test]
    fn zone_of_rejects_overlap() {
        let zones = vec![zone("A", 0.0, 0.0, 5.0, 7.0), zone("B", 4.0, 0.0, 9.0, 7.0)];
        let err = zone_of(&Position::new(1.0, 1.0), &zones).unwrap_err();
        assert!(err.to_string().starts_with("ambiguous-zones"));
    }

    #[test]
    fn shared_edge_goes_to_first_zone() {
        let zones = lab_zones();
        assert_eq!(zone_of(&Position::new(5.0, 3.0), &zones).unwrap(), "lab1");
    }

    #[test]
    fn validate_flags_unknown_ap_once() {
        let ds = Dataset::new(
            roster(),
            lab_zones(),
            vec![
                sample("s1", &[("g1", -50.0)], Position::new(1.0, 1.0), "lab1"),
                sample("s2", &[("w1", -60.0)], Position::new(6.0, 1.0), "lab2"),
                sample("s3", &[("X9", -60.0)], Position::new(6.0, 1.0), "lab2"),
            ],
        );
        let report = validate_dataset(&ds);
        assert_eq!(report.violations.len(), 1);
        let v = &report.violations[0];
        assert_eq!(v.rule, "unknown-ap");
        assert!(v.to_string().starts_with("unknown-ap, sample s3"));
    }

    #[test]
    fn validate_accepts_well_formed() {
        let ds = Dataset::new(
            roster(),
            lab_zones(),
            vec![
                sample("s1", &[("g1", -50.0)], Position::new(1.0, 1.0), "lab1"),
                sample("s2", &[("g2", -70.0), ("w1", -60.0)], Position::new(6.0, 1.0), "lab2"),
                sample("s3", &[], Position::new(20.0, 1.0), OUTSIDE),
            ],
        );
        assert!(validate_dataset(&ds).is_valid());
    }

    #[test]
    fn validate_flags_label_mismatch() {
        let ds = Dataset::new(
            roster(),
            lab_zones(),
            vec![sample("s1", &[("g1", -50.0)], Position::new(1.0, 1.0), "lab2")],
        );
        assert_eq!(validate_dataset(&ds).rules(), vec!["label-mismatch"]);
    }

    #[test]
    fn validate_flags_range_and_rssi_problems() {
        let mut s = sample("s1", &[("g1", 3.0), ("g2", -130.0)], Position::new(1.0, 1.0), "lab1");
        s.ranges.insert("w1".into(), -1.0);
        let ds = Dataset::new(roster(), lab_zones(), vec![s.clone(), s]);
        let rules = validate_dataset(&ds).rules();
        assert!(rules.contains(&"rssi-out-of-range"));
        assert!(rules.contains(&"negative-range"));
        assert!(rules.contains(&"duplicate-sample-id"));
    }

    #[test]
    fn validate_flags_layout_problems() {
        let ds = Dataset::new(
            vec![],
            vec![zone("A", 0.0, 0.0, 5.0, 5.0), zone("B", 1.0, 1.0, 2.0, 2.0)],
            vec![],
        );
        let rules = validate_dataset(&ds).rules();
        assert_eq!(rules, vec!["empty-roster", "ambiguous-zones"]);
    }

    #[test]
    fn feature_matrix_selectors() {
        let ds = Dataset::new(
            roster(),
            lab_zones(),
            vec![sample("s1", &[("g1", -50.0)], Position::new(1.0, 1.0), "lab1")],
        );
        let wifi = feature_matrix(&ds, TechSelector::WiFi).unwrap();
        assert_eq!(wifi.columns, vec!["w1"]);
        let fusion = feature_matrix(&ds, TechSelector::Fusion).unwrap();
        assert_eq!(fusion.columns, vec!["g1", "g2", "w1"]);
        assert_eq!(fusion.width(), 3);
        assert_eq!(fusion.rows[0], vec![-50.0, RSSI_FLOOR, RSSI_FLOOR]);
    }

    #[test]
    fn feature_matrix_empty_selector() {
        let mut ds = Dataset::new(roster(), lab_zones(), vec![]);
        ds.roster.retain(|ap| ap.tech == RadioTechnology::FiveG);
        let err = feature_matrix(&ds, TechSelector::WiFi).unwrap_err();
        assert!(err.to_string().starts_with("empty-selector"));
    }

    #[test]
    fn selector_parsing() {
        assert_eq!("5G".parse::<TechSelector>().unwrap(), TechSelector::FiveG);
        assert_eq!("fusion".parse::<TechSelector>().unwrap(), TechSelector::Fusion);
        assert!("lte".parse::<TechSelector>().is_err());
    }
}
