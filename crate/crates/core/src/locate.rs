//! Localization techniques: proximity, RSSI ranging, least-squares
//! multilateration, kNN fingerprinting and the two forest pipelines used for
//! attendance (direct zone classification and regress-then-classify).

use crate::error::{Error, Result};
use crate::forest::{predict_class, predict_position, Forest};
use crate::model::{feature_matrix, zone_of, AccessPoint, Dataset, Position, Sample, TechSelector, Zone, RSSI_FLOOR};
use crate::sim::PropagationParams;

/// Distance to an anchor at a known position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeObservation {
    pub ap_position: Position,
    pub distance: f64,
}

impl RangeObservation {
    pub fn new(ap_position: Position, distance: f64) -> Self {
        Self { ap_position, distance }
    }
}

/// Measured ranges of `sample`, for every roster AP that has one.
pub fn range_observations(sample: &Sample, roster: &[AccessPoint]) -> Vec<RangeObservation> {
    roster
        .iter()
        .filter_map(|ap| {
            sample
                .ranges
                .get(&ap.id)
                .map(|&d| RangeObservation::new(ap.position, d))
        })
        .collect()
}

/// Position of the strongest access point in `x`; ties go to the
/// lexicographically smallest id.
pub fn proximity_locate(x: &[f64], roster: &[AccessPoint], columns: &[String]) -> Result<Position> {
    if x.len() != columns.len() {
        return Err(Error::WidthMismatch {
            expected: columns.len(),
            actual: x.len(),
        });
    }
    let mut best: Option<(f64, &str)> = None;
    for (&rssi, id) in x.iter().zip(columns) {
        if rssi <= RSSI_FLOOR {
            continue;
        }
        let better = match best {
            None => true,
            Some((r, b)) => rssi > r || (rssi == r && id.as_str() < b),
        };
        if better {
            best = Some((rssi, id));
        }
    }
    let (_, id) = best.ok_or(Error::NoCoverage)?;
    roster
        .iter()
        .find(|ap| ap.id == id)
        .map(|ap| ap.position)
        .ok_or_else(|| Error::InvalidParam(format!("column {id:?} not in roster")))
}

/// Inverts the log-distance model: `10^((tx - pl0 - rssi) / (10 n))` metres.
pub fn rssi_to_range(rssi: f64, tx_power_dbm: f64, params: &PropagationParams) -> Result<f64> {
    if rssi.is_nan() || rssi <= RSSI_FLOOR {
        return Err(Error::Unrangeable(rssi));
    }
    Ok(10f64.powf((tx_power_dbm - params.pl0_db - rssi) / (10.0 * params.exponent)))
}

const MAX_ITERATIONS: usize = 50;
const STEP_TOLERANCE_M: f64 = 1e-6;
const COLLINEAR_TOLERANCE: f64 = 1e-9;

fn cost(p: (f64, f64), obs: &[RangeObservation]) -> f64 {
    obs.iter()
        .map(|o| {
            let r = (p.0 - o.ap_position.x).hypot(p.1 - o.ap_position.y);
            (r - o.distance).powi(2)
        })
        .sum()
}

/// Closed-form linearized least squares: subtracting the first circle
/// equation from the others gives `2 (a_i - a_0) . p = d_0^2 - d_i^2 +
/// |a_i|^2 - |a_0|^2`, solved through the 2x2 normal equations.
pub fn linearized_least_squares(obs: &[RangeObservation]) -> Result<Position> {
    if obs.len() < 3 {
        return Err(Error::Underdetermined(obs.len()));
    }
    let a0 = &obs[0].ap_position;
    let d0 = obs[0].distance;
    let (mut s11, mut s12, mut s22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for o in &obs[1..] {
        let a = &o.ap_position;
        let (u, v) = (2.0 * (a.x - a0.x), 2.0 * (a.y - a0.y));
        let rhs = d0 * d0 - o.distance * o.distance + (a.x * a.x + a.y * a.y) - (a0.x * a0.x + a0.y * a0.y);
        s11 += u * u;
        s12 += u * v;
        s22 += v * v;
        b1 += u * rhs;
        b2 += v * rhs;
    }
    let det = s11 * s22 - s12 * s12;
    if det.is_nan() || det <= COLLINEAR_TOLERANCE * s11 * s22 || s11 * s22 == 0.0 {
        return Err(Error::DegenerateGeometry(
            "anchors are collinear in the horizontal plane",
        ));
    }
    let x = (s22 * b1 - s12 * b2) / det;
    let y = (s11 * b2 - s12 * b1) / det;
    if !(x.is_finite() && y.is_finite()) {
        return Err(Error::Diverged);
    }
    Ok(Position::new(x, y))
}

/// Horizontal position minimizing `sum_i (|p - a_i| - d_i)^2`.
///
/// Gauss-Newton, warm-started from [`linearized_least_squares`] (or from
/// `initial_guess` when given). Stops once a step is shorter than 1 µm or
/// after 50 iterations, and returns the lowest-cost point visited, which is
/// never worse than the linearized solution. Anchor heights are ignored.
pub fn multilaterate(obs: &[RangeObservation], initial_guess: Option<Position>) -> Result<Position> {
    if obs.len() < 3 {
        return Err(Error::Underdetermined(obs.len()));
    }
    if obs
        .iter()
        .any(|o| o.distance.is_nan() || o.distance < 0.0 || !o.ap_position.is_finite())
    {
        return Err(Error::InvalidParam(
            "range observations need finite anchors and non-negative distances".into(),
        ));
    }
    let ls = linearized_least_squares(obs)?;
    let ls = (ls.x, ls.y);
    let mut best = (ls, cost(ls, obs));
    let mut p = match initial_guess {
        Some(g) if g.is_finite() => (g.x, g.y),
        _ => ls,
    };
    let c = cost(p, obs);
    if c < best.1 {
        best = (p, c);
    }
    for _ in 0..MAX_ITERATIONS {
        let (mut h11, mut h12, mut h22, mut g1, mut g2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for o in obs {
            let (dx, dy) = (p.0 - o.ap_position.x, p.1 - o.ap_position.y);
            let r = dx.hypot(dy);
            if r < 1e-12 {
                // gradient undefined on the anchor itself
                continue;
            }
            let (jx, jy) = (dx / r, dy / r);
            let e = r - o.distance;
            h11 += jx * jx;
            h12 += jx * jy;
            h22 += jy * jy;
            g1 += jx * e;
            g2 += jy * e;
        }
        let det = h11 * h22 - h12 * h12;
        if det.is_nan() || det <= COLLINEAR_TOLERANCE * h11 * h22 || h11 * h22 == 0.0 {
            break;
        }
        let step = (-(h22 * g1 - h12 * g2) / det, -(h11 * g2 - h12 * g1) / det);
        p = (p.0 + step.0, p.1 + step.1);
        if !(p.0.is_finite() && p.1.is_finite()) {
            return Err(Error::Diverged);
        }
        let c = cost(p, obs);
        if c < best.1 {
            best = (p, c);
        }
        if step.0.hypot(step.1) < STEP_TOLERANCE_M {
            break;
        }
    }
    Ok(Position::new(best.0 .0, best.0 .1))
}

/// Stored fingerprints: RSSI vectors over `columns` with their positions.
#[derive(Debug, Clone, PartialEq)]
pub struct FingerprintDb {
    pub columns: Vec<String>,
    pub entries: Vec<(Vec<f64>, Position)>,
}

impl FingerprintDb {
    pub fn from_dataset(dataset: &Dataset, selector: TechSelector) -> Result<Self> {
        let fm = feature_matrix(dataset, selector)?;
        let entries = fm
            .rows
            .into_iter()
            .zip(&dataset.samples)
            .map(|(row, s)| (row, s.truth))
            .collect();
        Ok(Self {
            columns: fm.columns,
            entries,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Mean position of the `k` fingerprints nearest to `x` (Euclidean, in dB);
/// equal distances keep database order.
pub fn knn_locate(db: &FingerprintDb, x: &[f64], k: usize) -> Result<Position> {
    if db.is_empty() {
        return Err(Error::EmptyInput("fingerprint database is empty"));
    }
    if k == 0 || k > db.len() {
        return Err(Error::InvalidParam(format!("k = {k} outside [1, {}]", db.len())));
    }
    if x.len() != db.columns.len() {
        return Err(Error::WidthMismatch {
            expected: db.columns.len(),
            actual: x.len(),
        });
    }
    let mut scored: Vec<(f64, usize)> = db
        .entries
        .iter()
        .enumerate()
        .map(|(i, (f, _))| (f.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (sx, sy) = scored[..k].iter().fold((0.0, 0.0), |(ax, ay), &(_, i)| {
        (ax + db.entries[i].1.x, ay + db.entries[i].1.y)
    });
    Ok(Position::new(sx / k as f64, sy / k as f64))
}

/// Pure classification: the forest's majority-vote zone.
pub fn classify_pipeline(forest: &Forest, x: &[f64]) -> Result<String> {
    predict_class(forest, x).map(str::to_string)
}

/// Regression first, then the zone containing the estimated position.
pub fn regress_then_classify(forest: &Forest, x: &[f64], zones: &[Zone]) -> Result<String> {
    let p = predict_position(forest, x)?;
    Ok(zone_of(&p, zones)?.to_string())
}
