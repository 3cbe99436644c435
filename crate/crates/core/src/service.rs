//! HTTP ingestion of measurement samples.
//!
//! * `POST /samples` takes one JSON record, validates it against the
//!   configured roster and zones and appends it to the record log. 201 on
//!   success, 422 with a violation list when the record is rejected, 500 when
//!   the log cannot be written.
//! * `GET /samples/count` returns the number of stored records as plain text.
//! * `GET /dataset` exports every stored record as dataset CSV.
//!
//! The record log is newline-delimited JSON, append-only, one accepted record
//! per line. Writes go through a single lock; a failed append is rolled back
//! to the previous file length.

use std::collections::{BTreeMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Seek, SeekFrom, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use crate::csvio::dataset_to_csv_string;
use crate::decimal;
use crate::error::{Error, Result};
use crate::model::{validate_sample, AccessPoint, Dataset, Position, Sample, Zone};

/// Wire form of one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IngestRecord {
    pub sample_id: String,
    pub x: f64,
    pub y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    pub zone: String,
    pub rssi: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranges: Option<BTreeMap<String, f64>>,
}

impl IngestRecord {
    pub fn from_sample(s: &Sample) -> Self {
        Self {
            sample_id: s.id.clone(),
            x: s.truth.x,
            y: s.truth.y,
            z: (s.truth.z != 0.0).then_some(s.truth.z),
            zone: s.zone.clone(),
            rssi: s.rssi.clone(),
            ranges: (!s.ranges.is_empty()).then(|| s.ranges.clone()),
        }
    }

    /// The stored sample; numbers are rounded to nine significant digits so
    /// the CSV export reproduces them exactly. `z` is kept in the log but the
    /// CSV export is horizontal only.
    pub fn to_sample(&self) -> Sample {
        let q = |m: &BTreeMap<String, f64>| m.iter().map(|(k, v)| (k.clone(), decimal::quantize(*v))).collect();
        Sample {
            id: self.sample_id.clone(),
            rssi: q(&self.rssi),
            ranges: self.ranges.as_ref().map(q).unwrap_or_default(),
            truth: Position::new_3d(
                decimal::quantize(self.x),
                decimal::quantize(self.y),
                decimal::quantize(self.z.unwrap_or(0.0)),
            ),
            zone: self.zone.clone(),
        }
    }
}

#[derive(Debug)]
pub enum AppendError {
    /// The record broke one or more rules; nothing was written.
    Rejected(Vec<String>),
    /// The log could not be written; it was restored to its previous length.
    Storage(std::io::Error),
}

/// Append-only record log plus the in-memory samples it holds.
pub struct IngestStore {
    path: PathBuf,
    file: File,
    roster: Vec<AccessPoint>,
    zones: Vec<Zone>,
    samples: Vec<Sample>,
    ids: HashSet<String>,
}

impl IngestStore {
    /// Opens (creating if needed) the log at `path` and replays it. A torn
    /// final line left by a crash is cut off.
    pub fn open(path: impl AsRef<Path>, roster: Vec<AccessPoint>, zones: Vec<Zone>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut file = OpenOptions::new().read(true).append(true).create(true).open(&path)?;
        let mut samples = Vec::new();
        let mut ids = HashSet::new();
        let mut good_len = 0u64;
        {
            let mut reader = BufReader::new(&file);
            let mut line = String::new();
            let mut number = 0u64;
            loop {
                line.clear();
                let n = reader.read_line(&mut line)?;
                if n == 0 {
                    break;
                }
                number += 1;
                if !line.ends_with('\n') {
                    break;
                }
                let record: IngestRecord = serde_json::from_str(line.trim_end())
                    .map_err(|e| Error::parse(number, format!("record log {}: {e}", path.display())))?;
                let sample = record.to_sample();
                ids.insert(sample.id.clone());
                samples.push(sample);
                good_len += n as u64;
            }
        }
        if file.metadata()?.len() != good_len {
            file.set_len(good_len)?;
        }
        file.seek(SeekFrom::End(0))?;
        Ok(Self {
            path,
            file,
            roster,
            zones,
            samples,
            ids,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn dataset(&self) -> Dataset {
        Dataset::new(self.roster.clone(), self.zones.clone(), self.samples.clone())
    }

    pub fn check(&self, record: &IngestRecord) -> std::result::Result<Sample, Vec<String>> {
        let sample = record.to_sample();
        let mut violations: Vec<String> = validate_sample(&sample, &self.roster, &self.zones)
            .violations
            .iter()
            .map(ToString::to_string)
            .collect();
        if self.ids.contains(&sample.id) {
            violations.push(format!("duplicate-sample-id, sample {}", sample.id));
        }
        if violations.is_empty() {
            Ok(sample)
        } else {
            Err(violations)
        }
    }

    pub fn append(&mut self, record: &IngestRecord) -> std::result::Result<usize, AppendError> {
        let sample = self.check(record).map_err(AppendError::Rejected)?;
        let mut line =
            serde_json::to_string(&IngestRecord::from_sample(&sample)).map_err(|e| AppendError::Storage(e.into()))?;
        line.push('\n');
        let before = self.file.metadata().map_err(AppendError::Storage)?.len();
        let written = self
            .file
            .write_all(line.as_bytes())
            .and_then(|_| self.file.flush())
            .and_then(|_| self.file.sync_data());
        if let Err(e) = written {
            let _ = self.file.set_len(before);
            return Err(AppendError::Storage(e));
        }
        self.ids.insert(sample.id.clone());
        self.samples.push(sample);
        Ok(self.samples.len())
    }
}

pub type SharedStore = Arc<RwLock<IngestStore>>;

#[derive(Serialize)]
struct Violations {
    violations: Vec<String>,
}

#[derive(Serialize)]
struct Created {
    count: usize,
}

fn reject(violations: Vec<String>) -> Response {
    (StatusCode::UNPROCESSABLE_ENTITY, Json(Violations { violations })).into_response()
}

async fn post_sample(State(store): State<SharedStore>, body: Bytes) -> Response {
    let record: IngestRecord = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => return reject(vec![format!("malformed-record: {e}")]),
    };
    let mut guard = match store.write() {
        Ok(g) => g,
        Err(_) => return (StatusCode::INTERNAL_SERVER_ERROR, "store lock poisoned").into_response(),
    };
    match guard.append(&record) {
        Ok(count) => (StatusCode::CREATED, Json(Created { count })).into_response(),
        Err(AppendError::Rejected(v)) => reject(v),
        Err(AppendError::Storage(e)) => {
            (StatusCode::INTERNAL_SERVER_ERROR, format!("storage failure: {e}")).into_response()
        }
    }
}

async fn get_count(State(store): State<SharedStore>) -> Response {
    match store.read() {
        Ok(g) => g.len().to_string().into_response(),
        Err(_) => StatusCode::INTERNAL_SERVER_ERROR.into_response(),
    }
}

async fn get_dataset(State(store): State<SharedStore>) -> Response {
    let csv = match store.read() {
        Ok(g) => dataset_to_csv_string(&g.dataset()),
        Err(_) => return StatusCode::INTERNAL_SERVER_ERROR.into_response(),
    };
    (
        [
            (header::CONTENT_TYPE, "text/csv; charset=utf-8"),
            (header::CONTENT_DISPOSITION, "attachment; filename=\"dataset.csv\""),
        ],
        csv,
    )
        .into_response()
}

pub fn router(store: SharedStore) -> Router {
    Router::new()
        .route("/samples", post(post_sample))
        .route("/samples/count", get(get_count))
        .route("/dataset", get(get_dataset))
        .with_state(store)
}

/// Serves on an already-bound listener until `shutdown` resolves.
pub async fn serve_on(
    listener: tokio::net::TcpListener,
    store: SharedStore,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> Result<()> {
    axum::serve(listener, router(store))
        .with_graceful_shutdown(shutdown)
        .await?;
    Ok(())
}

/// Binds `addr`, opens the record log and serves until Ctrl-C.
pub fn serve_ingest(
    addr: SocketAddr,
    roster: Vec<AccessPoint>,
    zones: Vec<Zone>,
    store_path: impl AsRef<Path>,
) -> Result<()> {
    let store = Arc::new(RwLock::new(IngestStore::open(store_path, roster, zones)?));
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        serve_on(listener, store, async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{generate_dataset, reference_scenario};

    fn store(dir: &tempfile::TempDir) -> IngestStore {
        let sc = reference_scenario();
        IngestStore::open(dir.path().join("log.jsonl"), sc.roster, sc.zones).unwrap()
    }

    #[test]
    fn append_and_replay() {
        let dir = tempfile::tempdir().unwrap();
        let ds = generate_dataset(&reference_scenario(), 5, 3).unwrap();
        {
            let mut st = store(&dir);
            for s in &ds.samples {
                st.append(&IngestRecord::from_sample(s)).unwrap();
            }
            assert_eq!(st.len(), 5);
        }
        let st = store(&dir);
        assert_eq!(st.samples(), ds.samples.as_slice());
    }

    #[test]
    fn rejected_record_leaves_log_untouched() {
        let dir = tempfile::tempdir().unwrap();
        let ds = generate_dataset(&reference_scenario(), 2, 3).unwrap();
        let mut st = store(&dir);
        st.append(&IngestRecord::from_sample(&ds.samples[0])).unwrap();
        let before = std::fs::read(st.path()).unwrap();
        let mut bad = IngestRecord::from_sample(&ds.samples[1]);
        bad.rssi.insert("X9".into(), -70.0);
        match st.append(&bad) {
            Err(AppendError::Rejected(v)) => assert!(v[0].starts_with("unknown-ap"), "{v:?}"),
            other => panic!("{other:?}"),
        }
        match st.append(&IngestRecord::from_sample(&ds.samples[0])) {
            Err(AppendError::Rejected(v)) => assert!(v[0].starts_with("duplicate-sample-id")),
            other => panic!("{other:?}"),
        }
        assert_eq!(std::fs::read(st.path()).unwrap(), before);
        assert_eq!(st.len(), 1);
    }

    #[test]
    fn torn_tail_is_dropped_on_open() {
        let dir = tempfile::tempdir().unwrap();
        let ds = generate_dataset(&reference_scenario(), 2, 3).unwrap();
        let path = {
            let mut st = store(&dir);
            st.append(&IngestRecord::from_sample(&ds.samples[0])).unwrap();
            st.path().to_path_buf()
        };
        let good = std::fs::read(&path).unwrap();
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        f.write_all(b"{\"sample_id\":\"s9\",\"x\":").unwrap();
        drop(f);
        let st = store(&dir);
        assert_eq!(st.len(), 1);
        assert_eq!(std::fs::read(&path).unwrap(), good);
    }

    #[test]
    fn wire_format_field_names() {
        let rec: IngestRecord = serde_json::from_str(
            r#"{"sample_id":"a1","x":1.5,"y":2,"zone":"lab1","rssi":{"g1":-60.5},"ranges":{"g1":3.2}}"#,
        )
        .unwrap();
        assert_eq!(rec.z, None);
        let s = rec.to_sample();
        assert_eq!(s.truth, Position::new(1.5, 2.0));
        assert_eq!(s.ranges["g1"], 3.2);
        assert!(serde_json::from_str::<IngestRecord>(r#"{"sample_id":"a1"}"#).is_err());
    }
}
