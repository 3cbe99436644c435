//! Dataset CSV.
//!
//! Header: `sample_id,x_m,y_m,zone,rssi_<ap_id>...,range_<ap_id>...` with
//! access points in roster order. An empty cell is an absent measurement.
//! UTF-8, LF line endings, `.` as decimal separator, numbers written with at
//! most nine significant digits.
//!
//! The file carries only samples; the roster and zones come from the
//! scenario the dataset belongs to.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::decimal;
use crate::error::{Error, Result};
use crate::model::{AccessPoint, Dataset, Position, Sample, Zone};

const FIXED_COLUMNS: [&str; 4] = ["sample_id", "x_m", "y_m", "zone"];

pub fn header(roster: &[AccessPoint]) -> Vec<String> {
    let mut h: Vec<String> = FIXED_COLUMNS.iter().map(|s| s.to_string()).collect();
    h.extend(roster.iter().map(|ap| format!("rssi_{}", ap.id)));
    h.extend(roster.iter().map(|ap| format!("range_{}", ap.id)));
    h
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
            Error::parse(line, format!("expected {expected_len} fields, found {len}"))
        }
        other => Error::parse(line, format!("{other:?}")),
    }
}

fn cell(v: Option<&f64>) -> String {
    v.map(|&v| decimal::format(v)).unwrap_or_default()
}

/// Writes the samples of `dataset` to `out`.
pub fn write_dataset_csv(dataset: &Dataset, out: impl Write) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(header(&dataset.roster)).map_err(csv_error)?;
    for s in &dataset.samples {
        let mut rec = vec![
            s.id.clone(),
            decimal::format(s.truth.x),
            decimal::format(s.truth.y),
            s.zone.clone(),
        ];
        rec.extend(dataset.roster.iter().map(|ap| cell(s.rssi.get(&ap.id))));
        rec.extend(dataset.roster.iter().map(|ap| cell(s.ranges.get(&ap.id))));
        w.write_record(&rec).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_dataset_csv(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut f = std::io::BufWriter::new(File::create(path)?);
    write_dataset_csv(dataset, &mut f)?;
    f.flush()?;
    Ok(())
}

pub fn dataset_to_csv_string(dataset: &Dataset) -> String {
    let mut buf = Vec::new();
    write_dataset_csv(dataset, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("CSV output is UTF-8")
}

enum Column {
    Rssi(String),
    Range(String),
}

/// Parses samples from `input`, binding them to `roster` and `zones`.
///
/// AP columns may be any subset of the roster, but every RSSI column must
/// come before every range column. The result is not validated; run
/// [`crate::model::validate_dataset`] on it.
pub fn read_dataset_csv(input: impl Read, roster: &[AccessPoint], zones: &[Zone]) -> Result<Dataset> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(input);
    let mut records = r.records();
    let head = match records.next() {
        None => return Err(Error::parse(1, "missing header")),
        Some(rec) => rec.map_err(csv_error)?,
    };
    if head.len() < FIXED_COLUMNS.len() || head.iter().zip(FIXED_COLUMNS).any(|(a, b)| a != b) {
        return Err(Error::parse(
            1,
            format!("malformed header: must start with {}", FIXED_COLUMNS.join(",")),
        ));
    }
    let known: HashSet<&str> = roster.iter().map(|ap| ap.id.as_str()).collect();
    let mut seen = HashSet::new();
    let mut in_ranges = false;
    let mut columns = Vec::new();
    for name in head.iter().skip(FIXED_COLUMNS.len()) {
        let col = if let Some(id) = name.strip_prefix("rssi_") {
            if in_ranges {
                return Err(Error::parse(1, format!("malformed header: {name} after range columns")));
            }
            Column::Rssi(id.to_string())
        } else if let Some(id) = name.strip_prefix("range_") {
            in_ranges = true;
            Column::Range(id.to_string())
        } else {
            return Err(Error::parse(1, format!("malformed header: unexpected column {name:?}")));
        };
        let id = match &col {
            Column::Rssi(id) | Column::Range(id) => id,
        };
        if !known.contains(id.as_str()) {
            return Err(Error::parse(1, format!("unknown ap column {name:?}")));
        }
        if !seen.insert(name.to_string()) {
            return Err(Error::parse(1, format!("malformed header: duplicate column {name:?}")));
        }
        columns.push(col);
    }

    let mut samples = Vec::new();
    for rec in records {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let num = |col: &str, s: &str| -> Result<f64> {
            match s.trim().parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::parse(line, format!("column {col}: bad number {s:?}"))),
            }
        };
        let x = num("x_m", &rec[1])?;
        let y = num("y_m", &rec[2])?;
        let mut rssi = BTreeMap::new();
        let mut ranges = BTreeMap::new();
        for (col, value) in columns.iter().zip(rec.iter().skip(FIXED_COLUMNS.len())) {
            if value.trim().is_empty() {
                continue;
            }
            match col {
                Column::Rssi(id) => rssi.insert(id.clone(), num(&format!("rssi_{id}"), value)?),
                Column::Range(id) => ranges.insert(id.clone(), num(&format!("range_{id}"), value)?),
            };
        }
        samples.push(Sample {
            id: rec[0].to_string(),
            rssi,
            ranges,
            truth: Position::new(x, y),
            zone: rec[3].to_string(),
        });
    }
    Ok(Dataset::new(roster.to_vec(), zones.to_vec(), samples))
}

pub fn load_dataset_csv(path: impl AsRef<Path>, roster: &[AccessPoint], zones: &[Zone]) -> Result<Dataset> {
    read_dataset_csv(File::open(path)?, roster, zones)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{generate_dataset, reference_scenario};

    #[test]
    fn header_layout() {
        let sc = reference_scenario();
        let ds = generate_dataset(&sc, 2, 1).unwrap();
        let text = dataset_to_csv_string(&ds);
        let first = text.lines().next().unwrap();
        assert_eq!(
            first,
            "sample_id,x_m,y_m,zone,rssi_g1,rssi_g2,rssi_g3,rssi_w1,rssi_w2,rssi_w3,\
             range_g1,range_g2,range_g3,range_w1,range_w2,range_w3"
        );
        assert!(!text.contains('\r'));
    }

    #[test]
    fn round_trip_reference_dataset() {
        let sc = reference_scenario();
        let ds = generate_dataset(&sc, 250, 7).unwrap();
        let text = dataset_to_csv_string(&ds);
        let back = read_dataset_csv(text.as_bytes(), &sc.roster, &sc.zones).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn bad_cell_names_its_line() {
        let sc = reference_scenario();
        let mut text = String::from("sample_id,x_m,y_m,zone,rssi_g1\n");
        for i in 0..5 {
            text.push_str(&format!("s{i},1,1,lab1,-50\n"));
        }
        text.push_str("s5,1,1,lab1,abc\n");
        match read_dataset_csv(text.as_bytes(), &sc.roster, &sc.zones) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 7);
                assert!(message.contains("rssi_g1"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_cell_is_absent() {
        let sc = reference_scenario();
        let text = "sample_id,x_m,y_m,zone,rssi_g1,rssi_w1,range_g1\ns1,1,1,lab1,,-61.5,\n";
        let ds = read_dataset_csv(text.as_bytes(), &sc.roster, &sc.zones).unwrap();
        let s = &ds.samples[0];
        assert!(!s.rssi.contains_key("g1"));
        assert_eq!(s.rssi["w1"], -61.5);
        assert!(s.ranges.is_empty());
    }

    #[test]
    fn header_errors() {
        let sc = reference_scenario();
        for text in [
            "id,x_m,y_m,zone\n",
            "sample_id,x_m,y_m,zone,rssi_X9\n",
            "sample_id,x_m,y_m,zone,range_g1,rssi_g1\n",
            "sample_id,x_m,y_m,zone,bogus\n",
            "",
        ] {
            match read_dataset_csv(text.as_bytes(), &sc.roster, &sc.zones) {
                Err(Error::Parse { line: 1, .. }) => {}
                other => panic!("{text:?}: {other:?}"),
            }
        }
        let err = read_dataset_csv("sample_id,x_m,y_m,zone,rssi_X9\n".as_bytes(), &sc.roster, &sc.zones).unwrap_err();
        assert!(err.to_string().contains("unknown ap column"));
    }

    #[test]
    fn ragged_row_is_a_parse_error() {
        let sc = reference_scenario();
        let text = "sample_id,x_m,y_m,zone,rssi_g1\ns1,1,1,lab1\n";
        assert!(matches!(
            read_dataset_csv(text.as_bytes(), &sc.roster, &sc.zones),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
