//! CSV ingestion of hourly wind records.
//!
//! Directions arrive in compass degrees (clockwise from north) and are kept
//! as compass radians in `[0, 2π)`. Calm rows (zero speed, blank direction)
//! and rows with a blank direction are excluded; unparseable rows are counted
//! as malformed and tolerated up to a configured fraction.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use serde::Serialize;

use crate::config::Columns;
use crate::error::{CliError, Result};

/// Malformed rows listed individually in the report.
const REPORTED_MALFORMED: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindRecord {
    #[serde(serialize_with = "serialize_timestamp")]
    pub timestamp: NaiveDateTime,
    /// Compass radians, `[0, 2π)`.
    pub direction: f64,
    pub speed: f64,
    /// Remaining columns, verbatim.
    pub extra: BTreeMap<String, String>,
}

fn serialize_timestamp<S: serde::Serializer>(t: &NaiveDateTime, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&t.format("%Y-%m-%dT%H:%M:%S").to_string())
}

impl WindRecord {
    pub fn month(&self) -> String {
        self.timestamp.format("%Y-%m").to_string()
    }

    pub fn direction_deg(&self) -> f64 {
        self.direction.to_degrees()
    }

    /// Numeric value of a column: the speed column or an extra one.
    pub fn numeric(&self, column: &str, columns: &Columns) -> Option<f64> {
        if column == columns.speed {
            return Some(self.speed);
        }
        self.extra.get(column)?.trim().parse().ok().filter(|v: &f64| v.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MalformedRow {
    /// 1-based line number in the file, header included.
    pub line: u64,
    pub reason: String,
}

/// Row accounting: `calm + undefined + retained + malformed = total`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestReport {
    pub total: usize,
    pub retained: usize,
    pub calm: usize,
    pub undefined_direction: usize,
    pub malformed: usize,
    pub malformed_rows: Vec<MalformedRow>,
}

impl IngestReport {
    pub fn excluded(&self) -> usize {
        self.calm + self.undefined_direction
    }
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub records: Vec<WindRecord>,
    pub report: IngestReport,
}

pub fn ingest_path(path: &Path, columns: &Columns, malformed_threshold: f64) -> Result<Ingested> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    ingest_reader(file, columns, malformed_threshold)
        .map_err(|e| match e {
            CliError::Input(m) => CliError::Input(format!("{}: {m}", path.display())),
            other => other,
        })
}

pub fn ingest_reader<R: Read>(reader: R, columns: &Columns, malformed_threshold: f64) -> Result<Ingested> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| CliError::Input(format!("reading header: {e}")))?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Input(format!("missing required column {name:?}")))
    };
    let (it, id, is) = (find(&columns.timestamp)?, find(&columns.direction)?, find(&columns.speed)?);

    let mut records = Vec::new();
    let mut report = IngestReport {
        total: 0,
        retained: 0,
        calm: 0,
        undefined_direction: 0,
        malformed: 0,
        malformed_rows: Vec::new(),
    };
    for (row, result) in rdr.records().enumerate() {
        report.total += 1;
        let line = row as u64 + 2;
        let outcome = result
            .map_err(|e| e.to_string())
            .and_then(|rec| parse_row(&rec, &headers, (it, id, is)));
        match outcome {
            Ok(Row::Record(r)) => {
                report.retained += 1;
                records.push(r);
            }
            Ok(Row::Calm) => report.calm += 1,
            Ok(Row::Undefined) => report.undefined_direction += 1,
            Err(reason) => {
                report.malformed += 1;
                if report.malformed_rows.len() < REPORTED_MALFORMED {
                    report.malformed_rows.push(MalformedRow { line, reason });
                }
            }
        }
    }
    if report.total == 0 {
        return Err(CliError::Input("no data rows".into()));
    }
    let fraction = report.malformed as f64 / report.total as f64;
    if fraction > malformed_threshold {
        let first = report.malformed_rows.first().map_or(String::new(), |m| {
            format!("; first at line {}: {}", m.line, m.reason)
        });
        return Err(CliError::Input(format!(
            "{} of {} rows malformed ({:.2}% > {:.2}% threshold){first}",
            report.malformed,
            report.total,
            100.0 * fraction,
            100.0 * malformed_threshold
        )));
    }
    Ok(Ingested { records, report })
}

enum Row {
    Record(WindRecord),
    Calm,
    Undefined,
}

fn parse_row(
    rec: &csv::StringRecord,
    headers: &csv::StringRecord,
    (it, id, is): (usize, usize, usize),
) -> std::result::Result<Row, String> {
    if rec.len() != headers.len() {
        return Err(format!("expected {} fields, found {}", headers.len(), rec.len()));
    }
    let timestamp = parse_timestamp(&rec[it]).ok_or_else(|| format!("bad timestamp {:?}", &rec[it]))?;
    let speed: f64 = rec[is].parse().map_err(|_| format!("bad speed {:?}", &rec[is]))?;
    if !(speed.is_finite() && speed >= 0.0) {
        return Err(format!("speed {speed} must be non-negative"));
    }
    let dir = &rec[id];
    if dir.is_empty() {
        return Ok(if speed == 0.0 { Row::Calm } else { Row::Undefined });
    }
    let deg: f64 = dir.parse().map_err(|_| format!("bad direction {dir:?}"))?;
    if !(0.0..=360.0).contains(&deg) {
        return Err(format!("direction {deg} outside [0, 360]"));
    }
    let direction = if deg == 360.0 { 0.0 } else { deg.to_radians() };
    let extra = headers
        .iter()
        .zip(rec.iter())
        .enumerate()
        .filter(|(i, _)| ![it, id, is].contains(i))
        .map(|(_, (h, v))| (h.to_string(), v.to_string()))
        .collect();
    Ok(Row::Record(WindRecord { timestamp, direction, speed, extra }))
}

/// ISO-8601 date-times with or without seconds, offset or `T` separator.
pub fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.naive_local());
    }
    const FORMATS: [&str; 4] = ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"];
    FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
        .or_else(|| NaiveDate::parse_from_str(s, "%Y-%m-%d").ok()?.and_hms_opt(0, 0, 0))
}

/// Retained records grouped by `YYYY-MM`, months in ascending order.
pub fn group_by_month(records: &[WindRecord]) -> BTreeMap<String, Vec<&WindRecord>> {
    let mut out: BTreeMap<String, Vec<&WindRecord>> = BTreeMap::new();
    for r in records {
        out.entry(r.month()).or_default().push(r);
    }
    out
}
