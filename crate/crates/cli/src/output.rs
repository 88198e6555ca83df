//! On-disk formats: trace CSV, report JSON, sweep CSV.
//!
//! Floats are written with 17 significant digits so that every file reads
//! back bit for bit.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;
pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_f64(s: &str, what: &str) -> Result<f64, CliError> {
    s.parse()
        .map_err(|_| CliError::Io(format!("bad number '{s}' in {what}")))
}

/// Writes through a temporary sibling file and a rename, so readers never
/// see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("")
    ));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Columns of `trace_<tag>.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceTable {
    pub t: Vec<f64>,
    pub gamma: Vec<f64>,
    pub big_gamma: Vec<f64>,
    pub sqrt_l: Vec<f64>,
    /// Density offset next to the impurity (exact method only).
    pub dn1: Option<Vec<f64>>,
}

impl TraceTable {
    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let map_err = |e: csv::Error| CliError::Io(e.to_string());
        let mut header = vec!["t", "gamma", "Gamma", "sqrtL"];
        if self.dn1.is_some() {
            header.push("dn1");
        }
        w.write_record(&header).map_err(map_err)?;
        for i in 0..self.t.len() {
            let mut row = vec![
                fmt_f64(self.t[i]),
                fmt_f64(self.gamma[i]),
                fmt_f64(self.big_gamma[i]),
                fmt_f64(self.sqrt_l[i]),
            ];
            if let Some(dn) = &self.dn1 {
                row.push(fmt_f64(dn[i]));
            }
            w.write_record(&row).map_err(map_err)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn from_csv(bytes: &[u8]) -> Result<Self, CliError> {
        let mut r = csv::Reader::from_reader(bytes);
        let header = r
            .headers()
            .map_err(|e| CliError::Io(e.to_string()))?
            .clone();
        let has_dn = match header.iter().collect::<Vec<_>>().as_slice() {
            ["t", "gamma", "Gamma", "sqrtL"] => false,
            ["t", "gamma", "Gamma", "sqrtL", "dn1"] => true,
            other => return Err(CliError::Io(format!("unexpected trace header {other:?}"))),
        };
        let mut table = TraceTable {
            t: Vec::new(),
            gamma: Vec::new(),
            big_gamma: Vec::new(),
            sqrt_l: Vec::new(),
            dn1: has_dn.then(Vec::new),
        };
        for rec in r.records() {
            let rec = rec.map_err(|e| CliError::Io(e.to_string()))?;
            table.t.push(parse_f64(&rec[0], "trace")?);
            table.gamma.push(parse_f64(&rec[1], "trace")?);
            table.big_gamma.push(parse_f64(&rec[2], "trace")?);
            table.sqrt_l.push(parse_f64(&rec[3], "trace")?);
            if let Some(dn) = &mut table.dn1 {
                dn.push(parse_f64(&rec[4], "trace")?);
            }
        }
        Ok(table)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalRecord {
    pub start: f64,
    pub end: f64,
    pub gain: f64,
}

/// Contents of `report_<tag>.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub code_version: String,
    pub tag: String,
    pub method: String,
    pub provenance: String,
    /// BLP measure over `[0, horizon]`.
    #[serde(rename = "N")]
    pub measure: f64,
    pub horizon: f64,
    pub tolerance: f64,
    pub intervals: Vec<IntervalRecord>,
    /// Some `exp(Gamma)` exceeded one; the CSV column is clipped.
    pub echo_exceeds_one: bool,
    /// Characteristic times predicted by the models.
    pub predictions: BTreeMap<String, f64>,
    /// Time-averaged density offset next to the impurity (exact method).
    pub density_offset: Option<f64>,
    pub config: BTreeMap<String, String>,
}

impl Report {
    pub fn to_json(&self) -> Result<Vec<u8>, CliError> {
        let mut bytes = serde_json::to_vec_pretty(self)?;
        bytes.push(b'\n');
        Ok(bytes)
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, CliError> {
        Ok(serde_json::from_slice(bytes)?)
    }
}

/// Outcome of one sweep point, persisted under `points/<hash>.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub ratio: f64,
    pub hash: String,
    pub tag: String,
    pub status: PointStatus,
    #[serde(rename = "N")]
    pub measure: Option<f64>,
    pub horizon: Option<f64>,
    pub density_offset: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointStatus {
    Ok,
    Error,
}

/// One row of `sweep.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub ratio: f64,
    pub measure: Option<f64>,
    pub normalized: Option<f64>,
    pub density_offset: Option<f64>,
    pub horizon: Option<f64>,
    pub status: PointStatus,
    pub hash: String,
    pub error: String,
}

const SWEEP_HEADER: [&str; 8] = [
    "U_over_J", "N", "N_bar", "dn1", "T", "status", "hash", "error",
];

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn parse_opt(s: &str) -> Result<Option<f64>, CliError> {
    if s.is_empty() {
        Ok(None)
    } else {
        parse_f64(s, "sweep").map(Some)
    }
}

pub fn sweep_to_csv(rows: &[SweepRow]) -> Result<Vec<u8>, CliError> {
    let map_err = |e: csv::Error| CliError::Io(e.to_string());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_HEADER).map_err(map_err)?;
    for r in rows {
        let status = match r.status {
            PointStatus::Ok => "ok",
            PointStatus::Error => "error",
        };
        w.write_record([
            fmt_f64(r.ratio),
            opt(r.measure),
            opt(r.normalized),
            opt(r.density_offset),
            opt(r.horizon),
            status.to_string(),
            r.hash.clone(),
            r.error.clone(),
        ])
        .map_err(map_err)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

pub fn sweep_from_csv(bytes: &[u8]) -> Result<Vec<SweepRow>, CliError> {
    let mut r = csv::Reader::from_reader(bytes);
    let header = r
        .headers()
        .map_err(|e| CliError::Io(e.to_string()))?
        .clone();
    if header.iter().ne(SWEEP_HEADER) {
        return Err(CliError::Io(format!("unexpected sweep header {header:?}")));
    }
    r.records()
        .map(|rec| {
            let rec = rec.map_err(|e| CliError::Io(e.to_string()))?;
            Ok(SweepRow {
                ratio: parse_f64(&rec[0], "sweep")?,
                measure: parse_opt(&rec[1])?,
                normalized: parse_opt(&rec[2])?,
                density_offset: parse_opt(&rec[3])?,
                horizon: parse_opt(&rec[4])?,
                status: match &rec[5] {
                    "ok" => PointStatus::Ok,
                    "error" => PointStatus::Error,
                    s => return Err(CliError::Io(format!("bad status '{s}'"))),
                },
                hash: rec[6].to_string(),
                error: rec[7].to_string(),
            })
        })
        .collect()
}
