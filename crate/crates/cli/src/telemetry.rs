//! Hardware timing check: does QPU time track circuit depth?

use std::io::Read;

use serde::{Deserialize, Serialize};

use cutleak_core::circuit::Family;

use crate::error::CliError;

/// Execution telemetry transcribed from a hardware run (one row per circuit).
pub const BUNDLED_FIXTURE: &str = include_str!("../fixtures/hardware_timing.csv");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TelemetryRow {
    pub family: Family,
    pub n: usize,
    pub compiled_depth: usize,
    pub compiled_2q: usize,
    pub active_width: usize,
    pub qpu_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TelemetryReport {
    pub rows: usize,
    pub qpu_min: f64,
    pub qpu_max: f64,
    pub qpu_range: f64,
    pub depth_min: usize,
    pub depth_max: usize,
    pub depth_ratio: f64,
    /// `None` when either column is constant.
    pub pearson_r: Option<f64>,
    /// Runtime spread under one second while depth varies more than tenfold.
    pub timing_blind: bool,
}

pub fn parse_telemetry(input: impl Read, source_name: &str) -> Result<Vec<TelemetryRow>, CliError> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(input);
    let mut rows = Vec::new();
    for (i, rec) in rdr.deserialize::<TelemetryRow>().enumerate() {
        let err = |msg: String, line: Option<u64>| CliError::Parse {
            source_name: source_name.into(),
            line: line.map_or(i + 2, |l| l as usize),
            msg,
        };
        let row = rec.map_err(|e| {
            let line = e.position().map(|p| p.line());
            err(e.to_string(), line)
        })?;
        if !(row.qpu_seconds > 0.0) {
            return Err(err(format!("qpu_seconds {} must be positive", row.qpu_seconds), None));
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

pub fn check_telemetry(rows: &[TelemetryRow]) -> Result<TelemetryReport, CliError> {
    if rows.len() < 2 {
        return Err(CliError::Parse {
            source_name: "telemetry".into(),
            line: rows.len() + 1,
            msg: format!("{} row(s); at least 2 are needed", rows.len()),
        });
    }
    let t: Vec<f64> = rows.iter().map(|r| r.qpu_seconds).collect();
    let d: Vec<f64> = rows.iter().map(|r| r.compiled_depth as f64).collect();
    let qpu_min = t.iter().copied().fold(f64::INFINITY, f64::min);
    let qpu_max = t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let depth_min = rows.iter().map(|r| r.compiled_depth).min().unwrap();
    let depth_max = rows.iter().map(|r| r.compiled_depth).max().unwrap();
    let depth_ratio = if depth_min == 0 { f64::INFINITY } else { depth_max as f64 / depth_min as f64 };
    let qpu_range = qpu_max - qpu_min;
    Ok(TelemetryReport {
        rows: rows.len(),
        qpu_min,
        qpu_max,
        qpu_range,
        depth_min,
        depth_max,
        depth_ratio,
        pearson_r: pearson(&d, &t),
        timing_blind: qpu_range < 1.0 && depth_ratio > 10.0,
    })
}
