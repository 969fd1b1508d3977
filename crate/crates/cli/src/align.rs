//! Width and depth alignment between a corpus and a reference sample.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use cutleak_core::circuit::Family;
use cutleak_core::transcript::{read_corpus, TranscriptRecord};
use cutleak_eval::stats::{ks_statistic, mean, wasserstein_1d};

use crate::error::CliError;

/// One reference observation. Reference CSVs use these column names.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRow {
    pub family: Family,
    pub width: f64,
    pub depth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignRow {
    pub metric: String,
    pub w1: Option<f64>,
    pub ks: Option<f64>,
    pub corpus_mean: Option<f64>,
    pub reference_mean: Option<f64>,
    /// Family absent from one side.
    pub skipped: bool,
}

pub fn records_as_reference(records: &[TranscriptRecord]) -> Vec<ReferenceRow> {
    records
        .iter()
        .map(|r| ReferenceRow {
            family: r.labels.a1_family,
            width: r.w as f64,
            depth: r.d as f64,
        })
        .collect()
}

/// Reads either a corpus file or a `family,width,depth` CSV.
pub fn load_reference(path: &Path) -> Result<Vec<ReferenceRow>, CliError> {
    let text = std::fs::read_to_string(path)?;
    let first = text.lines().find(|l| !l.starts_with('#') && !l.trim().is_empty()).unwrap_or("");
    if first.trim_start().starts_with('{') {
        return Ok(records_as_reference(&read_corpus(text.as_bytes())?.records));
    }
    parse_reference_csv(text.as_bytes(), &path.display().to_string())
}

pub fn parse_reference_csv(input: impl Read, source_name: &str) -> Result<Vec<ReferenceRow>, CliError> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(input);
    rdr.deserialize::<ReferenceRow>()
        .enumerate()
        .map(|(i, r)| {
            r.map_err(|e| CliError::Parse {
                source_name: source_name.into(),
                line: e.position().map_or(i + 2, |p| p.line() as usize),
                msg: e.to_string(),
            })
        })
        .collect()
}

/// The four rows: width and depth overall, width for QAOA and QFT.
pub fn alignment(corpus: &[ReferenceRow], reference: &[ReferenceRow]) -> Result<Vec<AlignRow>, CliError> {
    let pick = |rows: &[ReferenceRow], fam: Option<Family>, depth: bool| -> Vec<f64> {
        rows.iter()
            .filter(|r| fam.is_none_or(|f| r.family == f))
            .map(|r| if depth { r.depth } else { r.width })
            .collect()
    };
    let specs = [
        ("width_all", None, false),
        ("depth_all", None, true),
        ("width_qaoa", Some(Family::Qaoa), false),
        ("width_qft", Some(Family::Qft), false),
    ];
    specs
        .iter()
        .map(|&(metric, fam, depth)| {
            let a = pick(corpus, fam, depth);
            let b = pick(reference, fam, depth);
            if a.is_empty() || b.is_empty() {
                return Ok(AlignRow {
                    metric: metric.into(),
                    w1: None,
                    ks: None,
                    corpus_mean: (!a.is_empty()).then(|| mean(&a)),
                    reference_mean: (!b.is_empty()).then(|| mean(&b)),
                    skipped: true,
                });
            }
            Ok(AlignRow {
                metric: metric.into(),
                w1: Some(wasserstein_1d(&a, &b)?),
                ks: Some(ks_statistic(&a, &b)?),
                corpus_mean: Some(mean(&a)),
                reference_mean: Some(mean(&b)),
                skipped: false,
            })
        })
        .collect()
}
