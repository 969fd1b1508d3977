//! Train/test protocols. Indices refer to positions in the record slice.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use cutleak_core::seed::{rng_for, str_tag};
use cutleak_core::transcript::TranscriptRecord;

use crate::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    InstanceDisjoint,
    SizeHoldout,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::InstanceDisjoint => "instance_disjoint",
            Protocol::SizeHoldout => "size_holdout",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub protocol: Protocol,
    pub test_fraction: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Whole jobs go to one side. The test side gets `round(fraction * jobs)`
/// jobs, at least one and leaving at least one for training.
pub fn split_instance_disjoint(records: &[TranscriptRecord], test_fraction: f64, seed: u64) -> Result<Split, EvalError> {
    let jobs: BTreeSet<u64> = records.iter().map(|r| r.job_id).collect();
    if jobs.len() < 2 {
        return Err(EvalError::Split(format!("{} job(s); need at least 2", jobs.len())));
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(EvalError::Split(format!("test_fraction {test_fraction} outside (0, 1)")));
    }
    let mut jobs: Vec<u64> = jobs.into_iter().collect();
    jobs.shuffle(&mut rng_for(seed, &[str_tag("split")]));
    let n_test = ((jobs.len() as f64 * test_fraction).round() as usize).clamp(1, jobs.len() - 1);
    let test_jobs: BTreeSet<u64> = jobs[..n_test].iter().copied().collect();
    let (test, train): (Vec<usize>, Vec<usize>) = (0..records.len()).partition(|&i| test_jobs.contains(&records[i].job_id));
    Ok(Split { train, test })
}

/// Test set is every record whose width reaches the 75th percentile.
pub fn split_size_holdout(records: &[TranscriptRecord]) -> Result<Split, EvalError> {
    let distinct: BTreeSet<usize> = records.iter().map(|r| r.w).collect();
    if distinct.len() < 4 {
        return Err(EvalError::Split(format!("{} distinct widths; need at least 4", distinct.len())));
    }
    let cut = width_quartile(records);
    let (test, train): (Vec<usize>, Vec<usize>) = (0..records.len()).partition(|&i| records[i].w as f64 >= cut);
    Ok(Split { train, test })
}

/// 75th percentile of record widths with linear interpolation between order
/// statistics.
pub fn width_quartile(records: &[TranscriptRecord]) -> f64 {
    let mut w: Vec<f64> = records.iter().map(|r| r.w as f64).collect();
    w.sort_by(f64::total_cmp);
    let pos = 0.75 * (w.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    w[lo] + (w[hi] - w[lo]) * (pos - lo as f64)
}

pub fn make_split(records: &[TranscriptRecord], spec: &SplitSpec) -> Result<Split, EvalError> {
    match spec.protocol {
        Protocol::InstanceDisjoint => split_instance_disjoint(records, spec.test_fraction, spec.seed),
        Protocol::SizeHoldout => split_size_holdout(records),
    }
}
