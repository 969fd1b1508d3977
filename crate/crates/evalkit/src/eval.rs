//! Train-and-score cells, the grids built from them, sweeps and the
//! per-family sub-variant task.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use cutleak_core::circuit::Family;
use cutleak_core::seed::{derive_seed, rng_for, str_tag};
use cutleak_core::transcript::{feature_matrix, Mask, TranscriptRecord};
use cutleak_learners::{argmax, train, Hyperparams, Importance, LearnError, ModelKind};

use crate::matched::match_footprint;
use crate::metrics::{accuracy, bootstrap_ci, confusion, macro_auc, macro_f1, Interval, Metric};
use crate::split::{make_split, Protocol, Split, SplitSpec};
use crate::tasks::Task;
use crate::EvalError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSettings {
    pub hyperparams: Hyperparams,
    pub bootstrap: usize,
    pub seed: u64,
}

impl Default for EvalSettings {
    fn default() -> Self {
        EvalSettings {
            hyperparams: Hyperparams::default(),
            bootstrap: 1000,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub task: Task,
    pub model_kind: ModelKind,
    pub mask: Mask,
    pub protocol: Protocol,
    pub n_train: usize,
    pub n_test: usize,
    pub acc: f64,
    pub macro_f1: f64,
    /// `None` when a task class is missing from the test set.
    pub macro_auc: Option<f64>,
    pub acc_ci: Option<Interval>,
    pub f1_ci: Option<Interval>,
    pub auc_ci: Option<Interval>,
    pub confusion: Vec<Vec<usize>>,
}

impl EvalReport {
    pub fn auc_undefined(&self) -> bool {
        self.macro_auc.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub task: Task,
    pub mask: Mask,
    pub model: ModelKind,
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub cell: Cell,
    pub report: EvalReport,
    pub importance: Option<Importance>,
    /// Class probabilities aligned with `split.test`.
    pub test_proba: Vec<Vec<f64>>,
}

pub fn labels_for(records: &[TranscriptRecord], task: Task) -> Vec<usize> {
    records.iter().map(|r| task.label(&r.labels)).collect()
}

fn cell_seed(seed: u64, cell: &Cell, protocol: Protocol, what: &str) -> u64 {
    derive_seed(
        seed,
        &[str_tag(what), str_tag(cell.task.name()), str_tag(cell.mask.name()), str_tag(cell.model.name()), str_tag(protocol.name())],
    )
}

/// Scores already-computed probabilities on a subset of the test set.
pub fn score(
    task: Task,
    y: &[usize],
    proba: &[Vec<f64>],
    bootstrap: usize,
    seed: u64,
) -> (f64, f64, Option<f64>, [Option<Interval>; 3], Vec<Vec<usize>>) {
    let k = task.n_classes();
    let pred: Vec<usize> = proba.iter().map(|r| argmax(r)).collect();
    let cis = [Metric::Accuracy, Metric::MacroF1, Metric::MacroAuc]
        .map(|m| bootstrap_ci(m, y, proba, k, bootstrap, derive_seed(seed, &[str_tag(&format!("{m:?}"))])));
    (accuracy(y, &pred), macro_f1(y, &pred, k), macro_auc(y, proba, k), cis, confusion(y, &pred, k))
}

/// Trains on `split.train` and evaluates on `split.test`.
pub fn run_cell(
    x: &[Vec<f64>],
    y: &[usize],
    split: &Split,
    cell: Cell,
    protocol: Protocol,
    settings: &EvalSettings,
) -> Result<CellResult, EvalError> {
    let k = cell.task.n_classes();
    let tx: Vec<Vec<f64>> = split.train.iter().map(|&i| x[i].clone()).collect();
    let ty: Vec<usize> = split.train.iter().map(|&i| y[i]).collect();
    let model = train(cell.model, &tx, &ty, k, cell_seed(settings.seed, &cell, protocol, "train"), &settings.hyperparams)?;
    let ex: Vec<Vec<f64>> = split.test.iter().map(|&i| x[i].clone()).collect();
    let ey: Vec<usize> = split.test.iter().map(|&i| y[i]).collect();
    let proba = model.predict_proba(&ex)?;
    let (acc, f1, auc, [acc_ci, f1_ci, auc_ci], conf) =
        score(cell.task, &ey, &proba, settings.bootstrap, cell_seed(settings.seed, &cell, protocol, "boot"));
    Ok(CellResult {
        cell,
        report: EvalReport {
            task: cell.task,
            model_kind: cell.model,
            mask: cell.mask,
            protocol,
            n_train: split.train.len(),
            n_test: split.test.len(),
            acc,
            macro_f1: f1,
            macro_auc: auc,
            acc_ci,
            f1_ci,
            auc_ci,
            confusion: conf,
        },
        importance: model.gini_importance().ok(),
        test_proba: proba,
    })
}

/// Runs every cell on one shared split. Results keep `cells` order.
pub fn run_grid(
    records: &[TranscriptRecord],
    cells: &[Cell],
    spec: &SplitSpec,
    settings: &EvalSettings,
) -> Result<(Split, Vec<CellResult>), EvalError> {
    let split = make_split(records, spec)?;
    let masks: BTreeSet<Mask> = cells.iter().map(|c| c.mask).collect();
    let features: Vec<(Mask, Vec<Vec<f64>>)> = masks.into_iter().map(|m| (m, feature_matrix(records, m))).collect();
    let results = cells
        .par_iter()
        .map(|cell| {
            let x = &features.iter().find(|(m, _)| *m == cell.mask).unwrap().1;
            let y = labels_for(records, cell.task);
            run_cell(x, &y, &split, *cell, spec.protocol, settings)
                .map_err(|e| EvalError::Context(format!("{} {} {}", cell.task, cell.mask.name(), cell.model), Box::new(e)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((split, results))
}

/// Every (task, mask) pair for one model on one split.
pub fn ablation_grid(
    records: &[TranscriptRecord],
    tasks: &[Task],
    masks: &[Mask],
    model: ModelKind,
    spec: &SplitSpec,
    settings: &EvalSettings,
) -> Result<Vec<EvalReport>, EvalError> {
    let cells: Vec<Cell> = tasks
        .iter()
        .flat_map(|&task| masks.iter().map(move |&mask| Cell { task, mask, model }))
        .collect();
    Ok(run_grid(records, &cells, spec, settings)?.1.into_iter().map(|r| r.report).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedReport {
    pub task: Task,
    pub natural_auc: Option<f64>,
    pub matched_auc: Option<f64>,
    pub retained: usize,
    pub n_test: usize,
    /// Nothing survived the caliper.
    pub infeasible: bool,
}

/// Re-scores a finished cell on the footprint-matched part of its test set.
pub fn matched_control(records: &[TranscriptRecord], split: &Split, result: &CellResult, caliper: f64) -> MatchedReport {
    let task = result.cell.task;
    let labels = labels_for(records, task);
    let kept = match_footprint(records, &split.test, &labels, caliper);
    let keep: BTreeSet<usize> = kept.iter().copied().collect();
    let (y, p): (Vec<usize>, Vec<Vec<f64>>) = split
        .test
        .iter()
        .zip(&result.test_proba)
        .filter(|(i, _)| keep.contains(i))
        .map(|(&i, p)| (labels[i], p.clone()))
        .unzip();
    MatchedReport {
        task,
        natural_auc: result.report.macro_auc,
        matched_auc: if y.is_empty() { None } else { macro_auc(&y, &p, task.n_classes()) },
        retained: kept.len(),
        n_test: split.test.len(),
        infeasible: kept.is_empty(),
    }
}

fn jobs_of(records: &[TranscriptRecord]) -> Vec<u64> {
    let set: BTreeSet<u64> = records.iter().map(|r| r.job_id).collect();
    set.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub task: Task,
    pub size: usize,
    pub jobs: usize,
    pub mean_auc: Option<f64>,
    pub sd_auc: Option<f64>,
    /// Repetitions with a defined AUC.
    pub valid: usize,
    /// Size below one job.
    pub skipped: bool,
}

/// Macro-AUC against training-pool size. Each repetition keeps a random
/// subset of whole jobs, then runs the instance-disjoint protocol on it.
/// Repetition 0 at full size uses `spec` unchanged.
pub fn sample_efficiency_sweep(
    records: &[TranscriptRecord],
    task: Task,
    mask: Mask,
    model: ModelKind,
    sizes: &[usize],
    reps: usize,
    spec: &SplitSpec,
    settings: &EvalSettings,
) -> Result<Vec<SweepPoint>, EvalError> {
    if sizes.windows(2).any(|w| w[0] > w[1]) || sizes.iter().any(|&s| s > records.len()) {
        return Err(EvalError::Input("sweep sizes must ascend and not exceed the corpus".into()));
    }
    let jobs = jobs_of(records);
    let per_job = records.len() as f64 / jobs.len() as f64;
    let cell = Cell { task, mask, model };
    sizes
        .iter()
        .map(|&size| {
            let n_jobs = (size as f64 / per_job).floor() as usize;
            if n_jobs < 1 {
                return Ok(SweepPoint { task, size, jobs: 0, mean_auc: None, sd_auc: None, valid: 0, skipped: true });
            }
            let aucs = (0..reps)
                .into_par_iter()
                .map(|rep| {
                    let mut pick = jobs.clone();
                    let rep_seed = if rep == 0 { spec.seed } else { derive_seed(spec.seed, &[str_tag("rep"), rep as u64]) };
                    if n_jobs < jobs.len() {
                        pick.shuffle(&mut rng_for(rep_seed, &[str_tag("subsample"), size as u64]));
                        pick.truncate(n_jobs);
                    }
                    let keep: BTreeSet<u64> = pick.into_iter().collect();
                    let sub: Vec<TranscriptRecord> = records.iter().filter(|r| keep.contains(&r.job_id)).cloned().collect();
                    let split = match crate::split::split_instance_disjoint(&sub, spec.test_fraction, rep_seed) {
                        Ok(s) => s,
                        Err(_) => return Ok(None),
                    };
                    let x = feature_matrix(&sub, mask);
                    let y = labels_for(&sub, task);
                    let fit = EvalSettings { bootstrap: 0, ..settings.clone() };
                    match run_cell(&x, &y, &split, cell, Protocol::InstanceDisjoint, &fit) {
                        Ok(r) => Ok(r.report.macro_auc),
                        Err(EvalError::Learn(LearnError::Degenerate)) => Ok(None),
                        Err(e) => Err(e),
                    }
                })
                .collect::<Result<Vec<Option<f64>>, EvalError>>()?;
            let defined: Vec<f64> = aucs.into_iter().flatten().collect();
            let (mean, sd) = mean_sd(&defined);
            Ok(SweepPoint { task, size, jobs: n_jobs, mean_auc: mean, sd_auc: sd, valid: defined.len(), skipped: false })
        })
        .collect()
}

fn mean_sd(v: &[f64]) -> (Option<f64>, Option<f64>) {
    if v.is_empty() {
        return (None, None);
    }
    let m = v.iter().sum::<f64>() / v.len() as f64;
    let sd = if v.len() > 1 {
        (v.iter().map(|a| (a - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
    } else {
        0.0
    };
    (Some(m), Some(sd))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubfamilyReport {
    pub family: Family,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubfamilySummary {
    pub families: Vec<SubfamilyReport>,
    /// Families whose training split held a single sub-variant.
    pub skipped: Vec<Family>,
    /// Correct predictions over all families' test records.
    pub pooled_accuracy: f64,
}

/// Three-way sub-variant classification inside each family.
pub fn per_family_subtask_eval(
    records: &[TranscriptRecord],
    mask: Mask,
    model: ModelKind,
    spec: &SplitSpec,
    settings: &EvalSettings,
) -> Result<SubfamilySummary, EvalError> {
    let families: Vec<Family> = Family::ALL.iter().copied().filter(|f| records.iter().any(|r| r.labels.a1_family == *f)).collect();
    let out = families
        .par_iter()
        .map(|&family| {
            let sub: Vec<TranscriptRecord> = records.iter().filter(|r| r.labels.a1_family == family).cloned().collect();
            let split = make_split(&sub, &SplitSpec { seed: derive_seed(spec.seed, &[str_tag(family.name())]), ..*spec })?;
            let x = feature_matrix(&sub, mask);
            let y = labels_for(&sub, Task::A2);
            let fam_settings = EvalSettings { seed: derive_seed(settings.seed, &[str_tag(family.name())]), ..settings.clone() };
            match run_cell(&x, &y, &split, Cell { task: Task::A2, mask, model }, spec.protocol, &fam_settings) {
                Ok(r) => Ok(Ok(SubfamilyReport { family, report: r.report })),
                Err(EvalError::Learn(LearnError::Degenerate)) => Ok(Err(family)),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    let skipped: Vec<Family> = out.iter().filter_map(|r| r.as_ref().err().copied()).collect();
    let out: Vec<SubfamilyReport> = out.into_iter().filter_map(Result::ok).collect();
    let correct: f64 = out.iter().map(|f| f.report.acc * f.report.n_test as f64).sum();
    let total: usize = out.iter().map(|f| f.report.n_test).sum();
    Ok(SubfamilySummary {
        families: out,
        skipped,
        pooled_accuracy: if total == 0 { 0.0 } else { correct / total as f64 },
    })
}
