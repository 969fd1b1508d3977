//! Tree-ensemble classifiers written from scratch: random forest, extra trees
//! and histogram gradient boosting. All three return class-probability rows
//! and are deterministic for a fixed seed and independent of thread count.

pub mod hgb;
pub mod tree;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use hgb::{BinMapper, BoostParams, RegTree};
use tree::{grow_tree, Columns, SplitRule, Tree, TreeParams};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LearnError {
    #[error("training labels contain fewer than two classes")]
    Degenerate,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite feature value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("{0} has no gini importance")]
    Unsupported(ModelKind),
    #[error("model format: {0}")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "RF")]
    RandomForest,
    #[serde(rename = "ET")]
    ExtraTrees,
    #[serde(rename = "HGB")]
    HistGradientBoosting,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::RandomForest, ModelKind::ExtraTrees, ModelKind::HistGradientBoosting];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::RandomForest => "RF",
            ModelKind::ExtraTrees => "ET",
            ModelKind::HistGradientBoosting => "HGB",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown model kind '{s}' (expected RF, ET or HGB)"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparams {
    pub n_trees: usize,
    /// `None` means floor(sqrt(n_features)), at least 1.
    pub max_features: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub max_depth: Option<usize>,
    pub rounds: usize,
    pub learning_rate: f64,
    pub max_bins: usize,
    pub hgb_max_depth: usize,
    pub hgb_min_samples_leaf: usize,
    pub l2: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            n_trees: 300,
            max_features: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
            max_depth: None,
            rounds: 100,
            learning_rate: 0.1,
            max_bins: 255,
            hgb_max_depth: 8,
            hgb_min_samples_leaf: 20,
            l2: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Trees {
    Bagged(Vec<Tree>),
    Boosted {
        mapper: BinMapper,
        init: Vec<f64>,
        rounds: Vec<Vec<Option<RegTree>>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleModel {
    pub format_version: u32,
    pub kind: ModelKind,
    pub n_classes: usize,
    pub feature_count: usize,
    pub training_seed: u64,
    pub hyperparams: Hyperparams,
    pub trees: Trees,
    /// Training log-loss after each boosting round (HGB only).
    #[serde(default)]
    pub loss_curve: Vec<f64>,
}

/// Mean and spread of per-tree normalised impurity decrease.
#[derive(Debug, Clone, PartialEq)]
pub struct Importance {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

fn check_inputs(x: &[Vec<f64>], y: &[usize], n_classes: usize) -> Result<usize, LearnError> {
    if x.len() != y.len() {
        return Err(LearnError::Shape(format!("{} rows but {} labels", x.len(), y.len())));
    }
    let Some(first) = x.first() else {
        return Err(LearnError::Degenerate);
    };
    let d = first.len();
    for (r, row) in x.iter().enumerate() {
        if row.len() != d {
            return Err(LearnError::Shape(format!("row {r} has {} features, expected {d}", row.len())));
        }
        if let Some(c) = row.iter().position(|v| !v.is_finite()) {
            return Err(LearnError::NonFinite { row: r, col: c });
        }
    }
    if let Some(&bad) = y.iter().find(|&&c| c >= n_classes) {
        return Err(LearnError::Shape(format!("label {bad} outside {n_classes} classes")));
    }
    let mut seen = vec![false; n_classes];
    y.iter().for_each(|&c| seen[c] = true);
    if seen.iter().filter(|&&s| s).count() < 2 {
        return Err(LearnError::Degenerate);
    }
    Ok(d)
}

/// Training rows in a canonical order so the model does not depend on how
/// the caller ordered them.
fn canonical_columns(x: &[Vec<f64>], y: &[usize], d: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| {
        x[a].iter()
            .zip(&x[b])
            .map(|(u, v)| u.total_cmp(v))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(y[a].cmp(&y[b]))
    });
    let cols = (0..d).map(|f| order.iter().map(|&i| x[i][f]).collect()).collect();
    let ys = order.iter().map(|&i| y[i]).collect();
    (cols, ys)
}

pub fn train(
    kind: ModelKind,
    x: &[Vec<f64>],
    y: &[usize],
    n_classes: usize,
    seed: u64,
    hp: &Hyperparams,
) -> Result<EnsembleModel, LearnError> {
    let d = check_inputs(x, y, n_classes)?;
    let (cols, ys) = canonical_columns(x, y, d);
    let n = ys.len();
    let (trees, loss_curve) = match kind {
        ModelKind::RandomForest | ModelKind::ExtraTrees => {
            let params = TreeParams {
                rule: if kind == ModelKind::RandomForest { SplitRule::Best } else { SplitRule::Random },
                max_features: hp.max_features.unwrap_or(((d as f64).sqrt().floor() as usize).max(1)).clamp(1, d),
                min_samples_split: hp.min_samples_split.max(2),
                min_samples_leaf: hp.min_samples_leaf.max(1),
                max_depth: hp.max_depth,
            };
            let data = Columns {
                cols: &cols,
                y: &ys,
                n_classes,
            };
            let trees: Vec<Tree> = (0..hp.n_trees)
                .into_par_iter()
                .map(|t| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(t as u64);
                    let sample: Vec<usize> = if kind == ModelKind::RandomForest {
                        (0..n).map(|_| rng.random_range(0..n)).collect()
                    } else {
                        (0..n).collect()
                    };
                    grow_tree(&data, sample, params, &mut rng)
                })
                .collect();
            (Trees::Bagged(trees), Vec::new())
        }
        ModelKind::HistGradientBoosting => {
            let mapper = BinMapper::fit(&cols, hp.max_bins.clamp(2, u16::MAX as usize));
            let params = BoostParams {
                rounds: hp.rounds,
                learning_rate: hp.learning_rate,
                max_depth: hp.hgb_max_depth,
                min_samples_leaf: hp.hgb_min_samples_leaf.max(1),
                l2: hp.l2,
            };
            let res = hgb::boost(&cols, &ys, n_classes, &mapper, params);
            (
                Trees::Boosted {
                    mapper,
                    init: res.init,
                    rounds: res.rounds,
                },
                res.loss_curve,
            )
        }
    };
    Ok(EnsembleModel {
        format_version: MODEL_FORMAT_VERSION,
        kind,
        n_classes,
        feature_count: d,
        training_seed: seed,
        hyperparams: hp.clone(),
        trees,
        loss_curve,
    })
}

impl EnsembleModel {
    fn predict_row(&self, row: &[f64]) -> Vec<f64> {
        match &self.trees {
            Trees::Bagged(trees) => {
                let mut acc = vec![0.0; self.n_classes];
                for t in trees {
                    for (a, p) in acc.iter_mut().zip(t.leaf_probs(row)) {
                        *a += p;
                    }
                }
                let z: f64 = acc.iter().sum();
                acc.into_iter().map(|v| v / z).collect()
            }
            Trees::Boosted { init, rounds, .. } => {
                let mut raw = init.clone();
                for round in rounds {
                    for (k, t) in round.iter().enumerate() {
                        if let Some(t) = t {
                            raw[k] += t.predict(row);
                        }
                    }
                }
                hgb::softmax(&raw)
            }
        }
    }

    pub fn predict_proba(&self, x: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, LearnError> {
        if let Some((r, row)) = x.iter().enumerate().find(|(_, row)| row.len() != self.feature_count) {
            return Err(LearnError::Shape(format!(
                "row {r} has {} features, model expects {}",
                row.len(),
                self.feature_count
            )));
        }
        Ok(x.par_iter().map(|row| self.predict_row(row)).collect())
    }

    /// Arg-max class per row, ties to the lowest class index.
    pub fn predict(&self, x: &[Vec<f64>]) -> Result<Vec<usize>, LearnError> {
        Ok(self.predict_proba(x)?.iter().map(|p| argmax(p)).collect())
    }

    pub fn gini_importance(&self) -> Result<Importance, LearnError> {
        let Trees::Bagged(trees) = &self.trees else {
            return Err(LearnError::Unsupported(self.kind));
        };
        let d = self.feature_count;
        let nt = trees.len() as f64;
        let mut mean = vec![0.0; d];
        for t in trees {
            for (m, v) in mean.iter_mut().zip(&t.importance) {
                *m += v / nt;
            }
        }
        let mut sd = vec![0.0; d];
        for t in trees {
            for ((s, v), m) in sd.iter_mut().zip(&t.importance).zip(&mean) {
                *s += (v - m) * (v - m) / nt;
            }
        }
        sd.iter_mut().for_each(|s| *s = s.sqrt());
        // single-leaf trees contribute zeros; renormalise the mean
        let z: f64 = mean.iter().sum();
        if z > 0.0 {
            mean.iter_mut().for_each(|m| *m /= z);
        }
        Ok(Importance { mean, sd })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serialises")
    }

    pub fn from_json(s: &str) -> Result<Self, LearnError> {
        let m: EnsembleModel = serde_json::from_str(s).map_err(|e| LearnError::Format(e.to_string()))?;
        if m.format_version != MODEL_FORMAT_VERSION {
            return Err(LearnError::Format(format!("unsupported format version {}", m.format_version)));
        }
        Ok(m)
    }
}

pub fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in p.iter().enumerate() {
        if v > p[best] {
            best = i;
        }
    }
    best
}
