//! Classification metrics. AUC is the Mann-Whitney statistic with midranks.

use rand::Rng;
use serde::{Deserialize, Serialize};

use cutleak_core::seed::rng_for;
use cutleak_learners::argmax;

pub fn accuracy(y: &[usize], pred: &[usize]) -> f64 {
    if y.is_empty() {
        return 0.0;
    }
    y.iter().zip(pred).filter(|(a, b)| a == b).count() as f64 / y.len() as f64
}

/// `m[true][pred]`.
pub fn confusion(y: &[usize], pred: &[usize], n_classes: usize) -> Vec<Vec<usize>> {
    let mut m = vec![vec![0; n_classes]; n_classes];
    for (&t, &p) in y.iter().zip(pred) {
        m[t][p] += 1;
    }
    m
}

/// Mean F1 over classes seen in either `y` or `pred`; a class with no true
/// positives scores 0.
pub fn macro_f1(y: &[usize], pred: &[usize], n_classes: usize) -> f64 {
    let m = confusion(y, pred, n_classes);
    let mut sum = 0.0;
    let mut seen = 0;
    for k in 0..n_classes {
        let tp = m[k][k] as f64;
        let support: usize = m[k].iter().sum();
        let predicted: usize = m.iter().map(|row| row[k]).sum();
        if support == 0 && predicted == 0 {
            continue;
        }
        seen += 1;
        let denom = (support + predicted) as f64;
        if tp > 0.0 {
            sum += 2.0 * tp / denom;
        }
    }
    if seen == 0 {
        0.0
    } else {
        sum / seen as f64
    }
}

/// Rank-sum AUC of `scores` for `positive[i] == true`; `None` when one side
/// is empty.
pub fn binary_auc(scores: &[f64], positive: &[bool]) -> Option<f64> {
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += order[i..=j].iter().filter(|&&k| positive[k]).count() as f64 * mid;
        i = j + 1;
    }
    let (p, n) = (n_pos as f64, n_neg as f64);
    Some((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

/// One-vs-rest macro AUC. Undefined unless every task class occurs in `y`.
/// Binary tasks use the class-1 column only.
pub fn macro_auc(y: &[usize], proba: &[Vec<f64>], n_classes: usize) -> Option<f64> {
    let mut present = vec![false; n_classes];
    for &c in y {
        present[c] = true;
    }
    if present.iter().any(|p| !p) {
        return None;
    }
    let one_vs_rest = |k: usize| {
        let scores: Vec<f64> = proba.iter().map(|r| r[k]).collect();
        let pos: Vec<bool> = y.iter().map(|&c| c == k).collect();
        binary_auc(&scores, &pos)
    };
    if n_classes == 2 {
        return one_vs_rest(1);
    }
    let mut sum = 0.0;
    for k in 0..n_classes {
        sum += one_vs_rest(k)?;
    }
    Some(sum / n_classes as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Accuracy,
    MacroF1,
    MacroAuc,
}

impl Metric {
    pub fn eval(self, y: &[usize], proba: &[Vec<f64>], n_classes: usize) -> Option<f64> {
        match self {
            Metric::MacroAuc => macro_auc(y, proba, n_classes),
            _ => {
                let pred: Vec<usize> = proba.iter().map(|r| argmax(r)).collect();
                Some(if self == Metric::Accuracy {
                    accuracy(y, &pred)
                } else {
                    macro_f1(y, &pred, n_classes)
                })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub low: f64,
    pub high: f64,
    /// Resamples with an undefined metric.
    pub skipped: usize,
}

/// Percentile of sorted data with linear interpolation.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// 2.5/97.5 percentile interval over `b` resamples of the test set. `None`
/// if no resample yields a defined metric.
pub fn bootstrap_ci(metric: Metric, y: &[usize], proba: &[Vec<f64>], n_classes: usize, b: usize, seed: u64) -> Option<Interval> {
    if y.is_empty() || b == 0 {
        return None;
    }
    let mut rng = rng_for(seed, &[0xB007]);
    let n = y.len();
    let mut values = Vec::with_capacity(b);
    let mut skipped = 0;
    let (mut ys, mut ps) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for _ in 0..b {
        ys.clear();
        ps.clear();
        for _ in 0..n {
            let i = rng.random_range(0..n);
            ys.push(y[i]);
            ps.push(proba[i].clone());
        }
        match metric.eval(&ys, &ps, n_classes) {
            Some(v) => values.push(v),
            None => skipped += 1,
        }
    }
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    Some(Interval {
        low: percentile(&values, 0.025),
        high: percentile(&values, 0.975),
        skipped,
    })
}
