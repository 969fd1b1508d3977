//! Histogram gradient boosting with a softmax objective.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Upper edges of equal-frequency bins; a value `x` falls in the first bin
/// whose edge is `>= x`, or in the last bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinMapper {
    pub edges: Vec<Vec<f64>>,
}

impl BinMapper {
    pub fn fit(cols: &[Vec<f64>], max_bins: usize) -> Self {
        let edges = cols
            .iter()
            .map(|col| {
                let mut v = col.clone();
                v.sort_unstable_by(f64::total_cmp);
                v.dedup();
                if v.len() <= max_bins {
                    v.windows(2).map(|w| w[0] + (w[1] - w[0]) / 2.0).collect()
                } else {
                    // equal-frequency cut points over the sorted column
                    let mut sorted = col.clone();
                    sorted.sort_unstable_by(f64::total_cmp);
                    let n = sorted.len();
                    let mut e: Vec<f64> = (1..max_bins)
                        .map(|b| {
                            let hi = sorted[(b * n / max_bins).min(n - 1)];
                            let lo = sorted[(b * n / max_bins).saturating_sub(1)];
                            lo + (hi - lo) / 2.0
                        })
                        .collect();
                    e.dedup();
                    e
                }
            })
            .collect();
        BinMapper { edges }
    }

    pub fn bin(&self, f: usize, x: f64) -> u16 {
        self.edges[f].partition_point(|&e| e < x) as u16
    }

    pub fn n_bins(&self, f: usize) -> usize {
        self.edges[f].len() + 1
    }

    /// Raw threshold equivalent to "bin <= b goes left".
    pub fn threshold(&self, f: usize, b: usize) -> f64 {
        self.edges[f][b]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RegNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegTree {
    pub nodes: Vec<RegNode>,
}

impl RegTree {
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                RegNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if row[*feature] <= *threshold { *left } else { *right },
                RegNode::Leaf { value } => return *value,
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BoostParams {
    pub rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub l2: f64,
}

struct RegGrower<'a> {
    binned: &'a [Vec<u16>],
    mapper: &'a BinMapper,
    grad: &'a [f64],
    hess: &'a [f64],
    params: BoostParams,
    nodes: Vec<RegNode>,
}

impl RegGrower<'_> {
    fn leaf_value(&self, g: f64, h: f64) -> f64 {
        -self.params.learning_rate * g / (h + self.params.l2)
    }

    fn grow(&mut self, idx: &mut [usize], depth: usize) -> usize {
        let (g, h) = idx.iter().fold((0.0, 0.0), |(g, h), &i| (g + self.grad[i], h + self.hess[i]));
        let me = self.nodes.len();
        self.nodes.push(RegNode::Leaf {
            value: self.leaf_value(g, h),
        });
        if depth >= self.params.max_depth || idx.len() < 2 * self.params.min_samples_leaf {
            return me;
        }
        let l2 = self.params.l2;
        let parent_score = g * g / (h + l2);
        let mut best: Option<(f64, usize, usize)> = None;
        for (f, col) in self.binned.iter().enumerate() {
            let nb = self.mapper.n_bins(f);
            if nb < 2 {
                continue;
            }
            let mut hg = vec![0.0; nb];
            let mut hh = vec![0.0; nb];
            let mut hc = vec![0usize; nb];
            for &i in idx.iter() {
                let b = col[i] as usize;
                hg[b] += self.grad[i];
                hh[b] += self.hess[i];
                hc[b] += 1;
            }
            let (mut gl, mut hl, mut cl) = (0.0, 0.0, 0usize);
            for b in 0..nb - 1 {
                gl += hg[b];
                hl += hh[b];
                cl += hc[b];
                let cr = idx.len() - cl;
                if cl < self.params.min_samples_leaf || cr < self.params.min_samples_leaf {
                    continue;
                }
                let (gr, hr) = (g - gl, h - hl);
                let gain = gl * gl / (hl + l2) + gr * gr / (hr + l2) - parent_score;
                if gain > 1e-12 && best.is_none_or(|(bg, _, _)| gain > bg) {
                    best = Some((gain, f, b));
                }
            }
        }
        let Some((_, f, b)) = best else {
            return me;
        };
        let col = &self.binned[f];
        let mut cut = 0;
        for i in 0..idx.len() {
            if (col[idx[i]] as usize) <= b {
                idx.swap(i, cut);
                cut += 1;
            }
        }
        let (l, r) = idx.split_at_mut(cut);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[me] = RegNode::Split {
            feature: f,
            threshold: self.mapper.threshold(f, b),
            left,
            right,
        };
        me
    }
}

pub struct BoostResult {
    pub init: Vec<f64>,
    /// `rounds[r][k]`; `None` for classes absent from training.
    pub rounds: Vec<Vec<Option<RegTree>>>,
    pub loss_curve: Vec<f64>,
}

/// Score assigned to classes that never appear in training.
pub const ABSENT_SCORE: f64 = -30.0;

pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let m = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = scores.iter().map(|s| (s - m).exp()).collect();
    let z: f64 = e.iter().sum();
    e.into_iter().map(|v| v / z).collect()
}

fn log_loss(raw: &[Vec<f64>], y: &[usize]) -> f64 {
    raw.iter()
        .zip(y)
        .map(|(r, &c)| -softmax(r)[c].max(1e-300).ln())
        .sum::<f64>()
        / y.len() as f64
}

pub fn boost(cols: &[Vec<f64>], y: &[usize], n_classes: usize, mapper: &BinMapper, params: BoostParams) -> BoostResult {
    let n = y.len();
    let binned: Vec<Vec<u16>> = cols
        .iter()
        .enumerate()
        .map(|(f, col)| col.iter().map(|&x| mapper.bin(f, x)).collect())
        .collect();
    let mut counts = vec![0usize; n_classes];
    for &c in y {
        counts[c] += 1;
    }
    let init: Vec<f64> = counts
        .iter()
        .map(|&c| if c == 0 { ABSENT_SCORE } else { (c as f64 / n as f64).ln() })
        .collect();
    let mut raw: Vec<Vec<f64>> = vec![init.clone(); n];
    let mut rounds = Vec::with_capacity(params.rounds);
    let mut loss_curve = vec![log_loss(&raw, y)];
    for _ in 0..params.rounds {
        let probs: Vec<Vec<f64>> = raw.iter().map(|r| softmax(r)).collect();
        let trees: Vec<Option<RegTree>> = (0..n_classes)
            .into_par_iter()
            .map(|k| {
                if counts[k] == 0 {
                    return None;
                }
                let grad: Vec<f64> = (0..n).map(|i| probs[i][k] - f64::from(u8::from(y[i] == k))).collect();
                let hess: Vec<f64> = (0..n).map(|i| (probs[i][k] * (1.0 - probs[i][k])).max(1e-16)).collect();
                let mut g = RegGrower {
                    binned: &binned,
                    mapper,
                    grad: &grad,
                    hess: &hess,
                    params,
                    nodes: Vec::new(),
                };
                let mut idx: Vec<usize> = (0..n).collect();
                g.grow(&mut idx, 0);
                Some(RegTree { nodes: g.nodes })
            })
            .collect();
        for (i, r) in raw.iter_mut().enumerate() {
            let row: Vec<f64> = cols.iter().map(|c| c[i]).collect();
            for (k, t) in trees.iter().enumerate() {
                if let Some(t) = t {
                    r[k] += t.predict(&row);
                }
            }
        }
        loss_curve.push(log_loss(&raw, y));
        rounds.push(trees);
    }
    BoostResult {
        init,
        rounds,
        loss_curve,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn few_unique_values_get_one_bin_each() {
        let m = BinMapper::fit(&[vec![3.0, 1.0, 2.0, 1.0]], 255);
        assert_eq!(m.edges[0], vec![1.5, 2.5]);
        assert_eq!(m.bin(0, 1.0), 0);
        assert_eq!(m.bin(0, 2.0), 1);
        assert_eq!(m.bin(0, 9.0), 2);
    }

    #[test]
    fn many_values_are_capped() {
        let col: Vec<f64> = (0..10_000).map(|i| i as f64).collect();
        let m = BinMapper::fit(&[col], 255);
        assert!(m.n_bins(0) <= 255);
        assert!(m.n_bins(0) > 200);
    }

    #[test]
    fn softmax_sums_to_one() {
        let p = softmax(&[1.0, -2.0, 0.5, ABSENT_SCORE]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
