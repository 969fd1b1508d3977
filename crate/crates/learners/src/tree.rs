//! Gini classification trees for the bagged ensembles.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        probs: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
    /// Weighted impurity decrease per feature, normalised to sum 1 (all zero
    /// for a single-leaf tree).
    pub importance: Vec<f64>,
}

impl Tree {
    pub fn leaf_probs(&self, row: &[f64]) -> &[f64] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if row[*feature] <= *threshold { *left } else { *right },
                Node::Leaf { probs } => return probs,
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
                Node::Leaf { .. } => 0,
            }
        }
        go(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitRule {
    /// Exhaustive threshold search (random forest).
    Best,
    /// One uniform threshold per candidate feature (extra trees).
    Random,
}

#[derive(Debug, Clone, Copy)]
pub struct TreeParams {
    pub rule: SplitRule,
    pub max_features: usize,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub max_depth: Option<usize>,
}

/// Column-major view of the training data.
pub struct Columns<'a> {
    pub cols: &'a [Vec<f64>],
    pub y: &'a [usize],
    pub n_classes: usize,
}

fn gini(counts: &[f64], total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    1.0 - counts.iter().map(|c| (c / total) * (c / total)).sum::<f64>()
}

struct Candidate {
    feature: usize,
    threshold: f64,
    score: f64,
}

struct Grower<'a, R: Rng> {
    data: &'a Columns<'a>,
    params: TreeParams,
    rng: &'a mut R,
    nodes: Vec<Node>,
    importance: Vec<f64>,
    n_root: f64,
}

impl<R: Rng> Grower<'_, R> {
    fn counts(&self, idx: &[usize]) -> Vec<f64> {
        let mut c = vec![0.0; self.data.n_classes];
        for &i in idx {
            c[self.data.y[i]] += 1.0;
        }
        c
    }

    fn leaf(&mut self, counts: &[f64], total: f64) -> usize {
        let probs = counts.iter().map(|c| c / total).collect();
        self.nodes.push(Node::Leaf { probs });
        self.nodes.len() - 1
    }

    fn best_threshold(&self, f: usize, idx: &mut [usize], parent: &[f64]) -> Option<Candidate> {
        let col = &self.data.cols[f];
        idx.sort_unstable_by(|&a, &b| col[a].total_cmp(&col[b]));
        let n = idx.len();
        let min_leaf = self.params.min_samples_leaf;
        let mut left = vec![0.0; self.data.n_classes];
        let mut best: Option<Candidate> = None;
        for pos in 0..n - 1 {
            left[self.data.y[idx[pos]]] += 1.0;
            let (a, b) = (col[idx[pos]], col[idx[pos + 1]]);
            if a == b {
                continue;
            }
            let nl = pos + 1;
            if nl < min_leaf || n - nl < min_leaf {
                continue;
            }
            let right: Vec<f64> = parent.iter().zip(&left).map(|(p, l)| p - l).collect();
            let score = nl as f64 * gini(&left, nl as f64) + (n - nl) as f64 * gini(&right, (n - nl) as f64);
            if best.as_ref().is_none_or(|c| score < c.score) {
                let mut threshold = a + (b - a) / 2.0;
                if threshold >= b {
                    threshold = a;
                }
                best = Some(Candidate {
                    feature: f,
                    threshold,
                    score,
                });
            }
        }
        best
    }

    fn random_threshold(&mut self, f: usize, idx: &[usize], lo: f64, hi: f64) -> Option<Candidate> {
        let col = &self.data.cols[f];
        let mut threshold = lo + self.rng.random::<f64>() * (hi - lo);
        if threshold >= hi {
            threshold = lo;
        }
        let mut left = vec![0.0; self.data.n_classes];
        let mut right = vec![0.0; self.data.n_classes];
        for &i in idx {
            if col[i] <= threshold {
                left[self.data.y[i]] += 1.0;
            } else {
                right[self.data.y[i]] += 1.0;
            }
        }
        let (nl, nr) = (left.iter().sum::<f64>(), right.iter().sum::<f64>());
        let min_leaf = self.params.min_samples_leaf as f64;
        if nl < min_leaf || nr < min_leaf {
            return None;
        }
        Some(Candidate {
            feature: f,
            threshold,
            score: nl * gini(&left, nl) + nr * gini(&right, nr),
        })
    }

    fn grow(&mut self, idx: &mut [usize], depth: usize) -> usize {
        let counts = self.counts(idx);
        let total = idx.len() as f64;
        let impurity = gini(&counts, total);
        let at_limit = self.params.max_depth.is_some_and(|d| depth >= d);
        if impurity <= 0.0 || idx.len() < self.params.min_samples_split || at_limit {
            return self.leaf(&counts, total);
        }

        let n_features = self.data.cols.len();
        let mut order: Vec<usize> = (0..n_features).collect();
        order.shuffle(self.rng);
        let mut best: Option<Candidate> = None;
        let mut visited = 0;
        for &f in &order {
            // constant features do not count towards max_features
            if visited >= self.params.max_features && best.is_some() {
                break;
            }
            let col = &self.data.cols[f];
            let (lo, hi) = idx
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| (lo.min(col[i]), hi.max(col[i])));
            if lo >= hi {
                continue;
            }
            visited += 1;
            let cand = match self.params.rule {
                SplitRule::Best => self.best_threshold(f, idx, &counts),
                SplitRule::Random => self.random_threshold(f, idx, lo, hi),
            };
            if let Some(c) = cand {
                if best.as_ref().is_none_or(|b| c.score < b.score) {
                    best = Some(c);
                }
            }
        }
        let Some(split) = best else {
            return self.leaf(&counts, total);
        };
        // zero-gain splits are still taken so trees can reach purity
        self.importance[split.feature] += (total * impurity - split.score).max(0.0) / self.n_root;

        let col = &self.data.cols[split.feature];
        let mut cut = 0;
        for i in 0..idx.len() {
            if col[idx[i]] <= split.threshold {
                idx.swap(i, cut);
                cut += 1;
            }
        }
        let me = self.nodes.len();
        self.nodes.push(Node::Leaf { probs: vec![] });
        let (l, r) = idx.split_at_mut(cut);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[me] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        me
    }
}

/// Grows one tree on `sample` (row indices, repeats allowed).
pub fn grow_tree(data: &Columns<'_>, mut sample: Vec<usize>, params: TreeParams, rng: &mut impl Rng) -> Tree {
    let n_features = data.cols.len();
    let n_root = sample.len() as f64;
    let mut g = Grower {
        data,
        params,
        rng,
        nodes: Vec::new(),
        importance: vec![0.0; n_features],
        n_root,
    };
    g.grow(&mut sample, 0);
    let mut importance = g.importance;
    let s: f64 = importance.iter().sum();
    if s > 0.0 {
        importance.iter_mut().for_each(|v| *v /= s);
    }
    Tree {
        nodes: g.nodes,
        importance,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(rule: SplitRule) -> TreeParams {
        TreeParams {
            rule,
            max_features: 1,
            min_samples_split: 2,
            min_samples_leaf: 1,
            max_depth: None,
        }
    }

    #[test]
    fn separable_threshold_is_a_midpoint() {
        let cols = vec![vec![0.0, 1.0, 2.0, 3.0]];
        let y = vec![0, 0, 1, 1];
        let data = Columns {
            cols: &cols,
            y: &y,
            n_classes: 2,
        };
        let t = grow_tree(&data, vec![0, 1, 2, 3], params(SplitRule::Best), &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(t.nodes.len(), 3);
        match &t.nodes[0] {
            Node::Split { threshold, .. } => assert_eq!(*threshold, 1.5),
            _ => panic!("root should split"),
        }
        assert_eq!(t.importance, vec![1.0]);
        assert_eq!(t.depth(), 1);
    }

    #[test]
    fn random_rule_reaches_purity() {
        let cols = vec![(0..40).map(|i| i as f64).collect::<Vec<_>>()];
        let y: Vec<usize> = (0..40).map(|i| usize::from(i >= 17)).collect();
        let data = Columns {
            cols: &cols,
            y: &y,
            n_classes: 2,
        };
        let t = grow_tree(&data, (0..40).collect(), params(SplitRule::Random), &mut ChaCha8Rng::seed_from_u64(4));
        for i in 0..40 {
            let p = t.leaf_probs(&[i as f64]);
            assert_eq!(p[y[i]], 1.0);
        }
    }
}
