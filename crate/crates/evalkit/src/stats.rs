//! Two-sample distribution distances.

use crate::EvalError;

fn sorted(a: &[f64]) -> Vec<f64> {
    let mut v = a.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Quantile of sorted data at probability `p` with linear interpolation.
fn quantile(s: &[f64], p: f64) -> f64 {
    crate::metrics::percentile(s, p)
}

/// 1-Wasserstein distance. Unequal sizes are resampled to the larger size
/// at evenly spaced quantiles.
pub fn wasserstein_1d(a: &[f64], b: &[f64]) -> Result<f64, EvalError> {
    if a.is_empty() || b.is_empty() {
        return Err(EvalError::Input("empty sample".into()));
    }
    let (sa, sb) = (sorted(a), sorted(b));
    if sa.len() == sb.len() {
        return Ok(sa.iter().zip(&sb).map(|(x, y)| (x - y).abs()).sum::<f64>() / sa.len() as f64);
    }
    let m = sa.len().max(sb.len());
    let grid = |s: &[f64]| -> Vec<f64> {
        (0..m).map(|i| quantile(s, if m == 1 { 0.5 } else { i as f64 / (m - 1) as f64 })).collect()
    };
    let (qa, qb) = (grid(&sa), grid(&sb));
    Ok(qa.iter().zip(&qb).map(|(x, y)| (x - y).abs()).sum::<f64>() / m as f64)
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64, EvalError> {
    if a.is_empty() || b.is_empty() {
        return Err(EvalError::Input("empty sample".into()));
    }
    let (sa, sb) = (sorted(a), sorted(b));
    let (na, nb) = (sa.len() as f64, sb.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < sa.len() && j < sb.len() {
        let x = sa[i].min(sb[j]);
        while i < sa.len() && sa[i] <= x {
            i += 1;
        }
        while j < sb.len() && sb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

pub fn mean(a: &[f64]) -> f64 {
    a.iter().sum::<f64>() / a.len() as f64
}
