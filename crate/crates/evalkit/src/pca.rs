use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::EvalError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pca {
    pub mean: Vec<f64>,
    /// Row `k` is the `k`-th principal axis.
    pub components: Vec<Vec<f64>>,
    pub explained_variance_ratio: Vec<f64>,
    pub projected: Vec<Vec<f64>>,
}

/// Eigen-decomposition of the sample covariance, axes sorted by variance.
/// Each axis is flipped so its largest-magnitude loading is positive.
pub fn pca_project(x: &[Vec<f64>]) -> Result<Pca, EvalError> {
    let n = x.len();
    let p = x.first().map_or(0, Vec::len);
    if n < 2 || p < 2 {
        return Err(EvalError::Degenerate(format!("pca needs >= 2 samples and features, got {n}x{p}")));
    }
    let mean: Vec<f64> = (0..p).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let centred = DMatrix::from_fn(n, p, |i, j| x[i][j] - mean[j]);
    let cov = (centred.transpose() * &centred) / (n as f64 - 1.0);
    let total = cov.trace();
    if total <= 1e-300 {
        return Err(EvalError::Degenerate("pca input has zero variance".into()));
    }
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let components: Vec<Vec<f64>> = order
        .iter()
        .map(|&k| {
            let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
            let lead = v.iter().copied().fold(0.0f64, |m, c| if c.abs() > m.abs() { c } else { m });
            if lead < 0.0 {
                v.iter_mut().for_each(|c| *c = -*c);
            }
            v
        })
        .collect();
    let explained_variance_ratio = order.iter().map(|&k| eig.eigenvalues[k].max(0.0) / total).collect();
    let projected = (0..n)
        .map(|i| {
            components
                .iter()
                .map(|c| c.iter().enumerate().map(|(j, v)| v * centred[(i, j)]).sum())
                .collect()
        })
        .collect();
    Ok(Pca {
        mean,
        components,
        explained_variance_ratio,
        projected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn collinear_data_has_one_axis() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
        let p = pca_project(&x).unwrap();
        assert!((p.explained_variance_ratio[0] - 1.0).abs() < 1e-9);
        assert!(p.components[0].iter().all(|&c| c > 0.0));
    }

    #[test]
    fn isotropic_gaussian_splits_evenly() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<Vec<f64>> = (0..10_000)
            .map(|_| (0..3).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect();
        for r in pca_project(&x).unwrap().explained_variance_ratio {
            assert!((r - 1.0 / 3.0).abs() < 0.02, "{r}");
        }
    }

    #[test]
    fn constant_input_is_rejected() {
        assert!(matches!(pca_project(&[vec![1.0, 2.0], vec![1.0, 2.0]]), Err(EvalError::Degenerate(_))));
    }
}
