//! k-nearest-neighbor regression with uniform or inverse-distance
//! weighting and optional univariate feature screening.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Real;

use super::f_test_ranking;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KnnWeights {
    Uniform,
    /// Weight proportional to the reciprocal Euclidean distance; an exact
    /// hit (zero distance) dominates.
    InverseDistance,
}

impl KnnWeights {
    pub fn label(&self) -> &'static str {
        match self {
            KnnWeights::Uniform => "uniform",
            KnnWeights::InverseDistance => "invdist",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KnnModel {
    pub x: Vec<Vec<Real>>,
    pub y: Vec<Real>,
    pub k: usize,
    pub weights: KnnWeights,
    /// Feature columns retained by screening (sorted), if any.
    pub kept: Option<Vec<usize>>,
}

pub fn fit(
    x: &[Vec<Real>],
    y: &[Real],
    k: usize,
    weights: KnnWeights,
    n_kept_features: Option<usize>,
) -> Result<KnnModel> {
    let dim = x[0].len();
    let kept = match n_kept_features {
        Some(n) if n < dim => {
            if n == 0 {
                return Err(Error::InvalidArgument(
                    "feature screening must keep at least one column".into(),
                ));
            }
            let mut top: Vec<usize> = f_test_ranking(x, y)[..n].to_vec();
            top.sort_unstable();
            Some(top)
        }
        _ => None,
    };
    let reduce = |r: &Vec<Real>| -> Vec<Real> {
        match &kept {
            Some(cols) => cols.iter().map(|&j| r[j]).collect(),
            None => r.clone(),
        }
    };
    Ok(KnnModel {
        x: x.iter().map(reduce).collect(),
        y: y.to_vec(),
        k,
        weights,
        kept,
    })
}

impl KnnModel {
    pub fn predict(&self, query: &[Real]) -> Real {
        let q: Vec<Real> = match &self.kept {
            Some(cols) => cols.iter().map(|&j| query[j]).collect(),
            None => query.to_vec(),
        };
        let mut dist: Vec<(Real, usize)> = self
            .x
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let d2: Real = r.iter().zip(&q).map(|(&a, &b)| (a - b) * (a - b)).sum();
                (d2.sqrt(), i)
            })
            .collect();
        dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let nearest = &dist[..self.k];

        // Exact hits dominate inverse-distance weighting; average them so
        // duplicated training points stay well defined.
        if self.weights == KnnWeights::InverseDistance {
            let hits: Vec<usize> = nearest
                .iter()
                .take_while(|(d, _)| *d == 0.0)
                .map(|&(_, i)| i)
                .collect();
            if !hits.is_empty() {
                return hits.iter().map(|&i| self.y[i]).sum::<Real>() / hits.len() as Real;
            }
        }
        match self.weights {
            KnnWeights::Uniform => {
                nearest.iter().map(|&(_, i)| self.y[i]).sum::<Real>() / self.k as Real
            }
            KnnWeights::InverseDistance => {
                let wsum: Real = nearest.iter().map(|(d, _)| 1.0 / d).sum();
                nearest
                    .iter()
                    .map(|&(d, i)| self.y[i] / d)
                    .sum::<Real>()
                    / wsum
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_util::lcg;
    use super::*;

    #[test]
    fn exact_hit_returns_training_response() {
        let x = vec![vec![0.0], vec![1.0], vec![2.0]];
        let y = vec![5.0, -1.0, 7.0];
        for k in 1..=3 {
            let m = fit(&x, &y, k, KnnWeights::InverseDistance, None).unwrap();
            assert_eq!(m.predict(&[1.0]), -1.0);
        }
    }

    #[test]
    fn k_equal_n_uniform_is_global_mean() {
        let x = vec![vec![0.0], vec![1.0], vec![4.0], vec![9.0]];
        let y = vec![1.0, 2.0, 3.0, 6.0];
        let m = fit(&x, &y, 4, KnnWeights::Uniform, None).unwrap();
        assert!((m.predict(&[2.0]) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn two_point_inverse_distance_hand_check() {
        // Query at 1.0 with neighbors at 0.0 (d=1) and 3.0 (d=2):
        // weights 1 and 1/2 -> (y0 + y1/2) / (3/2).
        let x = vec![vec![0.0], vec![3.0], vec![10.0]];
        let y = vec![2.0, 5.0, 100.0];
        let m = fit(&x, &y, 2, KnnWeights::InverseDistance, None).unwrap();
        let expected = (2.0 + 5.0 / 2.0) / 1.5;
        assert!((m.predict(&[1.0]) - expected).abs() < 1e-14);
    }

    #[test]
    fn k1_has_zero_training_error_on_distinct_points() {
        let mut state = 2u64;
        let x: Vec<Vec<f64>> = (0..25)
            .map(|_| vec![lcg(&mut state), lcg(&mut state)])
            .collect();
        let y: Vec<f64> = (0..25).map(|_| lcg(&mut state)).collect();
        for w in [KnnWeights::Uniform, KnnWeights::InverseDistance] {
            let m = fit(&x, &y, 1, w, None).unwrap();
            for (r, &t) in x.iter().zip(&y) {
                assert_eq!(m.predict(r), t);
            }
        }
    }

    #[test]
    fn feature_screening_ignores_noise_columns() {
        let mut state = 6u64;
        let x: Vec<Vec<f64>> = (0..60)
            .map(|_| vec![lcg(&mut state), 100.0 * lcg(&mut state)])
            .collect();
        let y: Vec<f64> = x.iter().map(|r| r[0]).collect();
        let m = fit(&x, &y, 3, KnnWeights::Uniform, Some(1)).unwrap();
        assert_eq!(m.kept.as_deref(), Some(&[0usize][..]));
        // With the noisy large-scale column removed, neighbors in x[0]
        // give accurate local means.
        let err: f64 = x
            .iter()
            .zip(&y)
            .map(|(r, &t)| (m.predict(r) - t).abs())
            .fold(0.0, f64::max);
        assert!(err < 0.2, "max error {err}");
    }
}
