//! Ordinary least squares, linear and quadratic variants.
//!
//! Both solve the minimum-norm least-squares problem through the SVD
//! pseudoinverse, so rank-deficient and underdetermined designs fall back
//! to the minimum-l2-norm interpolant. The quadratic variant augments the
//! features with all products `x_i x_j` (i <= j); when more than 100 input
//! features are present it first screens to the 100 highest univariate
//! F scores to cap the expansion size.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::numerics::svd::pseudo_inverse;
use crate::{Real, RealMatrix};

use super::f_test_ranking;

const SCREEN_LIMIT: usize = 100;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OlsModel {
    /// Weights over `[1, phi(x)]`.
    pub weights: Vec<Real>,
    /// Input columns retained by the quadratic pre-screen (sorted).
    pub kept: Option<Vec<usize>>,
    pub quadratic: bool,
}

fn expand_quadratic(x: &[Real], out: &mut Vec<Real>) {
    out.extend_from_slice(x);
    for i in 0..x.len() {
        for j in i..x.len() {
            out.push(x[i] * x[j]);
        }
    }
}

fn design_row(model_kept: &Option<Vec<usize>>, quadratic: bool, x: &[Real]) -> Vec<Real> {
    let reduced: Vec<Real> = match model_kept {
        Some(kept) => kept.iter().map(|&j| x[j]).collect(),
        None => x.to_vec(),
    };
    let mut row = vec![1.0];
    if quadratic {
        expand_quadratic(&reduced, &mut row);
    } else {
        row.extend_from_slice(&reduced);
    }
    row
}

/// Minimum-norm least-squares solution of `X w = y`. For wide designs the
/// dual form `w = X^T (X X^T)^+ y` avoids decomposing a huge column set.
fn min_norm_least_squares(rows: &[Vec<Real>], y: &[Real]) -> Result<Vec<Real>> {
    let n = rows.len();
    let p = rows[0].len();
    let refs: Vec<&[Real]> = rows.iter().map(|r| r.as_slice()).collect();
    let x = RealMatrix::from_rows(&refs);
    if p <= n {
        Ok(pseudo_inverse(&x, None)?.matvec(y))
    } else {
        let gram = x.matmul(&x.transpose());
        let dual = pseudo_inverse(&gram, None)?.matvec(y);
        Ok(x.matvec_transposed(&dual))
    }
}

pub fn fit(x: &[Vec<Real>], y: &[Real], quadratic: bool) -> Result<OlsModel> {
    let dim = x[0].len();
    let kept = if quadratic && dim > SCREEN_LIMIT {
        let mut top: Vec<usize> = f_test_ranking(x, y)[..SCREEN_LIMIT].to_vec();
        top.sort_unstable();
        Some(top)
    } else {
        None
    };
    let rows: Vec<Vec<Real>> = x.iter().map(|r| design_row(&kept, quadratic, r)).collect();
    let weights = min_norm_least_squares(&rows, y)?;
    Ok(OlsModel {
        weights,
        kept,
        quadratic,
    })
}

impl OlsModel {
    pub fn predict(&self, x: &[Real]) -> Real {
        let row = design_row(&self.kept, self.quadratic, x);
        row.iter().zip(&self.weights).map(|(&a, &b)| a * b).sum()
    }
}
