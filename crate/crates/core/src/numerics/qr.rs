use crate::error::{Error, Result};

use super::matrix::DenseMatrix;
use super::scalar::Scalar;

/// Economy QR factorization with column pivoting: `A * Pi = Q * R`.
///
/// `q` is `m x k`, `r` is `k x n` upper trapezoidal with `k = min(m, n)`,
/// and `pivot[j]` gives the original column index placed at position `j`.
#[derive(Clone, Debug)]
pub struct PivotedQrResult<S> {
    pub q: DenseMatrix<S>,
    pub r: DenseMatrix<S>,
    pub pivot: Vec<usize>,
}

/// Householder QR with greedy max-residual-norm column pivoting
/// (Businger-Golub).
pub fn qr_column_pivoted<S: Scalar>(a: &DenseMatrix<S>) -> Result<PivotedQrResult<S>> {
    if !a.is_finite() {
        return Err(Error::NonFinite { context: "qr input" });
    }
    let m = a.rows();
    let n = a.cols();
    let k = m.min(n);
    let mut work = a.clone();
    let mut pivot: Vec<usize> = (0..n).collect();
    // Squared residual column norms, downdated each step and periodically
    // recomputed to limit cancellation.
    let mut norms: Vec<S> = (0..n)
        .map(|j| (0..m).map(|i| work[(i, j)] * work[(i, j)]).sum())
        .collect();
    let mut householder: Vec<(usize, Vec<S>)> = Vec::with_capacity(k);

    for step in 0..k {
        // Pick the column with the largest remaining norm; ties keep the
        // earliest column.
        let mut best = step;
        for j in (step + 1)..n {
            if norms[j] > norms[best] {
                best = j;
            }
        }
        if best != step {
            swap_columns(&mut work, step, best);
            pivot.swap(step, best);
            norms.swap(step, best);
        }

        // Householder vector for rows step.. of column step.
        let mut v: Vec<S> = (step..m).map(|i| work[(i, step)]).collect();
        let alpha = v.iter().map(|&x| x * x).sum::<S>().sqrt();
        if alpha > S::zero() {
            let sign = if v[0] >= S::zero() { S::one() } else { -S::one() };
            v[0] += sign * alpha;
            let vnorm2 = v.iter().map(|&x| x * x).sum::<S>();
            if vnorm2 > S::zero() {
                // Apply to the trailing block.
                for j in step..n {
                    let mut proj = S::zero();
                    for (t, &vi) in v.iter().enumerate() {
                        proj += vi * work[(step + t, j)];
                    }
                    let factor = S::from_f64_c(2.0) * proj / vnorm2;
                    for (t, &vi) in v.iter().enumerate() {
                        work[(step + t, j)] = work[(step + t, j)] - factor * vi;
                    }
                }
            }
            householder.push((step, v));
        } else {
            householder.push((step, v));
        }

        // Downdate residual norms; exact recomputation every 16 steps.
        for j in (step + 1)..n {
            let w = work[(step, j)];
            norms[j] = (norms[j] - w * w).max(S::zero());
        }
        if step % 16 == 15 {
            for j in (step + 1)..n {
                norms[j] = ((step + 1)..m)
                    .map(|i| work[(i, j)] * work[(i, j)])
                    .sum();
            }
        }
    }

    // R is the upper trapezoid of the worked matrix.
    let mut r = DenseMatrix::zeros(k, n);
    for i in 0..k {
        for j in i..n {
            r[(i, j)] = work[(i, j)];
        }
    }
    // Q from accumulated Householder reflectors applied to I's first k cols.
    let mut q = DenseMatrix::zeros(m, k);
    for j in 0..k {
        q[(j, j)] = S::one();
    }
    for (step, v) in householder.iter().rev() {
        let vnorm2: S = v.iter().map(|&x| x * x).sum();
        if vnorm2 == S::zero() {
            continue;
        }
        for j in 0..k {
            let mut proj = S::zero();
            for (t, &vi) in v.iter().enumerate() {
                proj += vi * q[(step + t, j)];
            }
            let factor = S::from_f64_c(2.0) * proj / vnorm2;
            for (t, &vi) in v.iter().enumerate() {
                q[(step + t, j)] = q[(step + t, j)] - factor * vi;
            }
        }
    }
    Ok(PivotedQrResult { q, r, pivot })
}

fn swap_columns<S: Scalar>(m: &mut DenseMatrix<S>, a: usize, b: usize) {
    for i in 0..m.rows() {
        let t = m[(i, a)];
        m[(i, a)] = m[(i, b)];
        m[(i, b)] = t;
    }
}
