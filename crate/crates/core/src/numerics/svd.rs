use crate::error::{Error, Result};

use super::matrix::{dot, norm2, DenseMatrix};
use super::scalar::Scalar;

/// Thin singular value decomposition `A = U * diag(sigma) * V^T`.
///
/// `left_vectors` is `rows x k` and `right_vectors` is `cols x k` with
/// `k = min(rows, cols)`; singular values are sorted nonincreasing.
#[derive(Clone, Debug)]
pub struct SvdResult<S> {
    pub left_vectors: DenseMatrix<S>,
    pub singular_values: Vec<S>,
    pub right_vectors: DenseMatrix<S>,
}

const MAX_SWEEPS: usize = 60;

/// One-sided Jacobi SVD. Deterministic cyclic-by-row pair ordering.
pub fn svd<S: Scalar>(a: &DenseMatrix<S>) -> Result<SvdResult<S>> {
    if !a.is_finite() {
        return Err(Error::NonFinite { context: "svd input" });
    }
    if a.rows() >= a.cols() {
        svd_tall(a)
    } else {
        let r = svd_tall(&a.transpose())?;
        Ok(SvdResult {
            left_vectors: r.right_vectors,
            singular_values: r.singular_values,
            right_vectors: r.left_vectors,
        })
    }
}

fn svd_tall<S: Scalar>(a: &DenseMatrix<S>) -> Result<SvdResult<S>> {
    let m = a.rows();
    let n = a.cols();
    // Work on columns of B; accumulate right rotations in V.
    let mut b: Vec<Vec<S>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<S>> = (0..n)
        .map(|j| {
            let mut e = vec![S::zero(); n];
            e[j] = S::one();
            e
        })
        .collect();

    let eps = S::epsilon();
    let tol = eps * S::from_f64_c(10.0);
    let mut converged = false;
    for _sweep in 0..MAX_SWEEPS {
        let mut off = S::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                let (bp, bq) = pair_mut(&mut b, p, q);
                let app = dot(bp, bp);
                let aqq = dot(bq, bq);
                let apq = dot(bp, bq);
                let denom = (app * aqq).sqrt();
                if denom == S::zero() || apq.abs() <= tol * denom {
                    continue;
                }
                off = off.max(apq.abs() / denom);
                // Rutishauser rotation annihilating the (p,q) Gram entry.
                let zeta = (aqq - app) / (S::from_f64_c(2.0) * apq);
                let t = if zeta >= S::zero() {
                    S::one() / (zeta + (S::one() + zeta * zeta).sqrt())
                } else {
                    -S::one() / (-zeta + (S::one() + zeta * zeta).sqrt())
                };
                let c = S::one() / (S::one() + t * t).sqrt();
                let s = c * t;
                rotate(bp, bq, c, s);
                let (vp, vq) = pair_mut(&mut v, p, q);
                rotate(vp, vq, c, s);
            }
        }
        if off <= tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::SvdNonConvergence { sweeps: MAX_SWEEPS });
    }

    // Norms become singular values; order nonincreasing.
    let mut order: Vec<usize> = (0..n).collect();
    let sigmas: Vec<S> = b.iter().map(|col| norm2(col)).collect();
    order.sort_by(|&i, &j| sigmas[j].partial_cmp(&sigmas[i]).unwrap());

    let mut u = DenseMatrix::zeros(m, n);
    let mut vt = DenseMatrix::zeros(n, n);
    let mut sv = Vec::with_capacity(n);
    let scale = sigmas.iter().fold(S::zero(), |a, &x| a.max(x));
    let rank_tol = scale * S::epsilon() * S::from_usize(m.max(n)).unwrap();
    let mut filled = Vec::new();
    for (k, &j) in order.iter().enumerate() {
        let sj = sigmas[j];
        sv.push(sj);
        if sj > rank_tol {
            for i in 0..m {
                u[(i, k)] = b[j][i] / sj;
            }
            filled.push(k);
        }
        for i in 0..n {
            vt[(i, k)] = v[j][i];
        }
    }
    // Orthonormal completion for numerically zero singular directions.
    complete_basis(&mut u, &filled);
    Ok(SvdResult {
        left_vectors: u,
        singular_values: sv,
        right_vectors: vt,
    })
}

fn pair_mut<T>(v: &mut [Vec<T>], p: usize, q: usize) -> (&mut Vec<T>, &mut Vec<T>) {
    assert!(p < q);
    let (lo, hi) = v.split_at_mut(q);
    (&mut lo[p], &mut hi[0])
}

fn rotate<S: Scalar>(x: &mut [S], y: &mut [S], c: S, s: S) {
    for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
        let t = c * *xi - s * *yi;
        *yi = s * *xi + c * *yi;
        *xi = t;
    }
}

/// Fills unset columns (not in `filled`) with unit vectors orthogonalized
/// against every already-present column.
fn complete_basis<S: Scalar>(u: &mut DenseMatrix<S>, filled: &[usize]) {
    let m = u.rows();
    let n = u.cols();
    if filled.len() == n {
        return;
    }
    let mut have: Vec<usize> = filled.to_vec();
    let mut next_unit = 0usize;
    for k in 0..n {
        if have.contains(&k) {
            continue;
        }
        // Try canonical unit vectors until one survives Gram-Schmidt.
        'outer: while next_unit < m {
            let mut cand = vec![S::zero(); m];
            cand[next_unit] = S::one();
            next_unit += 1;
            for _ in 0..2 {
                for &j in &have {
                    let proj = (0..m)
                        .map(|i| u[(i, j)] * cand[i])
                        .sum::<S>();
                    for i in 0..m {
                        cand[i] = cand[i] - proj * u[(i, j)];
                    }
                }
            }
            let nrm = norm2(&cand);
            if nrm > S::from_f64_c(0.5) {
                for i in 0..m {
                    u[(i, k)] = cand[i] / nrm;
                }
                have.push(k);
                break 'outer;
            }
        }
    }
}

/// Moore-Penrose pseudoinverse via the SVD.
///
/// `rank_tol = None` uses `max(rows, cols) * sigma_max * eps`.
pub fn pseudo_inverse<S: Scalar>(
    a: &DenseMatrix<S>,
    rank_tol: Option<S>,
) -> Result<DenseMatrix<S>> {
    let r = svd(a)?;
    let sigma_max = r.singular_values.first().copied().unwrap_or(S::zero());
    let tol = rank_tol.unwrap_or_else(|| {
        S::from_usize(a.rows().max(a.cols())).unwrap() * sigma_max * S::epsilon()
    });
    let k = r.singular_values.len();
    // A+ = V * diag(1/sigma) * U^T
    let mut scaled_vt = DenseMatrix::zeros(k, a.rows());
    for j in 0..k {
        let s = r.singular_values[j];
        if s > tol && s > S::zero() {
            let inv = S::one() / s;
            for i in 0..a.rows() {
                scaled_vt[(j, i)] = r.left_vectors[(i, j)] * inv;
            }
        }
    }
    Ok(r.right_vectors.matmul(&scaled_vt))
}
