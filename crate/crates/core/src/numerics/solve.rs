use crate::error::{Error, Result};

use super::matrix::DenseMatrix;
use super::scalar::Scalar;

/// Solves `A x = b` for square `A` by LU with partial pivoting.
pub fn solve_dense<S: Scalar>(a: &DenseMatrix<S>, b: &[S]) -> Result<Vec<S>> {
    assert_eq!(a.rows(), a.cols(), "solve_dense requires a square matrix");
    assert_eq!(a.rows(), b.len());
    let n = a.rows();
    let mut lu = a.clone();
    let mut x: Vec<S> = b.to_vec();
    let scale = a
        .data()
        .iter()
        .fold(S::zero(), |m, &v| m.max(v.abs()))
        .max(S::one());
    let tiny = scale * S::epsilon() * S::from_usize(n).unwrap();

    for k in 0..n {
        let mut p = k;
        for i in (k + 1)..n {
            if lu[(i, k)].abs() > lu[(p, k)].abs() {
                p = i;
            }
        }
        let pivmag = lu[(p, k)].abs();
        if pivmag <= tiny {
            return Err(Error::SingularMatrix {
                pivot: pivmag.to_f64().unwrap_or(0.0),
            });
        }
        if p != k {
            for j in 0..n {
                let t = lu[(k, j)];
                lu[(k, j)] = lu[(p, j)];
                lu[(p, j)] = t;
            }
            x.swap(k, p);
        }
        let piv = lu[(k, k)];
        for i in (k + 1)..n {
            let factor = lu[(i, k)] / piv;
            if factor == S::zero() {
                continue;
            }
            lu[(i, k)] = factor;
            for j in (k + 1)..n {
                lu[(i, j)] = lu[(i, j)] - factor * lu[(k, j)];
            }
            x[i] = x[i] - factor * x[k];
        }
    }
    // Back substitution.
    for k in (0..n).rev() {
        for j in (k + 1)..n {
            x[k] = x[k] - lu[(k, j)] * x[j];
        }
        x[k] = x[k] / lu[(k, k)];
    }
    Ok(x)
}

/// Solves a tridiagonal system by LU with partial pivoting.
///
/// `lower`, `diag`, `upper` are the sub-, main, and super-diagonals with
/// lengths `n-1`, `n`, `n-1`. Pivoting introduces a second superdiagonal,
/// handled internally.
pub fn solve_tridiagonal<S: Scalar>(
    lower: &[S],
    diag: &[S],
    upper: &[S],
    b: &[S],
) -> Result<Vec<S>> {
    let n = diag.len();
    assert_eq!(lower.len(), n.saturating_sub(1));
    assert_eq!(upper.len(), n.saturating_sub(1));
    assert_eq!(b.len(), n);
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut d: Vec<S> = diag.to_vec();
    let mut u1: Vec<S> = upper.to_vec();
    u1.push(S::zero());
    let mut u2 = vec![S::zero(); n];
    let mut l: Vec<S> = lower.to_vec();
    l.push(S::zero());
    let mut x: Vec<S> = b.to_vec();

    let scale = d
        .iter()
        .chain(u1.iter())
        .chain(l.iter())
        .fold(S::zero(), |m, &v| m.max(v.abs()))
        .max(S::one());
    let tiny = scale * S::epsilon() * S::from_usize(n).unwrap();

    for k in 0..n - 1 {
        if l[k].abs() > d[k].abs() {
            // Swap row k and k+1.
            let (a0, a1, a2) = (d[k], u1[k], u2[k]);
            d[k] = l[k];
            u1[k] = d[k + 1];
            u2[k] = u1[k + 1];
            l[k] = a0;
            d[k + 1] = a1;
            u1[k + 1] = a2;
            x.swap(k, k + 1);
        }
        if d[k].abs() <= tiny {
            return Err(Error::SingularMatrix {
                pivot: d[k].abs().to_f64().unwrap_or(0.0),
            });
        }
        let factor = l[k] / d[k];
        d[k + 1] = d[k + 1] - factor * u1[k];
        u1[k + 1] = u1[k + 1] - factor * u2[k];
        x[k + 1] = x[k + 1] - factor * x[k];
    }
    if d[n - 1].abs() <= tiny {
        return Err(Error::SingularMatrix {
            pivot: d[n - 1].abs().to_f64().unwrap_or(0.0),
        });
    }
    // Back substitution with bandwidth 2.
    x[n - 1] = x[n - 1] / d[n - 1];
    if n >= 2 {
        x[n - 2] = (x[n - 2] - u1[n - 2] * x[n - 1]) / d[n - 2];
    }
    for k in (0..n.saturating_sub(2)).rev() {
        x[k] = (x[k] - u1[k] * x[k + 1] - u2[k] * x[k + 2]) / d[k];
    }
    Ok(x)
}
