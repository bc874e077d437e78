//! Proper orthogonal decomposition of snapshot sets.
//!
//! The POD of a snapshot matrix `S = [u^1 ... u^M]` is its thin SVD; the
//! left singular vectors give an orthonormal basis ordered by captured
//! statistical energy. Used both for the ROM trial basis (raw snapshots)
//! and, with mean subtraction performed by the caller, for residual PCA
//! in the features module.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::matrix::DenseMatrix;
use crate::numerics::svd;
use crate::numerics::Scalar;

/// Orthonormal basis with singular values and cumulative energy
/// fractions `eta_i = sum_{k<=i} sigma_k^2 / sum_k sigma_k^2`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PodBasis<S> {
    pub basis: DenseMatrix<S>,
    pub singular_values: Vec<S>,
    pub energies: Vec<S>,
}

impl<S: Scalar> PodBasis<S> {
    /// Number of basis vectors retained.
    pub fn len(&self) -> usize {
        self.basis.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Smallest dimension capturing at least the requested energy
    /// fraction.
    pub fn dimension_for_energy(&self, fraction: S) -> usize {
        for (i, &eta) in self.energies.iter().enumerate() {
            if eta >= fraction {
                return i + 1;
            }
        }
        self.len()
    }

    /// The first `m` basis vectors as an N x m matrix.
    pub fn truncated(&self, m: usize) -> DenseMatrix<S> {
        assert!(m <= self.len());
        self.basis.truncate_cols(m)
    }
}

/// Computes the POD of a snapshot set (snapshots are columns).
///
/// Retains `min(N, M)` modes; trailing zero singular values keep
/// orthonormal (arbitrary) basis directions from the SVD completion.
pub fn compute_pod<S: Scalar>(snapshots: &[Vec<S>]) -> Result<PodBasis<S>> {
    if snapshots.is_empty() {
        return Err(Error::DegenerateSnapshots(
            "POD requires at least one snapshot".into(),
        ));
    }
    let n = snapshots[0].len();
    if n == 0 || snapshots.iter().any(|s| s.len() != n) {
        return Err(Error::DegenerateSnapshots(
            "snapshots must be nonempty and of equal length".into(),
        ));
    }
    let matrix = DenseMatrix::from_columns(snapshots);
    let decomposition = svd(&matrix)?;
    let total: S = decomposition
        .singular_values
        .iter()
        .map(|&s| s * s)
        .sum();
    if total <= S::zero() {
        return Err(Error::DegenerateSnapshots(
            "all-zero snapshot matrix has no energy to normalize".into(),
        ));
    }
    let mut energies = Vec::with_capacity(decomposition.singular_values.len());
    let mut running = S::zero();
    for &s in &decomposition.singular_values {
        running += s * s;
        energies.push(running / total);
    }
    Ok(PodBasis {
        basis: decomposition.left_vectors,
        singular_values: decomposition.singular_values,
        energies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn orthonormality_defect(m: &DenseMatrix<f64>) -> f64 {
        let g = m.transpose().matmul(m);
        g.sub(&DenseMatrix::identity(m.cols())).frobenius_norm()
    }

    /// Jacobi eigendecomposition of a small symmetric matrix; serves as
    /// an independent method-of-snapshots oracle.
    fn symmetric_eigenvalues(a: &DenseMatrix<f64>) -> Vec<f64> {
        let n = a.rows();
        let mut m = a.clone();
        for _sweep in 0..100 {
            let mut off = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    off += m[(i, j)] * m[(i, j)];
                }
            }
            if off.sqrt() < 1e-14 {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    if m[(p, q)].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * m[(p, q)]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
                        m[(k, p)] = c * mkp - s * mkq;
                        m[(k, q)] = s * mkp + c * mkq;
                    }
                    for k in 0..n {
                        let (mpk, mqk) = (m[(p, k)], m[(q, k)]);
                        m[(p, k)] = c * mpk - s * mqk;
                        m[(q, k)] = s * mpk + c * mqk;
                    }
                }
            }
        }
        let mut eig: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
        eig.sort_by(|a, b| b.partial_cmp(a).unwrap());
        eig
    }

    fn lcg(state: &mut u64) -> f64 {
        *state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((*state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    }

    #[test]
    fn single_snapshot() {
        let u: Vec<f64> = vec![3.0, 0.0, 4.0];
        let pod = compute_pod(&[u.clone()]).unwrap();
        assert_eq!(pod.len(), 1);
        assert!((pod.singular_values[0] - 5.0).abs() < 1e-12);
        assert!((pod.energies[0] - 1.0).abs() < 1e-14);
        for i in 0..3 {
            assert!((pod.basis[(i, 0)].abs() - u[i].abs() / 5.0).abs() < 1e-12);
        }
    }

    #[test]
    fn two_orthogonal_snapshots_energy_split() {
        // Norms 2 and 1 -> sigma = (2, 1), eta = (0.8, 1.0).
        let s1: Vec<f64> = vec![2.0, 0.0, 0.0];
        let s2: Vec<f64> = vec![0.0, 1.0, 0.0];
        let pod = compute_pod(&[s1, s2]).unwrap();
        assert!((pod.singular_values[0] - 2.0).abs() < 1e-12);
        assert!((pod.singular_values[1] - 1.0).abs() < 1e-12);
        assert!((pod.energies[0] - 0.8).abs() < 1e-12);
        assert!((pod.energies[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn all_zero_snapshots_rejected() {
        match compute_pod::<f64>(&[vec![0.0; 4], vec![0.0; 4]]) {
            Err(Error::DegenerateSnapshots(_)) => {}
            other => panic!("expected degenerate-snapshot error, got {other:?}"),
        }
    }

    #[test]
    fn energies_match_gram_eigendecomposition() {
        // Method-of-snapshots oracle: eigenvalues of S^T S are the
        // squared singular values.
        let mut state = 2024u64;
        let snapshots: Vec<Vec<f64>> = (0..8)
            .map(|_| (0..50).map(|_| lcg(&mut state)).collect())
            .collect();
        let pod = compute_pod(&snapshots).unwrap();
        let s = DenseMatrix::from_columns(&snapshots);
        let gram = s.transpose().matmul(&s);
        let eig = symmetric_eigenvalues(&gram);
        let total: f64 = eig.iter().sum();
        let mut running = 0.0;
        for (i, &lambda) in eig.iter().enumerate() {
            running += lambda;
            assert!((pod.energies[i] - running / total).abs() < 1e-8, "mode {i}");
            assert!(
                (pod.singular_values[i] - lambda.max(0.0).sqrt()).abs() < 1e-8,
                "sigma {i}"
            );
        }
    }

    #[test]
    fn basis_orthonormal_and_energies_monotone() {
        let mut state = 7u64;
        let snapshots: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..30).map(|_| lcg(&mut state)).collect())
            .collect();
        let pod = compute_pod(&snapshots).unwrap();
        assert!(orthonormality_defect(&pod.basis) < 1e-10);
        for w in pod.energies.windows(2) {
            assert!(w[1] >= w[0]);
        }
        assert!((pod.energies.last().unwrap() - 1.0).abs() < 1e-12);
        for w in pod.singular_values.windows(2) {
            assert!(w[1] <= w[0] + 1e-14);
        }
    }

    #[test]
    fn rank_m_reconstruction_error_matches_tail_energy() {
        let mut state = 99u64;
        let snapshots: Vec<Vec<f64>> = (0..6)
            .map(|_| (0..20).map(|_| lcg(&mut state)).collect())
            .collect();
        let pod = compute_pod(&snapshots).unwrap();
        let s = DenseMatrix::from_columns(&snapshots);
        for m in 0..=pod.len() {
            let phi = pod.truncated(m);
            let projected = phi.matmul(&phi.transpose().matmul(&s));
            let err = s.sub(&projected).frobenius_norm();
            let tail: f64 = pod.singular_values[m..].iter().map(|&x| x * x).sum();
            assert!((err - tail.sqrt()).abs() < 1e-8, "m = {m}");
        }
    }

    #[test]
    fn dimension_for_energy_selects_smallest() {
        let s1: Vec<f64> = vec![2.0, 0.0, 0.0];
        let s2: Vec<f64> = vec![0.0, 1.0, 0.0];
        let pod = compute_pod(&[s1, s2]).unwrap();
        assert_eq!(pod.dimension_for_energy(0.5), 1);
        assert_eq!(pod.dimension_for_energy(0.8), 1);
        assert_eq!(pod.dimension_for_energy(0.81), 2);
        assert_eq!(pod.dimension_for_energy(1.0), 2);
    }
}
