//! Epsilon-insensitive support vector regression solved in the dual by
//! sequential minimal optimization.
//!
//! The dual in `beta_i = alpha_i - alpha_i*` maximizes
//! `y^T beta - eps*||beta||_1 - 1/2 beta^T K beta` subject to
//! `sum(beta) = 0` and `|beta_i| <= C`. Each step picks the pair of box
//! variables with the largest Karush-Kuhn-Tucker violation and solves the
//! two-variable subproblem analytically; the equality constraint is
//! preserved exactly by construction. Iteration stops when the violation
//! (the gap between the tightest lower and upper admissible bias values)
//! drops to `KKT_TOL`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Real;

pub const KKT_TOL: Real = 1e-6;
/// Cap on working-set updates, scaled by the training size below.
const MAX_UPDATES_BASE: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Kernel {
    Linear,
    Rbf { gamma: Real },
}

impl Kernel {
    fn eval(&self, a: &[Real], b: &[Real]) -> Real {
        match *self {
            Kernel::Linear => a.iter().zip(b).map(|(&x, &y)| x * y).sum(),
            Kernel::Rbf { gamma } => {
                let d2: Real = a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum();
                (-gamma * d2).exp()
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SvrModel {
    pub kernel: Kernel,
    /// Training rows with nonzero dual coefficient.
    pub support_vectors: Vec<Vec<Real>>,
    /// Dual coefficients `beta_i` for each support vector.
    pub coefficients: Vec<Real>,
    pub bias: Real,
    /// Final working-set violation (diagnostic; <= KKT_TOL on success).
    pub kkt_violation: Real,
}

/// One dual box variable: the positive (`alpha`) or negative (`alpha*`)
/// part of `beta_i`.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Plus,
    Minus,
}

pub fn fit(x: &[Vec<Real>], y: &[Real], kernel: Kernel, c: Real, epsilon: Real) -> Result<SvrModel> {
    let n = x.len();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = kernel.eval(&x[i], &x[j]);
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }

    // alpha = positive part, astar = negative part of beta; kb = K beta.
    let mut alpha = vec![0.0; n];
    let mut astar = vec![0.0; n];
    let mut kb = vec![0.0; n];

    // Admissible-bias bound contributed by one box variable, and whether
    // it bounds the bias from below and/or above given the variable's
    // position in its box.
    let g_plus = |kb: &[Real], i: usize| y[i] - kb[i] - epsilon;
    let g_minus = |kb: &[Real], i: usize| y[i] - kb[i] + epsilon;

    let max_updates = MAX_UPDATES_BASE.max(500 * n);
    let mut violation = Real::INFINITY;
    let mut updates = 0usize;
    while updates < max_updates {
        // Working-set selection: the bias must satisfy b >= g for every
        // variable free to increase its beta contribution and b <= g for
        // every variable free to decrease it.
        let mut b_low = Real::NEG_INFINITY;
        let mut b_up = Real::INFINITY;
        let mut i_low = None;
        let mut i_up = None;
        for i in 0..n {
            if alpha[i] < c {
                let g = g_plus(&kb, i);
                if g > b_low {
                    b_low = g;
                    i_low = Some((i, Side::Plus));
                }
            }
            if astar[i] > 0.0 {
                let g = g_minus(&kb, i);
                if g > b_low {
                    b_low = g;
                    i_low = Some((i, Side::Minus));
                }
            }
            if alpha[i] > 0.0 {
                let g = g_plus(&kb, i);
                if g < b_up {
                    b_up = g;
                    i_up = Some((i, Side::Plus));
                }
            }
            if astar[i] < c {
                let g = g_minus(&kb, i);
                if g < b_up {
                    b_up = g;
                    i_up = Some((i, Side::Minus));
                }
            }
        }
        violation = b_low - b_up;
        if violation <= KKT_TOL {
            break;
        }
        let (i, i_side) = i_low.expect("violating pair exists");
        let (j, j_side) = i_up.expect("violating pair exists");

        // Step t moves beta_i up and beta_j down by the same amount.
        let eta = (k[i * n + i] + k[j * n + j] - 2.0 * k[i * n + j]).max(1e-12);
        let mut t = violation / eta;
        let room_i = match i_side {
            Side::Plus => c - alpha[i],
            Side::Minus => astar[i],
        };
        let room_j = match j_side {
            Side::Plus => alpha[j],
            Side::Minus => c - astar[j],
        };
        t = t.min(room_i).min(room_j);
        if t <= 0.0 {
            break;
        }
        match i_side {
            Side::Plus => alpha[i] += t,
            Side::Minus => astar[i] -= t,
        }
        match j_side {
            Side::Plus => alpha[j] -= t,
            Side::Minus => astar[j] += t,
        }
        for a in 0..n {
            kb[a] += t * (k[a * n + i] - k[a * n + j]);
        }
        updates += 1;
    }
    if violation > KKT_TOL {
        return Err(Error::SvrNonConvergence { passes: updates });
    }

    // Bias: average over margin support vectors, midpoint fallback.
    let mut b_sum = 0.0;
    let mut b_count = 0usize;
    let mut b_low = Real::NEG_INFINITY;
    let mut b_up = Real::INFINITY;
    for i in 0..n {
        if alpha[i] > 0.0 && alpha[i] < c {
            b_sum += g_plus(&kb, i);
            b_count += 1;
        }
        if astar[i] > 0.0 && astar[i] < c {
            b_sum += g_minus(&kb, i);
            b_count += 1;
        }
        if alpha[i] < c {
            b_low = b_low.max(g_plus(&kb, i));
        }
        if astar[i] > 0.0 {
            b_low = b_low.max(g_minus(&kb, i));
        }
        if alpha[i] > 0.0 {
            b_up = b_up.min(g_plus(&kb, i));
        }
        if astar[i] < c {
            b_up = b_up.min(g_minus(&kb, i));
        }
    }
    let bias = if b_count > 0 {
        b_sum / b_count as Real
    } else {
        0.5 * (b_low + b_up)
    };

    let mut support_vectors = Vec::new();
    let mut coefficients = Vec::new();
    for i in 0..n {
        let beta = alpha[i] - astar[i];
        if beta != 0.0 {
            support_vectors.push(x[i].clone());
            coefficients.push(beta);
        }
    }
    Ok(SvrModel {
        kernel,
        support_vectors,
        coefficients,
        bias,
        kkt_violation: violation.max(0.0),
    })
}

impl SvrModel {
    pub fn predict(&self, x: &[Real]) -> Real {
        self.support_vectors
            .iter()
            .zip(&self.coefficients)
            .map(|(sv, &b)| b * self.kernel.eval(sv, x))
            .sum::<Real>()
            + self.bias
    }

    /// Sum of dual coefficients (zero by the equality constraint) and the
    /// largest box-bound breach, for feasibility checks.
    pub fn dual_feasibility(&self, c: Real) -> (Real, Real) {
        let sum: Real = self.coefficients.iter().sum();
        let breach = self
            .coefficients
            .iter()
            .map(|&b| (b.abs() - c).max(0.0))
            .fold(0.0, Real::max);
        (sum, breach)
    }
}
