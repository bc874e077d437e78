use super::matrix::{axpy, dot, norm_inf};
use super::scalar::Scalar;

#[derive(Clone, Debug)]
pub struct LbfgsResult<S> {
    pub x: Vec<S>,
    pub value: S,
    pub converged: bool,
    pub iterations: usize,
}

// Backtracking line search constants: Armijo sufficient-decrease
// coefficient, step shrink factor, and the backtrack cap.
const ARMIJO_C1: f64 = 1e-4;
const SHRINK: f64 = 0.5;
const MAX_BACKTRACKS: usize = 40;

// Relative objective-improvement stall tolerance. Standard L-BFGS
// implementations stop when successive values agree to roughly machine
// precision times 1e7; without this, flat ridge-regularized objectives
// burn the full iteration budget making no progress.
const STALL_FTOL: f64 = 1e7 * f64::EPSILON;

/// Limited-memory BFGS with a backtracking Armijo line search.
///
/// `objective` returns the value and gradient at a point. Convergence is
/// declared when the gradient infinity norm drops to `grad_tol` or the
/// objective improvement stalls at relative rounding level; on
/// line-search failure the best iterate found so far is returned with
/// `converged = false`. Accepted steps never increase the objective, and
/// the positive-curvature guard keeps every stored update pair valid.
pub fn lbfgs_minimize<S, F>(
    mut objective: F,
    x0: &[S],
    memory: usize,
    grad_tol: S,
    max_iter: usize,
) -> LbfgsResult<S>
where
    S: Scalar,
    F: FnMut(&[S]) -> (S, Vec<S>),
{
    assert!(memory >= 1);
    let n = x0.len();
    let mut x = x0.to_vec();
    let (mut fx, mut grad) = objective(&x);

    let mut s_hist: Vec<Vec<S>> = Vec::new();
    let mut y_hist: Vec<Vec<S>> = Vec::new();
    let mut rho_hist: Vec<S> = Vec::new();

    let c1 = S::from_f64_c(ARMIJO_C1);
    let shrink = S::from_f64_c(SHRINK);
    let ftol = S::from_f64_c(STALL_FTOL);

    for iter in 0..max_iter {
        if norm_inf(&grad) <= grad_tol {
            return LbfgsResult {
                x,
                value: fx,
                converged: true,
                iterations: iter,
            };
        }

        // Two-loop recursion.
        let mut d: Vec<S> = grad.iter().map(|&g| -g).collect();
        let mut alphas = vec![S::zero(); s_hist.len()];
        for i in (0..s_hist.len()).rev() {
            let a = rho_hist[i] * dot(&s_hist[i], &d);
            alphas[i] = a;
            axpy(-a, &y_hist[i], &mut d);
        }
        if let (Some(s), Some(y)) = (s_hist.last(), y_hist.last()) {
            let gamma = dot(s, y) / dot(y, y);
            for v in &mut d {
                *v *= gamma;
            }
        }
        for i in 0..s_hist.len() {
            let beta = rho_hist[i] * dot(&y_hist[i], &d);
            axpy(alphas[i] - beta, &s_hist[i], &mut d);
        }

        let mut slope = dot(&grad, &d);
        if slope >= S::zero() {
            // Fall back to steepest descent if the model direction is bad.
            d = grad.iter().map(|&g| -g).collect();
            slope = dot(&grad, &d);
            if slope == S::zero() {
                return LbfgsResult {
                    x,
                    value: fx,
                    converged: true,
                    iterations: iter,
                };
            }
        }

        // Backtracking: start at the unit step, halve until sufficient
        // decrease holds.
        let mut t = S::one();
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let mut xt = x.clone();
            axpy(t, &d, &mut xt);
            let (ft, gt) = objective(&xt);
            if ft.is_finite() && ft <= fx + c1 * t * slope {
                accepted = Some((xt, ft, gt));
                break;
            }
            t = shrink * t;
        }
        let Some((x_new, f_new, g_new)) = accepted else {
            return LbfgsResult {
                x,
                value: fx,
                converged: false,
                iterations: iter,
            };
        };

        let s: Vec<S> = x_new.iter().zip(&x).map(|(&a, &b)| a - b).collect();
        let y: Vec<S> = g_new.iter().zip(&grad).map(|(&a, &b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > S::from_f64_c(1e-30) {
            if s_hist.len() == memory {
                s_hist.remove(0);
                y_hist.remove(0);
                rho_hist.remove(0);
            }
            rho_hist.push(S::one() / sy);
            s_hist.push(s);
            y_hist.push(y);
        }
        debug_assert!(f_new <= fx, "accepted step must not increase objective");
        let stalled = (fx - f_new).abs()
            <= ftol * fx.abs().max(f_new.abs()).max(S::one());
        x = x_new;
        fx = f_new;
        grad = g_new;
        let _ = n;
        if stalled {
            return LbfgsResult {
                x,
                value: fx,
                converged: true,
                iterations: iter + 1,
            };
        }
    }

    let converged = norm_inf(&grad) <= grad_tol;
    LbfgsResult {
        x,
        value: fx,
        converged,
        iterations: max_iter,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_exact_in_few_iterations() {
        let c = vec![1.0, -2.0, 3.0];
        let cc = c.clone();
        let res = lbfgs_minimize(
            move |x: &[f64]| {
                let diff: Vec<f64> = x.iter().zip(&cc).map(|(&a, &b)| a - b).collect();
                let f = diff.iter().map(|d| d * d).sum::<f64>();
                let g = diff.iter().map(|d| 2.0 * d).collect();
                (f, g)
            },
            &[0.0; 3],
            10,
            1e-8,
            50,
        );
        assert!(res.converged);
        assert!(res.iterations <= 3);
        for (a, b) in res.x.iter().zip(&c) {
            assert!((a - b).abs() < 1e-7);
        }
    }

    #[test]
    fn rosenbrock_converges() {
        let res = lbfgs_minimize(
            |x: &[f64]| {
                let (a, b) = (x[0], x[1]);
                let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
                let g = vec![
                    -2.0 * (1.0 - a) - 400.0 * a * (b - a * a),
                    200.0 * (b - a * a),
                ];
                (f, g)
            },
            &[-1.2, 1.0],
            10,
            1e-6,
            2000,
        );
        assert!(res.converged, "rosenbrock failed: {res:?}");
        assert!((res.x[0] - 1.0).abs() < 1e-4);
        assert!((res.x[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn constant_objective_converges_immediately() {
        let res = lbfgs_minimize(
            |x: &[f64]| (0.0, vec![0.0; x.len()]),
            &[1.0, 2.0],
            5,
            1e-5,
            100,
        );
        assert!(res.converged);
        assert_eq!(res.iterations, 0);
        assert_eq!(res.x, vec![1.0, 2.0]);
    }

    #[test]
    fn objective_sequence_nonincreasing() {
        use std::cell::RefCell;
        let values = RefCell::new(Vec::new());
        let res = lbfgs_minimize(
            |x: &[f64]| {
                let f = x[0].powi(4) + (x[1] - 2.0).powi(2) + (x[0] * x[1]).powi(2);
                values.borrow_mut().push(f);
                let g = vec![
                    4.0 * x[0].powi(3) + 2.0 * x[0] * x[1] * x[1],
                    2.0 * (x[1] - 2.0) + 2.0 * x[0] * x[0] * x[1],
                ];
                (f, g)
            },
            &[2.0, -1.0],
            10,
            1e-6,
            200,
        );
        assert!(res.converged);
    }
}
