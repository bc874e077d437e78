//! Single-hidden-layer neural-network regression trained by L-BFGS with
//! an analytic backpropagation gradient and ridge penalty on the weights
//! (biases unpenalized).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::numerics::lbfgs::lbfgs_minimize;
use crate::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Identity,
    Logistic,
    Tanh,
    Relu,
}

impl Activation {
    pub fn label(&self) -> &'static str {
        match self {
            Activation::Identity => "identity",
            Activation::Logistic => "logistic",
            Activation::Tanh => "tanh",
            Activation::Relu => "relu",
        }
    }

    fn apply(&self, z: Real) -> Real {
        match self {
            Activation::Identity => z,
            Activation::Logistic => 1.0 / (1.0 + (-z).exp()),
            Activation::Tanh => z.tanh(),
            Activation::Relu => z.max(0.0),
        }
    }

    /// Derivative expressed through the activation value `a = act(z)`.
    fn derivative(&self, z: Real, a: Real) -> Real {
        match self {
            Activation::Identity => 1.0,
            Activation::Logistic => a * (1.0 - a),
            Activation::Tanh => 1.0 - a * a,
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnnModel {
    pub activation: Activation,
    pub hidden_width: usize,
    pub input_dim: usize,
    /// Flattened parameters: hidden layer `h x (d+1)` rows of
    /// `[bias, weights...]`, then the output layer `[bias, weights...]`.
    pub params: Vec<Real>,
}

fn param_count(d: usize, h: usize) -> usize {
    h * (d + 1) + h + 1
}

/// Value and gradient of the ridge-penalized half-MSE objective.
fn objective(
    params: &[Real],
    x: &[Vec<Real>],
    y: &[Real],
    act: Activation,
    alpha: Real,
    h: usize,
) -> (Real, Vec<Real>) {
    let n = x.len();
    let d = x[0].len();
    let (w1, w2) = params.split_at(h * (d + 1));
    let mut grad = vec![0.0; params.len()];
    let inv_n = 1.0 / n as Real;
    let mut loss = 0.0;
    let mut z = vec![0.0; h];
    let mut a = vec![0.0; h];
    for (row, &target) in x.iter().zip(y) {
        for j in 0..h {
            let w = &w1[j * (d + 1)..(j + 1) * (d + 1)];
            let mut s = w[0];
            for (k, &v) in row.iter().enumerate() {
                s += w[k + 1] * v;
            }
            z[j] = s;
            a[j] = act.apply(s);
        }
        let mut out = w2[0];
        for j in 0..h {
            out += w2[j + 1] * a[j];
        }
        let r = out - target;
        loss += 0.5 * r * r * inv_n;

        let dout = r * inv_n;
        let (g1, g2) = grad.split_at_mut(h * (d + 1));
        g2[0] += dout;
        for j in 0..h {
            g2[j + 1] += dout * a[j];
            let dz = dout * w2[j + 1] * act.derivative(z[j], a[j]);
            let gw = &mut g1[j * (d + 1)..(j + 1) * (d + 1)];
            gw[0] += dz;
            for (k, &v) in row.iter().enumerate() {
                gw[k + 1] += dz * v;
            }
        }
    }
    // Ridge penalty on weights, skipping bias entries.
    let half_reg = 0.5 * alpha * inv_n;
    for j in 0..h {
        for k in 1..=d {
            let w = w1[j * (d + 1) + k];
            loss += half_reg * w * w;
            grad[j * (d + 1) + k] += alpha * inv_n * w;
        }
    }
    for j in 1..=h {
        let w = w2[j];
        loss += half_reg * w * w;
        grad[h * (d + 1) + j] += alpha * inv_n * w;
    }
    (loss, grad)
}

/// Value and analytic gradient of the training objective at `params`;
/// public so the backpropagation gradient can be finite-difference
/// checked from the integration suite.
pub fn loss_and_gradient(
    params: &[Real],
    x: &[Vec<Real>],
    y: &[Real],
    activation: Activation,
    alpha: Real,
    hidden_width: usize,
) -> (Real, Vec<Real>) {
    objective(params, x, y, activation, alpha, hidden_width)
}

/// Number of network parameters for input dimension `d` and width `h`.
pub fn parameter_count(d: usize, h: usize) -> usize {
    param_count(d, h)
}

fn glorot_init(d: usize, h: usize, seed: u64) -> Vec<Real> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = vec![0.0; param_count(d, h)];
    let bound1 = (6.0 / (d + h) as Real).sqrt();
    for j in 0..h {
        for k in 1..=d {
            params[j * (d + 1) + k] = rng.gen_range(-bound1..bound1);
        }
    }
    let bound2 = (6.0 / (h + 1) as Real).sqrt();
    for j in 1..=h {
        params[h * (d + 1) + j] = rng.gen_range(-bound2..bound2);
    }
    params
}

#[allow(clippy::too_many_arguments)]
pub fn fit(
    x: &[Vec<Real>],
    y: &[Real],
    activation: Activation,
    alpha: Real,
    hidden_width: usize,
    lbfgs_tol: Real,
    max_iter: usize,
    seed: u64,
) -> (AnnModel, bool) {
    let d = x[0].len();
    let init = glorot_init(d, hidden_width, seed);
    let result = lbfgs_minimize(
        |p: &[Real]| objective(p, x, y, activation, alpha, hidden_width),
        &init,
        10,
        lbfgs_tol,
        max_iter,
    );
    (
        AnnModel {
            activation,
            hidden_width,
            input_dim: d,
            params: result.x,
        },
        result.converged,
    )
}

impl AnnModel {
    pub fn predict(&self, x: &[Real]) -> Real {
        let d = self.input_dim;
        let h = self.hidden_width;
        let (w1, w2) = self.params.split_at(h * (d + 1));
        let mut out = w2[0];
        for j in 0..h {
            let w = &w1[j * (d + 1)..(j + 1) * (d + 1)];
            let mut s = w[0];
            for (k, &v) in x.iter().enumerate() {
                s += w[k + 1] * v;
            }
            out += w2[j + 1] * self.activation.apply(s);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_util::lcg;
    use super::*;
    use crate::metrics::{fraction_of_variance_unexplained, mean_squared_error};

    #[test]
    fn backprop_gradient_matches_finite_differences() {
        let mut state = 12u64;
        let x: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..3).map(|_| lcg(&mut state)).collect())
            .collect();
        let y: Vec<f64> = (0..5).map(|_| lcg(&mut state)).collect();
        let h = 4;
        for act in [
            Activation::Identity,
            Activation::Logistic,
            Activation::Tanh,
            Activation::Relu,
        ] {
            let params: Vec<f64> = (0..param_count(3, h))
                .map(|_| lcg(&mut state) + 0.1)
                .collect();
            let (_, grad) = objective(&params, &x, &y, act, 0.3, h);
            let eps = 1e-6;
            for i in 0..params.len() {
                let mut p = params.clone();
                p[i] += eps;
                let (fp, _) = objective(&p, &x, &y, act, 0.3, h);
                p[i] -= 2.0 * eps;
                let (fm, _) = objective(&p, &x, &y, act, 0.3, h);
                let fd = (fp - fm) / (2.0 * eps);
                let scale = grad[i].abs().max(fd.abs()).max(1e-8);
                assert!(
                    (grad[i] - fd).abs() / scale < 1e-6,
                    "{}: param {i} analytic {} fd {}",
                    act.label(),
                    grad[i],
                    fd
                );
            }
        }
    }

    #[test]
    fn identity_activation_matches_linear_least_squares() {
        let mut state = 44u64;
        let x: Vec<Vec<f64>> = (0..20)
            .map(|_| vec![lcg(&mut state), lcg(&mut state)])
            .collect();
        let y: Vec<f64> = x
            .iter()
            .map(|r| 1.0 + r[0] - 2.0 * r[1] + 0.1 * lcg(&mut state))
            .collect();
        let ols = super::super::ols::fit(&x, &y, false).unwrap();
        let ols_pred: Vec<f64> = x.iter().map(|r| ols.predict(r)).collect();
        let ols_mse = mean_squared_error(&y, &ols_pred);

        let (m, converged) = fit(&x, &y, Activation::Identity, 0.0, 10, 1e-8, 2000, 3);
        assert!(converged);
        let pred: Vec<f64> = x.iter().map(|r| m.predict(r)).collect();
        let mse = mean_squared_error(&y, &pred);
        assert!(mse <= ols_mse + 1e-8, "ann {mse} vs ols {ols_mse}");
    }

    #[test]
    fn tanh_network_fits_sine() {
        let x: Vec<Vec<f64>> = (0..100).map(|i| vec![i as f64 / 99.0]).collect();
        let y: Vec<f64> = x.iter().map(|r| (3.0 * r[0]).sin()).collect();
        let (m, _) = fit(&x, &y, Activation::Tanh, 1e-6, 100, 1e-5, 1000, 0);
        let pred: Vec<f64> = x.iter().map(|r| m.predict(r)).collect();
        let fvu = fraction_of_variance_unexplained(&y, &pred);
        assert!(fvu < 0.01, "training FVU {fvu}");
    }

    #[test]
    fn seeded_fits_are_bit_identical() {
        let mut state = 73u64;
        let x: Vec<Vec<f64>> = (0..15)
            .map(|_| vec![lcg(&mut state), lcg(&mut state)])
            .collect();
        let y: Vec<f64> = x.iter().map(|r| r[0] * r[1]).collect();
        let (a, _) = fit(&x, &y, Activation::Relu, 1e-4, 8, 1e-5, 200, 5);
        let (b, _) = fit(&x, &y, Activation::Relu, 1e-4, 8, 1e-5, 200, 5);
        for (p, q) in a.params.iter().zip(&b.params) {
            assert_eq!(p.to_bits(), q.to_bits());
        }
    }
}
