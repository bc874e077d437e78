//! Regression families with a uniform fit/predict contract: ordinary least
//! squares (linear and quadratic), support vector regression (linear and
//! RBF kernels), random forests, k-nearest neighbors, and a single-hidden-
//! layer neural network.

mod ann;
mod forest;
mod knn;
mod ols;
mod svr;

pub use ann::{
    loss_and_gradient as ann_loss_and_gradient, parameter_count as ann_parameter_count,
    Activation, AnnModel,
};
pub use forest::{ForestModel, SplitRule};
pub use knn::{KnnModel, KnnWeights};
pub use ols::OlsModel;
pub use svr::SvrModel;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Real;

/// Hyperparameter description of one regressor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum RegressionSpec {
    OlsLinear,
    OlsQuadratic,
    SvrLinear {
        c: Real,
        epsilon: Real,
    },
    SvrRbf {
        c: Real,
        epsilon: Real,
        gamma: Real,
    },
    RandomForest {
        n_tree: usize,
        split_rule: SplitRule,
        seed: u64,
        /// Testing switch: disable bootstrap resampling.
        bootstrap: bool,
    },
    Knn {
        k: usize,
        weights: KnnWeights,
        /// Keep only the top-scoring feature columns (univariate F test);
        /// `None` keeps all.
        n_kept_features: Option<usize>,
    },
    Ann {
        activation: Activation,
        alpha: Real,
        hidden_width: usize,
        lbfgs_tol: Real,
        max_iter: usize,
        seed: u64,
    },
}

impl RegressionSpec {
    /// Short identifier used in configs and reports.
    pub fn label(&self) -> String {
        match self {
            RegressionSpec::OlsLinear => "ols-linear".into(),
            RegressionSpec::OlsQuadratic => "ols-quadratic".into(),
            RegressionSpec::SvrLinear { c, epsilon } => {
                format!("svr-linear-c{c:.0e}-e{epsilon:.0e}")
            }
            RegressionSpec::SvrRbf { c, epsilon, gamma } => {
                format!("svr-rbf-c{c:.0e}-e{epsilon:.0e}-g{gamma:.0e}")
            }
            RegressionSpec::RandomForest {
                n_tree, split_rule, ..
            } => format!("rf-t{n_tree}-{}", split_rule.label()),
            RegressionSpec::Knn {
                k,
                weights,
                n_kept_features,
            } => format!(
                "knn-k{k}-{}{}",
                weights.label(),
                n_kept_features.map_or(String::new(), |n| format!("-f{n}"))
            ),
            RegressionSpec::Ann {
                activation, alpha, ..
            } => format!("ann-{}-a{alpha:.0e}", activation.label()),
        }
    }

    /// Family name without hyperparameters.
    pub fn family(&self) -> &'static str {
        match self {
            RegressionSpec::OlsLinear => "ols-linear",
            RegressionSpec::OlsQuadratic => "ols-quadratic",
            RegressionSpec::SvrLinear { .. } => "svr-linear",
            RegressionSpec::SvrRbf { .. } => "svr-rbf",
            RegressionSpec::RandomForest { .. } => "random-forest",
            RegressionSpec::Knn { .. } => "knn",
            RegressionSpec::Ann { .. } => "ann",
        }
    }

    fn validate(&self, n_train: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        match *self {
            RegressionSpec::SvrLinear { c, epsilon }
            | RegressionSpec::SvrRbf { c, epsilon, .. } => {
                if c <= 0.0 || epsilon < 0.0 {
                    return bad(format!("SVR needs C > 0 and epsilon >= 0 (C={c}, eps={epsilon})"));
                }
                if let RegressionSpec::SvrRbf { gamma, .. } = *self {
                    if gamma <= 0.0 {
                        return bad(format!("RBF kernel needs gamma > 0 (gamma={gamma})"));
                    }
                }
                Ok(())
            }
            RegressionSpec::RandomForest { n_tree, .. } => {
                if n_tree == 0 {
                    return bad("random forest needs at least one tree".into());
                }
                Ok(())
            }
            RegressionSpec::Knn { k, .. } => {
                if k == 0 || k > n_train {
                    return bad(format!("k must satisfy 1 <= k <= N_train (k={k}, N={n_train})"));
                }
                Ok(())
            }
            RegressionSpec::Ann {
                alpha, hidden_width, ..
            } => {
                if hidden_width == 0 || alpha < 0.0 {
                    return bad("ANN needs hidden_width >= 1 and alpha >= 0".into());
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Learned parameters of one fitted family.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum FittedModel {
    Ols(OlsModel),
    Svr(SvrModel),
    Forest(ForestModel),
    Knn(KnnModel),
    Ann(AnnModel),
}

/// A fitted regressor: immutable, deterministic prediction.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FittedRegressor {
    pub spec: RegressionSpec,
    pub input_dim: usize,
    pub model: FittedModel,
    /// Set when the optimizer stopped short of its tolerance.
    pub warning: Option<String>,
}

/// Fits the regressor described by `spec` on training rows and targets.
pub fn fit(spec: &RegressionSpec, x: &[Vec<Real>], y: &[Real]) -> Result<FittedRegressor> {
    if x.is_empty() || x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "training set needs matching, nonempty rows and targets \
             ({} rows, {} targets)",
            x.len(),
            y.len()
        )));
    }
    let dim = x[0].len();
    if x.iter().any(|r| r.len() != dim) {
        return Err(Error::InvalidArgument(
            "training rows must have equal dimension".into(),
        ));
    }
    spec.validate(x.len())?;
    let mut warning = None;
    let model = match spec {
        RegressionSpec::OlsLinear => FittedModel::Ols(ols::fit(x, y, false)?),
        RegressionSpec::OlsQuadratic => FittedModel::Ols(ols::fit(x, y, true)?),
        RegressionSpec::SvrLinear { c, epsilon } => {
            FittedModel::Svr(svr::fit(x, y, svr::Kernel::Linear, *c, *epsilon)?)
        }
        RegressionSpec::SvrRbf { c, epsilon, gamma } => FittedModel::Svr(svr::fit(
            x,
            y,
            svr::Kernel::Rbf { gamma: *gamma },
            *c,
            *epsilon,
        )?),
        RegressionSpec::RandomForest {
            n_tree,
            split_rule,
            seed,
            bootstrap,
        } => FittedModel::Forest(forest::fit(x, y, *n_tree, *split_rule, *seed, *bootstrap)),
        RegressionSpec::Knn {
            k,
            weights,
            n_kept_features,
        } => FittedModel::Knn(knn::fit(x, y, *k, *weights, *n_kept_features)?),
        RegressionSpec::Ann {
            activation,
            alpha,
            hidden_width,
            lbfgs_tol,
            max_iter,
            seed,
        } => {
            let (model, converged) =
                ann::fit(x, y, *activation, *alpha, *hidden_width, *lbfgs_tol, *max_iter, *seed);
            if !converged {
                warning = Some("optimizer stopped before reaching its gradient tolerance".into());
            }
            FittedModel::Ann(model)
        }
    };
    Ok(FittedRegressor {
        spec: spec.clone(),
        input_dim: dim,
        model,
        warning,
    })
}

impl FittedRegressor {
    /// Predicts the response for one feature row.
    pub fn predict_one(&self, x: &[Real]) -> Result<Real> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                context: "prediction input",
                expected: self.input_dim,
                actual: x.len(),
            });
        }
        let value = match &self.model {
            FittedModel::Ols(m) => m.predict(x),
            FittedModel::Svr(m) => m.predict(x),
            FittedModel::Forest(m) => m.predict(x),
            FittedModel::Knn(m) => m.predict(x),
            FittedModel::Ann(m) => m.predict(x),
        };
        if !value.is_finite() {
            return Err(Error::NonFinite {
                context: "regression prediction",
            });
        }
        Ok(value)
    }

    /// Predicts responses for a batch of rows.
    pub fn predict(&self, rows: &[Vec<Real>]) -> Result<Vec<Real>> {
        rows.iter().map(|r| self.predict_one(r)).collect()
    }
}

/// Ranks feature columns by univariate F score against the targets,
/// highest first; unscoreable (constant) columns go last. Ties break
/// toward the lower index.
pub fn f_test_ranking(rows: &[Vec<Real>], y: &[Real]) -> Vec<usize> {
    let n = rows.len();
    let dim = rows[0].len();
    let nf = n as Real;
    let y_mean = y.iter().sum::<Real>() / nf;
    let y_var: Real = y.iter().map(|&v| (v - y_mean).powi(2)).sum();
    let mut scored: Vec<(usize, Real)> = (0..dim)
        .map(|j| {
            let mean = rows.iter().map(|r| r[j]).sum::<Real>() / nf;
            let var: Real = rows.iter().map(|r| (r[j] - mean).powi(2)).sum();
            if var <= 0.0 || y_var <= 0.0 || n < 3 {
                return (j, Real::NEG_INFINITY);
            }
            let cov: Real = rows
                .iter()
                .zip(y)
                .map(|(r, &t)| (r[j] - mean) * (t - y_mean))
                .sum();
            let rho2 = (cov * cov) / (var * y_var);
            if rho2 >= 1.0 {
                (j, Real::INFINITY)
            } else {
                (j, rho2 / (1.0 - rho2) * (nf - 2.0))
            }
        })
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.into_iter().map(|(j, _)| j).collect()
}
