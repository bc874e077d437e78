//! Cross-validated hyperparameter selection: shuffled k-fold splits,
//! per-family hyperparameter grids, and a grid search scored by mean
//! validation coefficient of determination.
//!
//! All data-dependent fitting (pruning, principal components, sampling,
//! standardization, feature screening) is redone inside each fold on that
//! fold's training portion only, so no validation information leaks into
//! any fold's model. The final model is refitted on the full training set
//! at the chosen grid point.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{
    FeatureFamilyContext, FeatureMethod, FeatureSample, FittedFeatureExtractor, ScalingMode,
};
use crate::metrics::r_squared;
use crate::regression::{self, Activation, FittedRegressor, KnnWeights, RegressionSpec, SplitRule};
use crate::Real;

/// The number of residual principal components swept during selection.
pub const M_R_GRID: [usize; 10] = [1, 2, 3, 4, 5, 10, 15, 20, 25, 30];

/// Regressor family, before hyperparameters are chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegressorFamily {
    OlsLinear,
    OlsQuadratic,
    SvrLinear,
    SvrRbf,
    RandomForest,
    Knn,
    Ann,
}

impl RegressorFamily {
    pub const ALL: [RegressorFamily; 7] = [
        RegressorFamily::OlsLinear,
        RegressorFamily::OlsQuadratic,
        RegressorFamily::SvrLinear,
        RegressorFamily::SvrRbf,
        RegressorFamily::RandomForest,
        RegressorFamily::Knn,
        RegressorFamily::Ann,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            RegressorFamily::OlsLinear => "ols-linear",
            RegressorFamily::OlsQuadratic => "ols-quadratic",
            RegressorFamily::SvrLinear => "svr-linear",
            RegressorFamily::SvrRbf => "svr-rbf",
            RegressorFamily::RandomForest => "random-forest",
            RegressorFamily::Knn => "knn",
            RegressorFamily::Ann => "ann",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.label() == s)
    }
}

/// One candidate: a feature-method variant paired with a regressor spec.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub feature: FeatureMethod,
    pub regressor: RegressionSpec,
}

/// Per-grid-point cross-validation record.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CvRow {
    pub feature: String,
    pub regressor: String,
    pub fold_scores: Vec<Real>,
    pub mean_score: Real,
}

/// Result of a grid search: the winning point, its report, and the final
/// model refitted on the full training set.
#[derive(Clone, Debug)]
pub struct CvOutcome {
    pub chosen: GridPoint,
    pub chosen_index: usize,
    pub report: Vec<CvRow>,
    pub extractor: FittedFeatureExtractor,
    pub regressor: FittedRegressor,
    pub seed: u64,
}

/// Shuffled split of `0..n` into `k` disjoint folds whose sizes differ by
/// at most one. Deterministic per seed.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "cannot split {n} samples into {k} folds"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let base = n / k;
    let extra = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut at = 0;
    for i in 0..k {
        let size = base + usize::from(i < extra);
        folds.push(order[at..at + size].to_vec());
        at += size;
    }
    Ok(folds)
}

fn logspace(lo: i32, hi: i32, step: i32) -> Vec<Real> {
    (lo..=hi)
        .step_by(step as usize)
        .map(|n| 10.0_f64.powi(n))
        .collect()
}

/// Feature-method variants swept during selection: the component count
/// varies for the PCA-based methods, everything else is a single variant.
pub fn feature_variants(method: &FeatureMethod) -> Vec<FeatureMethod> {
    match *method {
        FeatureMethod::ParamsAndResidualPca { .. } => M_R_GRID
            .iter()
            .map(|&m_r| FeatureMethod::ParamsAndResidualPca { m_r })
            .collect(),
        FeatureMethod::ParamsAndGappyPca { n_r, sampler, .. } => M_R_GRID
            .iter()
            .filter(|&&m_r| m_r <= n_r)
            .map(|&m_r| FeatureMethod::ParamsAndGappyPca { m_r, n_r, sampler })
            .collect(),
        ref other => vec![other.clone()],
    }
}

/// Builds the selection grid for one (feature method, regressor family)
/// pair. `n_train` is the full training-set size and `n_features` the
/// assembled feature dimension (bounds the k-NN screening grid).
pub fn build_grid(
    family: RegressorFamily,
    method: &FeatureMethod,
    n_train: usize,
    n_features: usize,
    seed: u64,
) -> Vec<GridPoint> {
    let specs: Vec<RegressionSpec> = match family {
        RegressorFamily::OlsLinear => vec![RegressionSpec::OlsLinear],
        RegressorFamily::OlsQuadratic => vec![RegressionSpec::OlsQuadratic],
        RegressorFamily::SvrLinear => {
            let mut v = Vec::new();
            for &c in &logspace(-2, 4, 1) {
                for &epsilon in &logspace(-3, 0, 1) {
                    v.push(RegressionSpec::SvrLinear { c, epsilon });
                }
            }
            v
        }
        RegressorFamily::SvrRbf => {
            let mut v = Vec::new();
            for &c in &logspace(-2, 4, 1) {
                for &epsilon in &logspace(-3, 0, 1) {
                    for &gamma in &logspace(-5, 1, 1) {
                        v.push(RegressionSpec::SvrRbf { c, epsilon, gamma });
                    }
                }
            }
            v
        }
        RegressorFamily::RandomForest => {
            let mut v = Vec::new();
            for n_tree in (25..=150).step_by(25) {
                for split_rule in [SplitRule::All, SplitRule::Sqrt, SplitRule::Log2] {
                    v.push(RegressionSpec::RandomForest {
                        n_tree,
                        split_rule,
                        seed,
                        bootstrap: true,
                    });
                }
            }
            v
        }
        RegressorFamily::Knn => {
            let k_max = 10.min(4 * n_train / 5).max(1);
            // The component count plays the feature-selection role for the
            // PCA-based methods, so the screening grid collapses there.
            let kept: Vec<Option<usize>> = if matches!(
                method,
                FeatureMethod::ParamsAndResidualPca { .. }
                    | FeatureMethod::ParamsAndGappyPca { .. }
            ) {
                vec![None]
            } else {
                (1..=10.min(n_features).max(1)).map(Some).collect()
            };
            let mut v = Vec::new();
            for k in 1..=k_max {
                for weights in [KnnWeights::Uniform, KnnWeights::InverseDistance] {
                    for &n_kept_features in &kept {
                        v.push(RegressionSpec::Knn {
                            k,
                            weights,
                            n_kept_features,
                        });
                    }
                }
            }
            v
        }
        RegressorFamily::Ann => {
            let mut v = Vec::new();
            for activation in [
                Activation::Identity,
                Activation::Logistic,
                Activation::Tanh,
                Activation::Relu,
            ] {
                for &alpha in &logspace(-8, 0, 2) {
                    v.push(RegressionSpec::Ann {
                        activation,
                        alpha,
                        hidden_width: 100,
                        lbfgs_tol: 1e-5,
                        max_iter: 1000,
                        seed,
                    });
                }
            }
            v
        }
    };
    let mut grid = Vec::new();
    for feature in feature_variants(method) {
        for spec in &specs {
            grid.push(GridPoint {
                feature: feature.clone(),
                regressor: spec.clone(),
            });
        }
    }
    grid
}

/// Fold-local fit of one feature variant: extractor trained on the
/// training rows only, then both portions transformed. Exposed so the
/// leakage property (validation rows never influence the fit) can be
/// tested directly against the same code path the search uses.
#[allow(clippy::type_complexity)]
pub fn fold_features(
    samples: &[FeatureSample],
    train_idx: &[usize],
    val_idx: &[usize],
    method: &FeatureMethod,
    ctx: &FeatureFamilyContext,
    scaling: ScalingMode,
) -> Result<(FittedFeatureExtractor, Vec<Vec<Real>>, Vec<Vec<Real>>)> {
    let train: Vec<FeatureSample> = train_idx.iter().map(|&i| samples[i].clone()).collect();
    let (extractor, train_x) =
        FittedFeatureExtractor::fit_transform(method, &train, ctx, scaling)?;
    let val_x = val_idx
        .iter()
        .map(|&i| extractor.transform_sample(&samples[i]))
        .collect::<Result<_>>()?;
    Ok((extractor, train_x, val_x))
}

struct FoldData {
    train_idx: Vec<usize>,
    val_idx: Vec<usize>,
    // Per feature variant: transformed training/validation rows.
    features: Vec<Option<(Vec<Vec<Real>>, Vec<Vec<Real>>)>>,
}

/// Grid search with shuffled k-fold cross-validation. Every grid point is
/// scored by the mean validation coefficient of determination across
/// folds (failed fits score negative infinity); ties keep the earliest
/// grid point. The winner is refitted on the full training set.
pub fn grid_search_cv(
    samples: &[FeatureSample],
    grid: &[GridPoint],
    folds: usize,
    seed: u64,
    scaling: ScalingMode,
) -> Result<CvOutcome> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty hyperparameter grid".into()));
    }
    let n = samples.len();
    let fold_sets = kfold_split(n, folds, seed)?;

    let mut variants: Vec<FeatureMethod> = Vec::new();
    for p in grid {
        if !variants.contains(&p.feature) {
            variants.push(p.feature.clone());
        }
    }
    let variant_index = |m: &FeatureMethod| variants.iter().position(|v| v == m).unwrap();
    let needs_pca = variants.iter().any(|v| v.needs_pca());

    let fold_data: Vec<FoldData> = fold_sets
        .par_iter()
        .map(|val_idx| {
            let train_idx: Vec<usize> = (0..n).filter(|i| !val_idx.contains(i)).collect();
            let train: Vec<FeatureSample> =
                train_idx.iter().map(|&i| samples[i].clone()).collect();
            let ctx = FeatureFamilyContext::fit(&train, needs_pca);
            let features = variants
                .iter()
                .map(|method| {
                    let ctx = ctx.as_ref().ok()?;
                    let (extractor, train_x) =
                        FittedFeatureExtractor::fit_transform(method, &train, ctx, scaling)
                            .ok()?;
                    let val_x: Vec<Vec<Real>> = val_idx
                        .iter()
                        .map(|&i| extractor.transform_sample(&samples[i]))
                        .collect::<Result<_>>()
                        .ok()?;
                    Some((train_x, val_x))
                })
                .collect();
            FoldData {
                train_idx,
                val_idx: val_idx.clone(),
                features,
            }
        })
        .collect();

    let report: Vec<CvRow> = grid
        .par_iter()
        .map(|point| {
            let vi = variant_index(&point.feature);
            let fold_scores: Vec<Real> = fold_data
                .iter()
                .map(|fold| {
                    let Some((train_x, val_x)) = fold.features[vi].as_ref() else {
                        return Real::NEG_INFINITY;
                    };
                    let train_y: Vec<Real> =
                        fold.train_idx.iter().map(|&i| samples[i].label).collect();
                    let val_y: Vec<Real> =
                        fold.val_idx.iter().map(|&i| samples[i].label).collect();
                    let Ok(model) = regression::fit(&point.regressor, train_x, &train_y) else {
                        return Real::NEG_INFINITY;
                    };
                    match model.predict(val_x) {
                        Ok(pred) => r_squared(&val_y, &pred),
                        Err(_) => Real::NEG_INFINITY,
                    }
                })
                .collect();
            let mean_score = if fold_scores.iter().any(|s| !s.is_finite()) {
                Real::NEG_INFINITY
            } else {
                fold_scores.iter().sum::<Real>() / fold_scores.len() as Real
            };
            CvRow {
                feature: point.feature.label(),
                regressor: point.regressor.label(),
                fold_scores,
                mean_score,
            }
        })
        .collect();

    // Final refit on the full training set. A grid point can pass every
    // fold yet fail the full-set refit (e.g. the SVR solver hitting its
    // update cap on the larger problem); treat that like a fold failure
    // and fall back to the next-best point rather than aborting.
    let mut order: Vec<usize> = (0..report.len()).collect();
    order.sort_by(|&a, &b| report[b].mean_score.total_cmp(&report[a].mean_score));
    let train_y: Vec<Real> = samples.iter().map(|s| s.label).collect();
    let mut last_err = None;
    for &best in &order {
        if !report[best].mean_score.is_finite() {
            break;
        }
        let chosen = grid[best].clone();
        let ctx = FeatureFamilyContext::fit(samples, chosen.feature.needs_pca())?;
        let (extractor, train_x) =
            FittedFeatureExtractor::fit_transform(&chosen.feature, samples, &ctx, scaling)?;
        match regression::fit(&chosen.regressor, &train_x, &train_y) {
            Ok(regressor) => {
                return Ok(CvOutcome {
                    chosen,
                    chosen_index: best,
                    report,
                    extractor,
                    regressor,
                    seed,
                });
            }
            Err(err) => last_err = Some(err),
        }
    }
    Err(last_err.unwrap_or_else(|| {
        Error::InvalidArgument("every grid point failed cross-validation".into())
    }))
}
