//! The statistical error model: a fitted feature extractor and regressor
//! predicting the approximation error, plus homoscedastic Gaussian noise
//! whose variance is the mean squared prediction error on a held-out test
//! set. Prediction intervals and their empirical validation frequencies
//! quantify how well the Gaussian noise assumption holds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureSample, FittedFeatureExtractor};
use crate::metrics::mean_squared_error;
use crate::regression::FittedRegressor;
use crate::special::normal_interval_halfwidth;
use crate::Real;

/// Frozen error model: deterministic regression mean plus zero-mean
/// Gaussian noise of variance `noise_variance`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ErrorModel {
    pub extractor: FittedFeatureExtractor,
    pub regressor: FittedRegressor,
    pub noise_variance: Real,
}

/// Validation-frequency table: for each requested interval probability
/// `omega`, the fraction of standardized held-out errors falling inside
/// the standard Gaussian interval of that probability.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IntervalReport {
    pub rows: Vec<(Real, Real)>,
    /// Set when the noise variance is zero but residuals are not.
    pub degenerate: bool,
}

/// Noise variance: mean squared prediction error over the test set (the
/// noise mean is zero by modeling assumption).
pub fn fit_noise(
    extractor: &FittedFeatureExtractor,
    regressor: &FittedRegressor,
    test: &[FeatureSample],
) -> Result<Real> {
    if test.is_empty() {
        return Err(Error::InvalidArgument(
            "noise fit requires a nonempty test set".into(),
        ));
    }
    let targets: Vec<Real> = test.iter().map(|s| s.label).collect();
    let predictions = predict_batch(extractor, regressor, test)?;
    Ok(mean_squared_error(&targets, &predictions))
}

fn predict_batch(
    extractor: &FittedFeatureExtractor,
    regressor: &FittedRegressor,
    samples: &[FeatureSample],
) -> Result<Vec<Real>> {
    samples
        .iter()
        .map(|s| regressor.predict_one(&extractor.transform_sample(s)?))
        .collect()
}

impl ErrorModel {
    /// Assembles a model from its fitted parts and a test set for the
    /// noise fit.
    pub fn fit(
        extractor: FittedFeatureExtractor,
        regressor: FittedRegressor,
        test: &[FeatureSample],
    ) -> Result<Self> {
        let noise_variance = fit_noise(&extractor, &regressor, test)?;
        Ok(Self {
            extractor,
            regressor,
            noise_variance,
        })
    }

    /// Distribution parameters of the predicted error at one evaluation
    /// point: deterministic mean, homoscedastic variance.
    pub fn predict(&self, sample: &FeatureSample) -> Result<(Real, Real)> {
        let x = self.extractor.transform_sample(sample)?;
        Ok((self.regressor.predict_one(&x)?, self.noise_variance))
    }

    /// Central prediction interval of probability `omega`.
    pub fn prediction_interval(&self, sample: &FeatureSample, omega: Real) -> Result<(Real, Real)> {
        let (mean, var) = self.predict(sample)?;
        let half = normal_interval_halfwidth(omega) * var.sqrt();
        Ok((mean - half, mean + half))
    }

    /// Empirical interval-coverage frequencies on an independent second
    /// test set.
    pub fn validation_frequencies(
        &self,
        second_test: &[FeatureSample],
        omegas: &[Real],
    ) -> Result<IntervalReport> {
        if second_test.is_empty() {
            return Err(Error::InvalidArgument(
                "validation frequencies require a nonempty test set".into(),
            ));
        }
        let predictions = predict_batch(&self.extractor, &self.regressor, second_test)?;
        let residuals: Vec<Real> = second_test
            .iter()
            .zip(&predictions)
            .map(|(s, &p)| s.label - p)
            .collect();
        let sigma = self.noise_variance.sqrt();
        let degenerate = sigma == 0.0 && residuals.iter().any(|&r| r != 0.0);
        let n = residuals.len() as Real;
        let rows = omegas
            .iter()
            .map(|&omega| {
                let half = normal_interval_halfwidth(omega);
                let covered = residuals
                    .iter()
                    .filter(|&&r| {
                        if sigma == 0.0 {
                            r == 0.0
                        } else {
                            (r / sigma).abs() <= half
                        }
                    })
                    .count() as Real;
                (omega, covered / n)
            })
            .collect();
        Ok(IntervalReport { rows, degenerate })
    }
}
