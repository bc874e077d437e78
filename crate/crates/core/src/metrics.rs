//! Regression quality metrics: mean squared error, fraction of variance
//! unexplained, and the coefficient of determination.
//!
//! The three are tied by `FVU = MSE / Var(y)` and `r2 = 1 - FVU`, with the
//! variance taken over the evaluation targets themselves.

use crate::Real;

/// Mean squared error between targets and predictions.
pub fn mean_squared_error(targets: &[Real], predictions: &[Real]) -> Real {
    assert_eq!(targets.len(), predictions.len());
    assert!(!targets.is_empty());
    targets
        .iter()
        .zip(predictions)
        .map(|(&y, &p)| (y - p).powi(2))
        .sum::<Real>()
        / targets.len() as Real
}

/// Population variance of a sample.
pub fn variance(values: &[Real]) -> Real {
    assert!(!values.is_empty());
    let n = values.len() as Real;
    let mean = values.iter().sum::<Real>() / n;
    values.iter().map(|&v| (v - mean).powi(2)).sum::<Real>() / n
}

/// Fraction of variance unexplained: `MSE / Var(targets)`.
///
/// Degenerate targets (zero variance) give 0 when the predictions are
/// exact and infinity otherwise.
pub fn fraction_of_variance_unexplained(targets: &[Real], predictions: &[Real]) -> Real {
    let mse = mean_squared_error(targets, predictions);
    let var = variance(targets);
    if var > 0.0 {
        mse / var
    } else if mse == 0.0 {
        0.0
    } else {
        Real::INFINITY
    }
}

/// Coefficient of determination: `1 - FVU`.
pub fn r_squared(targets: &[Real], predictions: &[Real]) -> Real {
    1.0 - fraction_of_variance_unexplained(targets, predictions)
}
