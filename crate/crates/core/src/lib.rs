//! Statistical error models for approximate solutions of parameterized
//! systems of nonlinear equations.
//!
//! The library builds regression models `delta_hat = f_hat(x) + eps_hat`
//! that map cheaply computable features (parameters, residual samples,
//! gappy principal components, dual-weighted residuals) to the error a
//! cheap approximate solution incurs relative to the converged
//! high-fidelity solution. A forced steady viscous Burgers model drives
//! the bundled experiments; approximate solutions come from truncated
//! Newton iterations, prolongated coarse-mesh solves, and POD-Galerkin
//! reduced-order models.

pub mod approximators;
pub mod burgers;
pub mod datasets;
pub mod error;
pub mod error_model;
pub mod features;
pub mod metrics;
pub mod model_selection;
pub mod numerics;
pub mod pipeline;
pub mod pod;
pub mod regression;
pub mod special;

pub use error::{Error, Result};
pub use numerics::matrix::DenseMatrix;

/// Default scalar type used by the modeling pipeline.
pub type Real = f64;
/// Dense matrix over the default scalar.
pub type RealMatrix = DenseMatrix<Real>;
