//! Dense linear-algebra and optimization kernels.
//!
//! Everything here is generic over the scalar type through [`Scalar`];
//! the rest of the crate instantiates these kernels at `f64` via the
//! crate-root aliases.

pub mod lbfgs;
pub mod matrix;
pub mod qr;
pub mod scalar;
pub mod solve;
pub mod svd;

pub use lbfgs::{lbfgs_minimize, LbfgsResult};
pub use matrix::DenseMatrix;
pub use qr::{qr_column_pivoted, PivotedQrResult};
pub use scalar::Scalar;
pub use solve::{solve_dense, solve_tridiagonal};
pub use svd::{pseudo_inverse, svd, SvdResult};
