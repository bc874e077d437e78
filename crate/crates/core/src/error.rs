use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("matrix is singular to working precision (pivot magnitude {pivot:e})")]
    SingularMatrix { pivot: f64 },

    #[error("SVD did not converge after {sweeps} sweeps")]
    SvdNonConvergence { sweeps: usize },

    #[error("non-finite entry encountered in {context}")]
    NonFinite { context: &'static str },

    #[error("dimension mismatch: {context} (expected {expected}, got {actual})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("Newton iteration failed at iteration {iteration}: {reason}")]
    NewtonFailure { iteration: usize, reason: String },

    #[error("reduced Newton solve failed (m_u = {m_u}): {reason}")]
    RomFailure { m_u: usize, reason: String },

    #[error("requested {requested} principal components but attainable rank is {rank}")]
    RankDeficient { requested: usize, rank: usize },

    #[error("degenerate snapshot set: {0}")]
    DegenerateSnapshots(String),

    #[error("sampling request invalid: {0}")]
    InvalidSampling(String),

    #[error("SVR solver did not converge after {passes} passes")]
    SvrNonConvergence { passes: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("feature extraction failed: {0}")]
    FeatureExtraction(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}
