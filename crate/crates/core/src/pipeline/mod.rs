//! Experiment orchestration: configuration, dataset caching, the sweep
//! over (dataset method, feature method, regressor family, training
//! size) cells, and report emission.
//!
//! Everything downstream of a config file is deterministic: all
//! randomness flows from named seeds derived from the config seed, sweep
//! outputs are written in a fixed order, and repeated invocations with
//! the same config reuse cached datasets and cell results.

pub mod cache;
pub mod config;
pub mod report;
pub mod run;

pub use config::{ExperimentConfig, ExperimentPlan, FeatureInstance};
pub use report::{compare_sampling, emit_report, QkComparison, ReportSummary};
pub use run::{generate_datasets, predict_all, run_experiment, MetricsRow, RunSummary};

use sha2::{Digest, Sha256};

/// Derives a named sub-seed from the config seed; each consumer of
/// randomness gets its own tag so streams never collide.
pub fn derive_seed(base: u64, tag: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(base.to_le_bytes());
    hasher.update(tag.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}
