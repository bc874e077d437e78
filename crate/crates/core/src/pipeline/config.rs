//! Experiment configuration: a single TOML file fully determines a run.
//! Parsing is strict (unknown fields rejected) and validation happens
//! before any compute.

use serde::{Deserialize, Serialize};

use crate::approximators::ApproximateSolver;
use crate::burgers::BurgersConfig;
use crate::datasets::{DatasetMethod, ErrorKind, ParameterDomain};
use crate::error::{Error, Result};
use crate::features::{FeatureMethod, SamplingScheme, ScalingMode};
use crate::model_selection::RegressorFamily;
use crate::Real;

fn default_n_interior() -> usize {
    1999
}
fn default_error_kind() -> String {
    "qoi".into()
}
fn default_scaling() -> String {
    "std".into()
}
fn default_cv_folds() -> usize {
    5
}
fn default_true() -> bool {
    true
}
fn default_omegas() -> Vec<Real> {
    vec![0.80, 0.90, 0.95, 0.99]
}
fn default_snapshot_count() -> usize {
    100
}
fn default_n_r() -> Vec<usize> {
    vec![10, 100, 1000]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// One of `burgers-inexact`, `burgers-coarse`, `burgers-rom-demo`.
    pub problem: String,
    /// Master seed; every random stream derives from it by name.
    pub seed: u64,
    #[serde(default = "default_n_interior")]
    pub n_interior: usize,
    /// `qoi` (quantity-of-interest error) or `state-norm`.
    #[serde(default = "default_error_kind")]
    pub error_kind: String,
    /// Feature scaling: `std` (standard deviation) or `variance`.
    #[serde(default = "default_scaling")]
    pub scaling: String,
    #[serde(default = "default_cv_folds")]
    pub cv_folds: usize,
    /// Persist each cell's final fitted model to `models/`.
    #[serde(default = "default_true")]
    pub save_models: bool,
    pub data: DataConfig,
    /// Parameter box; defaults to the Burgers experiment domain.
    #[serde(default)]
    pub domain: Option<Vec<[Real; 2]>>,
    pub solvers: Vec<SolverConfig>,
    pub features: Vec<FeatureConfig>,
    /// Regressor family names (see `RegressorFamily::label`).
    pub regressors: Vec<String>,
    #[serde(default)]
    pub validation: ValidationConfig,
    #[serde(default)]
    pub rom: RomConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    /// Number of training parameter instances.
    pub n_train: usize,
    /// Number of test parameter instances (the second validation set has
    /// the same size).
    pub n_test: usize,
    /// Ascending ladder of training-instance counts (nested subsets);
    /// defaults to the full training set only.
    #[serde(default)]
    pub train_sizes: Vec<usize>,
    /// `pooled` and/or `unique`.
    pub dataset_methods: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SolverConfig {
    InexactNewton { k: usize },
    Coarse { n_coarse: usize },
    Rom { m_u: usize },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureConfig {
    /// `params`, `dual-weighted`, `params-resnorm`, `resnorm`,
    /// `params-residual`, `params-pca`, `params-gappy`, `params-samples`.
    pub method: String,
    /// Residual sampling schemes for the sampled methods (`q`, `k`).
    #[serde(default)]
    pub samplers: Vec<String>,
    /// Residual sample counts for the sampled methods.
    #[serde(default)]
    pub n_r: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationConfig {
    #[serde(default = "default_omegas")]
    pub omegas: Vec<Real>,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            omegas: default_omegas(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RomConfig {
    /// High-fidelity snapshots used to build the reduced basis.
    #[serde(default = "default_snapshot_count")]
    pub snapshot_count: usize,
}

impl Default for RomConfig {
    fn default() -> Self {
        Self {
            snapshot_count: default_snapshot_count(),
        }
    }
}

/// One concrete feature-method instance from the config, carrying the
/// coordinate labels used to match rows across sampling schemes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FeatureInstance {
    pub method: FeatureMethod,
    /// Sampler-independent label, e.g. `params-gappy-n10`.
    pub base: String,
    pub sampler: Option<String>,
    pub n_r: Option<usize>,
}

/// Validated, expanded form of a config, ready to run.
#[derive(Clone, Debug)]
pub struct ExperimentPlan {
    pub config: ExperimentConfig,
    pub burgers: BurgersConfig,
    pub domain: ParameterDomain,
    pub solvers: Vec<ApproximateSolver>,
    pub features: Vec<FeatureInstance>,
    pub families: Vec<RegressorFamily>,
    pub dataset_methods: Vec<DatasetMethod>,
    pub train_sizes: Vec<usize>,
    pub error_kind: ErrorKind,
    pub scaling: ScalingMode,
    pub compute_dual: bool,
}

fn parse_sampler(s: &str) -> Result<SamplingScheme> {
    match s {
        "q" => Ok(SamplingScheme::Q),
        "k" => Ok(SamplingScheme::K),
        other => Err(Error::Config(format!("unknown sampler '{other}'"))),
    }
}

fn expand_feature(fc: &FeatureConfig) -> Result<Vec<FeatureInstance>> {
    let simple = |method: FeatureMethod| -> Result<Vec<FeatureInstance>> {
        if !fc.samplers.is_empty() || !fc.n_r.is_empty() {
            return Err(Error::Config(format!(
                "feature '{}' takes no samplers or n_r",
                fc.method
            )));
        }
        let base = method.label();
        Ok(vec![FeatureInstance {
            method,
            base,
            sampler: None,
            n_r: None,
        }])
    };
    match fc.method.as_str() {
        "params" => simple(FeatureMethod::Params),
        "dual-weighted" => simple(FeatureMethod::DualWeightedResidual),
        "params-resnorm" => simple(FeatureMethod::ParamsAndResidualNorm),
        "resnorm" => simple(FeatureMethod::ResidualNorm),
        "params-residual" => simple(FeatureMethod::ParamsAndResidual),
        "params-pca" => {
            if !fc.samplers.is_empty() || !fc.n_r.is_empty() {
                return Err(Error::Config(
                    "params-pca sweeps the component count internally; it takes no samplers or n_r"
                        .into(),
                ));
            }
            // The component count is swept during selection; the stored
            // value is a placeholder.
            Ok(vec![FeatureInstance {
                method: FeatureMethod::ParamsAndResidualPca { m_r: 1 },
                base: "params-pca".into(),
                sampler: None,
                n_r: None,
            }])
        }
        "params-gappy" | "params-samples" => {
            let samplers = if fc.samplers.is_empty() {
                vec!["q".to_string()]
            } else {
                fc.samplers.clone()
            };
            let n_rs = if fc.n_r.is_empty() {
                default_n_r()
            } else {
                fc.n_r.clone()
            };
            let mut out = Vec::new();
            for n_r in &n_rs {
                for s in &samplers {
                    let sampler = parse_sampler(s)?;
                    let method = if fc.method == "params-gappy" {
                        FeatureMethod::ParamsAndGappyPca {
                            m_r: 1,
                            n_r: *n_r,
                            sampler,
                        }
                    } else {
                        FeatureMethod::ParamsAndResidualSamples {
                            n_r: *n_r,
                            sampler,
                        }
                    };
                    out.push(FeatureInstance {
                        method,
                        base: format!("{}-n{n_r}", fc.method),
                        sampler: Some(s.clone()),
                        n_r: Some(*n_r),
                    });
                }
            }
            Ok(out)
        }
        other => Err(Error::Config(format!("unknown feature method '{other}'"))),
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("config parse error: {e}")))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    /// Validates the config and expands it into a runnable plan.
    pub fn plan(&self) -> Result<ExperimentPlan> {
        let burgers = BurgersConfig::new(self.n_interior)?;
        let domain = match &self.domain {
            Some(bounds) => ParameterDomain::new(bounds.iter().map(|b| (b[0], b[1])).collect())?,
            None => ParameterDomain::burgers(),
        };

        let error_kind = match self.error_kind.as_str() {
            "qoi" => ErrorKind::Qoi,
            "state-norm" => ErrorKind::StateNorm,
            other => return Err(Error::Config(format!("unknown error_kind '{other}'"))),
        };
        let scaling = match self.scaling.as_str() {
            "std" => ScalingMode::StandardDeviation,
            "variance" => ScalingMode::Variance,
            other => return Err(Error::Config(format!("unknown scaling '{other}'"))),
        };

        if self.solvers.is_empty() {
            return Err(Error::Config("at least one solver is required".into()));
        }
        let solvers: Vec<ApproximateSolver> = self
            .solvers
            .iter()
            .map(|s| match *s {
                SolverConfig::InexactNewton { k } => ApproximateSolver::InexactNewton { k },
                SolverConfig::Coarse { n_coarse } => {
                    ApproximateSolver::CoarseProlongation { n_coarse }
                }
                SolverConfig::Rom { m_u } => ApproximateSolver::GalerkinRom { m_u },
            })
            .collect();
        let problem_ok = match self.problem.as_str() {
            "burgers-inexact" => solvers
                .iter()
                .all(|s| matches!(s, ApproximateSolver::InexactNewton { .. })),
            "burgers-coarse" => solvers
                .iter()
                .all(|s| matches!(s, ApproximateSolver::CoarseProlongation { .. })),
            "burgers-rom-demo" => solvers
                .iter()
                .all(|s| matches!(s, ApproximateSolver::GalerkinRom { .. })),
            other => return Err(Error::Config(format!("unknown problem '{other}'"))),
        };
        if !problem_ok {
            return Err(Error::Config(format!(
                "solver list does not match problem '{}'",
                self.problem
            )));
        }
        for s in &solvers {
            match *s {
                ApproximateSolver::InexactNewton { k } if k == 0 => {
                    return Err(Error::Config("inexact-newton requires k >= 1".into()))
                }
                ApproximateSolver::CoarseProlongation { n_coarse }
                    if n_coarse == 0 || n_coarse % 2 == 0 || n_coarse >= self.n_interior =>
                {
                    return Err(Error::Config(format!(
                        "coarse grid size must be odd and below n_interior (got {n_coarse})"
                    )));
                }
                ApproximateSolver::GalerkinRom { m_u }
                    if m_u == 0 || m_u > self.rom.snapshot_count =>
                {
                    return Err(Error::Config(format!(
                        "rom dimension {m_u} outside 1..=snapshot_count ({})",
                        self.rom.snapshot_count
                    )));
                }
                _ => {}
            }
        }

        if self.features.is_empty() {
            return Err(Error::Config("at least one feature method is required".into()));
        }
        let mut features = Vec::new();
        for fc in &self.features {
            features.extend(expand_feature(fc)?);
        }
        for f in &features {
            f.method.validate()?;
            if f.n_r.is_some_and(|n_r| n_r > self.n_interior) {
                return Err(Error::Config(format!(
                    "n_r {} exceeds the residual dimension {}",
                    f.n_r.unwrap(),
                    self.n_interior
                )));
            }
        }
        let compute_dual = features.iter().any(|f| f.method.needs_dual());
        if compute_dual && error_kind != ErrorKind::Qoi {
            return Err(Error::Config(
                "the dual-weighted feature requires error_kind = \"qoi\"".into(),
            ));
        }

        if self.regressors.is_empty() {
            return Err(Error::Config("at least one regressor family is required".into()));
        }
        let families = self
            .regressors
            .iter()
            .map(|r| {
                RegressorFamily::parse(r)
                    .ok_or_else(|| Error::Config(format!("unknown regressor family '{r}'")))
            })
            .collect::<Result<Vec<_>>>()?;

        if self.data.dataset_methods.is_empty() {
            return Err(Error::Config("at least one dataset method is required".into()));
        }
        let dataset_methods = self
            .data
            .dataset_methods
            .iter()
            .map(|m| match m.as_str() {
                "pooled" => Ok(DatasetMethod::Pooled),
                "unique" => Ok(DatasetMethod::Unique),
                other => Err(Error::Config(format!("unknown dataset method '{other}'"))),
            })
            .collect::<Result<Vec<_>>>()?;

        let train_sizes = if self.data.train_sizes.is_empty() {
            vec![self.data.n_train]
        } else {
            self.data.train_sizes.clone()
        };
        if train_sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("train_sizes must be strictly ascending".into()));
        }
        if *train_sizes.last().unwrap() > self.data.n_train {
            return Err(Error::Config(format!(
                "largest train size {} exceeds n_train {}",
                train_sizes.last().unwrap(),
                self.data.n_train
            )));
        }
        if self.data.n_train == 0 || self.data.n_test == 0 {
            return Err(Error::Config("n_train and n_test must be positive".into()));
        }
        if self.cv_folds < 2 {
            return Err(Error::Config("cv_folds must be at least 2".into()));
        }
        if self
            .validation
            .omegas
            .iter()
            .any(|&w| !(0.0 < w && w < 1.0))
        {
            return Err(Error::Config("omegas must lie strictly in (0, 1)".into()));
        }

        Ok(ExperimentPlan {
            config: self.clone(),
            burgers,
            domain,
            solvers,
            features,
            families,
            dataset_methods,
            train_sizes,
            error_kind,
            scaling,
            compute_dual,
        })
    }
}
