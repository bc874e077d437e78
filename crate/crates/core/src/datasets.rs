//! Data generation for error models: parameter sampling, nested training
//! subsets, labeled-row generation (one high-fidelity solve per parameter
//! instance, reused across all approximation types), and the pooled/unique
//! training-set constructions.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approximators::{approximate_solution, ApproximateSolver, SOLVE_MAX_ITER, SOLVE_TOL};
use crate::burgers::{dual_weighted_residual, qoi_slope, solve_burgers, BurgersConfig};
use crate::error::{Error, Result};
use crate::features::FeatureSample;
use crate::{Real, RealMatrix};

/// Axis-aligned box of admissible parameter vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterDomain {
    pub bounds: Vec<(Real, Real)>,
}

impl ParameterDomain {
    pub fn new(bounds: Vec<(Real, Real)>) -> Result<Self> {
        if bounds.iter().any(|&(lo, hi)| !(lo < hi)) {
            return Err(Error::InvalidArgument(
                "parameter bounds must satisfy lo < hi".into(),
            ));
        }
        Ok(Self { bounds })
    }

    /// Forcing amplitude, boundary magnitude, and Reynolds number ranges
    /// for the viscous Burgers experiments.
    pub fn burgers() -> Self {
        Self {
            bounds: vec![(0.10, 2.00), (0.10, 2.10), (50.0, 1000.0)],
        }
    }

    pub fn contains(&self, mu: &[Real]) -> bool {
        mu.len() == self.bounds.len()
            && mu
                .iter()
                .zip(&self.bounds)
                .all(|(&v, &(lo, hi))| v >= lo && v <= hi)
    }

    /// The 2^d corner points of the box.
    pub fn vertices(&self) -> Vec<Vec<Real>> {
        let d = self.bounds.len();
        (0..1usize << d)
            .map(|mask| {
                (0..d)
                    .map(|j| {
                        if mask >> j & 1 == 0 {
                            self.bounds[j].0
                        } else {
                            self.bounds[j].1
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

/// Independent uniform draws over the box, deterministic per seed.
pub fn sample_parameters(domain: &ParameterDomain, n: usize, seed: u64) -> Vec<Vec<Real>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            domain
                .bounds
                .iter()
                .map(|&(lo, hi)| rng.gen_range(lo..hi))
                .collect()
        })
        .collect()
}

/// Nested index subsets of `0..n`: one shuffle, prefixes of the requested
/// sizes, so smaller sets are contained in larger ones.
pub fn nested_subsets(n: usize, sizes: &[usize], seed: u64) -> Result<Vec<Vec<usize>>> {
    if sizes.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument(
            "subset sizes must be ascending".into(),
        ));
    }
    if sizes.last().is_some_and(|&s| s > n) {
        return Err(Error::InvalidArgument(format!(
            "largest subset exceeds available count ({} > {n})",
            sizes.last().unwrap()
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    Ok(sizes.iter().map(|&s| order[..s].to_vec()).collect())
}

/// What the label measures: QoI error `g(u) - g(u~)` or the state error
/// norm `||u - u~||`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ErrorKind {
    Qoi,
    StateNorm,
}

/// One labeled record: parameters, which approximation produced it, the
/// error label, and the raw ingredients needed for features and replay.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LabeledRow {
    pub mu: Vec<Real>,
    /// Index into the generation's solver list.
    pub approx_index: usize,
    pub label: Real,
    pub residual: Vec<Real>,
    pub state: Vec<Real>,
    pub dual: Option<Real>,
    /// Index of the matching high-fidelity record.
    pub hf_index: usize,
}

/// High-fidelity solution retained once per parameter instance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HighFidelityRecord {
    pub mu: Vec<Real>,
    pub state: Vec<Real>,
    pub qoi: Real,
}

/// Output of one generation sweep.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneratedSet {
    pub rows: Vec<LabeledRow>,
    pub high_fidelity: Vec<HighFidelityRecord>,
    /// Parameter instances whose solves failed, with the reason.
    pub failures: Vec<(Vec<Real>, String)>,
    /// High-fidelity solves performed (must equal the instance count).
    pub hf_solves: usize,
}

/// Inputs of a generation sweep.
pub struct GenerationSpec<'a> {
    pub config: &'a BurgersConfig,
    pub solvers: &'a [ApproximateSolver],
    pub error_kind: ErrorKind,
    /// Also compute the dual-weighted residual per row (QoI labels only).
    pub compute_dual: bool,
    pub rom_basis: Option<&'a RealMatrix>,
}

fn state_norm_error(u: &[Real], v: &[Real]) -> Real {
    u.iter()
        .zip(v)
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum::<Real>()
        .sqrt()
}

/// Generates labeled rows for every (parameter instance, solver) pair.
/// Each instance costs exactly one high-fidelity solve, reused across all
/// solvers; per-instance failures are recorded and excluded rather than
/// aborting the sweep.
pub fn generate_labels(spec: &GenerationSpec<'_>, mus: &[Vec<Real>]) -> GeneratedSet {
    type PerMu = std::result::Result<(HighFidelityRecord, Vec<(usize, ApproxPayload)>), String>;
    struct ApproxPayload {
        label: Real,
        residual: Vec<Real>,
        state: Vec<Real>,
        dual: Option<Real>,
    }

    let results: Vec<PerMu> = mus
        .par_iter()
        .map(|mu| {
            let hf = solve_burgers(spec.config, mu, SOLVE_TOL, SOLVE_MAX_ITER)
                .map_err(|e| e.to_string())?;
            if !hf.converged {
                return Err("high-fidelity Newton solve did not converge".into());
            }
            let hf_qoi = qoi_slope(&hf.state, spec.config).map_err(|e| e.to_string())?;
            let record = HighFidelityRecord {
                mu: mu.clone(),
                state: hf.state,
                qoi: hf_qoi,
            };
            let mut payloads = Vec::with_capacity(spec.solvers.len());
            for (i, solver) in spec.solvers.iter().enumerate() {
                let approx = approximate_solution(solver, mu, spec.config, spec.rom_basis)
                    .map_err(|e| format!("{}: {e}", solver.label()))?;
                let label = match spec.error_kind {
                    ErrorKind::Qoi => record.qoi - approx.qoi,
                    ErrorKind::StateNorm => state_norm_error(&record.state, &approx.state),
                };
                let dual = if spec.compute_dual && spec.error_kind == ErrorKind::Qoi {
                    Some(
                        dual_weighted_residual(&approx.state, &approx.residual, mu, spec.config)
                            .map_err(|e| e.to_string())?,
                    )
                } else {
                    None
                };
                payloads.push((
                    i,
                    ApproxPayload {
                        label,
                        residual: approx.residual,
                        state: approx.state,
                        dual,
                    },
                ));
            }
            Ok((record, payloads))
        })
        .collect();

    let mut out = GeneratedSet {
        rows: Vec::new(),
        high_fidelity: Vec::new(),
        failures: Vec::new(),
        hf_solves: 0,
    };
    for (mu, result) in mus.iter().zip(results) {
        match result {
            Ok((record, payloads)) => {
                out.hf_solves += 1;
                let hf_index = out.high_fidelity.len();
                out.high_fidelity.push(record);
                for (approx_index, p) in payloads {
                    out.rows.push(LabeledRow {
                        mu: mu.clone(),
                        approx_index,
                        label: p.label,
                        residual: p.residual,
                        state: p.state,
                        dual: p.dual,
                        hf_index,
                    });
                }
            }
            Err(reason) => out.failures.push((mu.clone(), reason)),
        }
    }
    out
}

/// Training-set construction: pool every approximation type into one data
/// set, or keep one data set per type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DatasetMethod {
    Pooled,
    Unique,
}

impl DatasetMethod {
    pub fn label(&self) -> &'static str {
        match self {
            DatasetMethod::Pooled => "pooled",
            DatasetMethod::Unique => "unique",
        }
    }
}

/// Rows as regression samples; `approx_index` filters to one
/// approximation type (required for the unique construction).
pub fn to_feature_samples(rows: &[LabeledRow], approx_index: Option<usize>) -> Vec<FeatureSample> {
    rows.iter()
        .filter(|r| approx_index.map_or(true, |i| r.approx_index == i))
        .map(|r| FeatureSample {
            mu: r.mu.clone(),
            residual: r.residual.clone(),
            dual: r.dual,
            label: r.label,
        })
        .collect()
}

/// True when no parameter vector appears in both lists (bitwise equality;
/// the lists come from disjoint seeded draws).
pub fn disjoint_parameters(a: &[Vec<Real>], b: &[Vec<Real>]) -> bool {
    !a.iter().any(|mu| b.contains(mu))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approximators::ApproximateSolver;

    #[test]
    fn sampling_respects_bounds_and_seed() {
        let domain = ParameterDomain::burgers();
        let a = sample_parameters(&domain, 50, 7);
        let b = sample_parameters(&domain, 50, 7);
        let c = sample_parameters(&domain, 50, 8);
        assert_eq!(a, b);
        assert_ne!(a, c);
        for mu in &a {
            assert!(domain.contains(mu));
        }
    }

    #[test]
    fn sampling_means_match_uniform_law() {
        let domain = ParameterDomain::new(vec![(0.0, 1.0); 3]).unwrap();
        let draws = sample_parameters(&domain, 10_000, 1);
        for j in 0..3 {
            let mean: f64 = draws.iter().map(|mu| mu[j]).sum::<f64>() / draws.len() as f64;
            assert!((mean - 0.5).abs() < 0.02, "coordinate {j} mean {mean}");
        }
    }

    #[test]
    fn invalid_bounds_rejected() {
        assert!(ParameterDomain::new(vec![(1.0, 1.0)]).is_err());
        assert!(ParameterDomain::new(vec![(2.0, 1.0)]).is_err());
    }

    #[test]
    fn nested_subsets_are_nested_and_deterministic() {
        let fam = nested_subsets(20, &[5, 10, 20], 3).unwrap();
        assert_eq!(fam[0].len(), 5);
        assert!(fam[0].iter().all(|i| fam[1].contains(i)));
        assert!(fam[1].iter().all(|i| fam[2].contains(i)));
        let mut full = fam[2].clone();
        full.sort_unstable();
        assert_eq!(full, (0..20).collect::<Vec<_>>());
        assert_eq!(nested_subsets(20, &[5, 10, 20], 3).unwrap(), fam);
        assert!(nested_subsets(4, &[5], 0).is_err());
        assert!(nested_subsets(20, &[10, 5], 0).is_err());
    }

    #[test]
    fn generation_one_hf_solve_per_instance() {
        let cfg = BurgersConfig::new(99).unwrap();
        let domain = ParameterDomain::burgers();
        let mus = sample_parameters(&domain, 6, 42);
        let solvers = vec![
            ApproximateSolver::InexactNewton { k: 1 },
            ApproximateSolver::InexactNewton { k: 2 },
        ];
        let spec = GenerationSpec {
            config: &cfg,
            solvers: &solvers,
            error_kind: ErrorKind::Qoi,
            compute_dual: true,
            rom_basis: None,
        };
        let set = generate_labels(&spec, &mus);
        assert!(set.failures.is_empty(), "failures: {:?}", set.failures);
        assert_eq!(set.hf_solves, 6);
        assert_eq!(set.high_fidelity.len(), 6);
        assert_eq!(set.rows.len(), 12);
        assert!(set.rows.iter().all(|r| r.dual.is_some()));

        // Pooled uses every row; unique filters by approximation type.
        assert_eq!(to_feature_samples(&set.rows, None).len(), 12);
        assert_eq!(to_feature_samples(&set.rows, Some(0)).len(), 6);

        // Replay: the stored label is reproducible from stored states.
        for row in &set.rows {
            let hf = &set.high_fidelity[row.hf_index];
            let replay = hf.qoi - qoi_slope(&row.state, &cfg).unwrap();
            assert_eq!(replay.to_bits(), row.label.to_bits());
        }
    }

    #[test]
    fn near_exact_approximation_has_tiny_labels() {
        let cfg = BurgersConfig::new(99).unwrap();
        let mus = sample_parameters(&ParameterDomain::burgers(), 3, 5);
        let solvers = vec![ApproximateSolver::InexactNewton { k: 30 }];
        let spec = GenerationSpec {
            config: &cfg,
            solvers: &solvers,
            error_kind: ErrorKind::Qoi,
            compute_dual: false,
            rom_basis: None,
        };
        let set = generate_labels(&spec, &mus);
        for row in &set.rows {
            assert!(row.label.abs() < 1e-8, "label {}", row.label);
        }
    }

    #[test]
    fn state_norm_labels_nonnegative() {
        let cfg = BurgersConfig::new(99).unwrap();
        let mus = sample_parameters(&ParameterDomain::burgers(), 4, 9);
        let solvers = vec![ApproximateSolver::InexactNewton { k: 1 }];
        let spec = GenerationSpec {
            config: &cfg,
            solvers: &solvers,
            error_kind: ErrorKind::StateNorm,
            compute_dual: false,
            rom_basis: None,
        };
        let set = generate_labels(&spec, &mus);
        assert_eq!(set.rows.len(), 4);
        for row in &set.rows {
            assert!(row.label >= 0.0);
            assert!(row.dual.is_none());
        }
    }

    #[test]
    fn disjointness_of_separate_seeds() {
        let domain = ParameterDomain::burgers();
        let a = sample_parameters(&domain, 100, 1);
        let b = sample_parameters(&domain, 100, 2);
        assert!(disjoint_parameters(&a, &b));
        assert!(!disjoint_parameters(&a, &a));
    }

    #[test]
    fn vertices_enumerate_corners() {
        let domain = ParameterDomain::burgers();
        let v = domain.vertices();
        assert_eq!(v.len(), 8);
        assert!(v.contains(&vec![0.10, 0.10, 50.0]));
        assert!(v.contains(&vec![2.00, 2.10, 1000.0]));
    }
}
