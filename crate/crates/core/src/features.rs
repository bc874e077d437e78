//! Feature engineering for regression-based error models.
//!
//! Eight feature-extraction methods map a parameter vector and the residual
//! of an approximate solution to a regression input: raw parameters, a
//! dual-weighted residual scalar, residual norms, full residual entries,
//! residual principal components, gappy (sampled) principal components, and
//! raw residual samples. Extractors are fitted on training data (pruning,
//! PCA basis, sampling indices, standardization statistics) and frozen.

use std::cell::Cell;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::matrix::norm2;
use crate::numerics::svd::pseudo_inverse;
use crate::numerics::{qr_column_pivoted, svd};
use crate::pod::{compute_pod, PodBasis};
use crate::{Real, RealMatrix};

/// How residual entries are selected for the sampled methods.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SamplingScheme {
    /// Pivoted-QR leverage sampling of the principal-component basis.
    Q,
    /// Univariate F-score ranking of residual entries against the labels.
    K,
}

/// Feature-extraction method. `m_r` is the number of principal components,
/// `n_r` the number of sampled residual entries.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureMethod {
    /// Parameters only.
    Params,
    /// Single dual-weighted residual scalar.
    DualWeightedResidual,
    /// Parameters plus the residual 2-norm.
    ParamsAndResidualNorm,
    /// Residual 2-norm only.
    ResidualNorm,
    /// Parameters plus every residual entry.
    ParamsAndResidual,
    /// Parameters plus `m_r` principal components of the centered residual.
    ParamsAndResidualPca { m_r: usize },
    /// Parameters plus `m_r` gappy principal components reconstructed from
    /// `n_r` sampled residual entries.
    ParamsAndGappyPca {
        m_r: usize,
        n_r: usize,
        sampler: SamplingScheme,
    },
    /// Parameters plus `n_r` raw (uncentered) residual samples.
    ParamsAndResidualSamples {
        n_r: usize,
        sampler: SamplingScheme,
    },
}

impl FeatureMethod {
    /// Short identifier used in configs and reports.
    pub fn label(&self) -> String {
        match self {
            FeatureMethod::Params => "params".into(),
            FeatureMethod::DualWeightedResidual => "dual-weighted".into(),
            FeatureMethod::ParamsAndResidualNorm => "params-resnorm".into(),
            FeatureMethod::ResidualNorm => "resnorm".into(),
            FeatureMethod::ParamsAndResidual => "params-residual".into(),
            FeatureMethod::ParamsAndResidualPca { m_r } => format!("params-pca-m{m_r}"),
            FeatureMethod::ParamsAndGappyPca { m_r, n_r, sampler } => {
                format!("params-gappy-{}-m{m_r}-n{n_r}", sampler_tag(*sampler))
            }
            FeatureMethod::ParamsAndResidualSamples { n_r, sampler } => {
                format!("params-samples-{}-n{n_r}", sampler_tag(*sampler))
            }
        }
    }

    /// Whether fitting requires residual snapshots.
    pub fn needs_residual(&self) -> bool {
        !matches!(
            self,
            FeatureMethod::Params | FeatureMethod::DualWeightedResidual
        )
    }

    /// Whether fitting requires a principal-component basis.
    pub fn needs_pca(&self) -> bool {
        matches!(
            self,
            FeatureMethod::ParamsAndResidualPca { .. }
                | FeatureMethod::ParamsAndGappyPca { .. }
                | FeatureMethod::ParamsAndResidualSamples {
                    sampler: SamplingScheme::Q,
                    ..
                }
        )
    }

    /// Whether extraction requires a precomputed dual-weighted residual.
    pub fn needs_dual(&self) -> bool {
        matches!(self, FeatureMethod::DualWeightedResidual)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            FeatureMethod::ParamsAndResidualPca { m_r } if m_r == 0 => Err(
                Error::InvalidArgument("number of principal components must be positive".into()),
            ),
            FeatureMethod::ParamsAndGappyPca { m_r, n_r, .. } => {
                if m_r == 0 || n_r == 0 {
                    Err(Error::InvalidArgument(
                        "component and sample counts must be positive".into(),
                    ))
                } else if m_r > n_r {
                    Err(Error::InvalidArgument(format!(
                        "gappy reconstruction needs at least as many samples as \
                         components (m_r = {m_r}, n_r = {n_r})"
                    )))
                } else {
                    Ok(())
                }
            }
            FeatureMethod::ParamsAndResidualSamples { n_r, .. } if n_r == 0 => Err(
                Error::InvalidArgument("sample count must be positive".into()),
            ),
            _ => Ok(()),
        }
    }
}

fn sampler_tag(s: SamplingScheme) -> &'static str {
    match s {
        SamplingScheme::Q => "q",
        SamplingScheme::K => "k",
    }
}

/// Selection of residual entries: `row_indices` index into the pruned
/// residual coordinate space and are distinct.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SamplingMatrix {
    pub row_indices: Vec<usize>,
    pub scheme: SamplingScheme,
}

/// One training or evaluation record: parameters, full residual vector,
/// optional dual-weighted residual, and the error label (used only when
/// fitting label-driven sampling).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FeatureSample {
    pub mu: Vec<Real>,
    pub residual: Vec<Real>,
    pub dual: Option<Real>,
    pub label: Real,
}

/// Residual vector wrapper that counts element reads, used to enforce the
/// cost contract that sampled methods touch exactly `n_r` entries.
pub struct ResidualAccessor<'a> {
    data: &'a [Real],
    reads: Cell<usize>,
}

impl<'a> ResidualAccessor<'a> {
    pub fn new(data: &'a [Real]) -> Self {
        Self {
            data,
            reads: Cell::new(0),
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, i: usize) -> Real {
        self.reads.set(self.reads.get() + 1);
        self.data[i]
    }

    /// Number of element reads performed so far.
    pub fn reads(&self) -> usize {
        self.reads.get()
    }
}

/// Divisor used when standardizing feature columns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScalingMode {
    StandardDeviation,
    Variance,
}

impl Default for ScalingMode {
    fn default() -> Self {
        ScalingMode::StandardDeviation
    }
}

/// Per-column affine normalization fitted on training rows. Constant
/// columns are dropped, so every retained scale is nonzero.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Standardizer {
    pub kept_columns: Vec<usize>,
    pub means: Vec<Real>,
    pub scales: Vec<Real>,
    pub mode: ScalingMode,
}

impl Standardizer {
    /// Fits means and scales on training rows, pruning constant columns.
    pub fn fit(rows: &[Vec<Real>], mode: ScalingMode) -> Self {
        assert!(!rows.is_empty(), "standardizer needs training rows");
        let dim = rows[0].len();
        let n = rows.len() as Real;
        let mut kept_columns = Vec::new();
        let mut means = Vec::new();
        let mut scales = Vec::new();
        for j in 0..dim {
            if rows.iter().any(|r| r[j] != rows[0][j]) {
                let mean = rows.iter().map(|r| r[j]).sum::<Real>() / n;
                let var = rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<Real>() / n;
                kept_columns.push(j);
                means.push(mean);
                scales.push(match mode {
                    ScalingMode::StandardDeviation => var.sqrt(),
                    ScalingMode::Variance => var,
                });
            }
        }
        Self {
            kept_columns,
            means,
            scales,
            mode,
        }
    }

    /// Pass-through normalization (testing and hand-built extractors).
    pub fn identity(dim: usize) -> Self {
        Self {
            kept_columns: (0..dim).collect(),
            means: vec![0.0; dim],
            scales: vec![1.0; dim],
            mode: ScalingMode::StandardDeviation,
        }
    }

    pub fn output_dim(&self) -> usize {
        self.kept_columns.len()
    }

    /// Applies the fitted normalization to one raw row.
    pub fn apply(&self, row: &[Real]) -> Vec<Real> {
        self.kept_columns
            .iter()
            .zip(self.means.iter().zip(&self.scales))
            .map(|(&j, (&m, &s))| (row[j] - m) / s)
            .collect()
    }
}

/// Fits a standardizer and returns it with the standardized training rows.
pub fn standardize_fit(rows: &[Vec<Real>], mode: ScalingMode) -> (Standardizer, Vec<Vec<Real>>) {
    let std = Standardizer::fit(rows, mode);
    let out = rows.iter().map(|r| std.apply(r)).collect();
    (std, out)
}

/// Applies a fitted standardizer to rows (test data uses training stats).
pub fn standardize_apply(std: &Standardizer, rows: &[Vec<Real>]) -> Vec<Vec<Real>> {
    rows.iter().map(|r| std.apply(r)).collect()
}

/// Centered principal-component analysis of residual snapshots with the
/// numerical rank of the centered matrix.
fn centered_pca(snapshots: &[Vec<Real>]) -> Result<(PodBasis<Real>, Vec<Real>, usize)> {
    if snapshots.is_empty() {
        return Err(Error::DegenerateSnapshots(
            "residual PCA requires at least one snapshot".into(),
        ));
    }
    let n = snapshots[0].len();
    let m = snapshots.len();
    let mut mean = vec![0.0; n];
    for s in snapshots {
        if s.len() != n {
            return Err(Error::DegenerateSnapshots(
                "residual snapshots must have equal length".into(),
            ));
        }
        for (acc, &v) in mean.iter_mut().zip(s) {
            *acc += v;
        }
    }
    for v in &mut mean {
        *v /= m as Real;
    }
    let centered: Vec<Vec<Real>> = snapshots
        .iter()
        .map(|s| s.iter().zip(&mean).map(|(&a, &b)| a - b).collect())
        .collect();
    let pod = compute_pod(&centered)?;
    let sigma_max = pod.singular_values.first().copied().unwrap_or(0.0);
    let tol = n.max(m) as Real * sigma_max * Real::EPSILON;
    let rank = pod.singular_values.iter().filter(|&&s| s > tol).count();
    Ok((pod, mean, rank))
}

/// Computes the top `m_r` principal components and the mean of residual
/// snapshots. Fails if `m_r` exceeds the numerical rank.
pub fn fit_residual_pca(snapshots: &[Vec<Real>], m_r: usize) -> Result<(RealMatrix, Vec<Real>)> {
    let (pod, mean, rank) = centered_pca(snapshots)?;
    if m_r > rank {
        return Err(Error::RankDeficient {
            requested: m_r,
            rank,
        });
    }
    Ok((pod.truncated(m_r), mean))
}

/// Selects `n_r` rows by pivoted QR of the transposed basis (leverage
/// sampling). Deterministic for a given basis.
pub fn q_sample(phi: &RealMatrix, n_r: usize) -> Result<SamplingMatrix> {
    let n = phi.rows();
    if n_r > n {
        return Err(Error::InvalidSampling(format!(
            "requested {n_r} sample rows from a basis with only {n} rows"
        )));
    }
    let qr = qr_column_pivoted(&phi.transpose())?;
    Ok(SamplingMatrix {
        row_indices: qr.pivot[..n_r].to_vec(),
        scheme: SamplingScheme::Q,
    })
}

/// Per-element F score of residual entry `i` against the labels:
/// `F_i = rho_i^2 / (1 - rho_i^2) * (N - 2)` with `rho_i` the Pearson
/// correlation. Zero-variance entries are unscoreable.
fn f_scores(snapshots: &[Vec<Real>], labels: &[Real]) -> Result<Vec<Option<Real>>> {
    let m = snapshots.len();
    if m != labels.len() {
        return Err(Error::InvalidSampling(
            "label count must match snapshot count".into(),
        ));
    }
    if m < 3 {
        return Err(Error::InvalidSampling(
            "F-score sampling requires at least 3 training pairs".into(),
        ));
    }
    let n = snapshots[0].len();
    let mf = m as Real;
    let label_mean = labels.iter().sum::<Real>() / mf;
    let label_var = labels.iter().map(|&y| (y - label_mean).powi(2)).sum::<Real>();
    let mut scores = Vec::with_capacity(n);
    for i in 0..n {
        let mean = snapshots.iter().map(|s| s[i]).sum::<Real>() / mf;
        let var = snapshots.iter().map(|s| (s[i] - mean).powi(2)).sum::<Real>();
        if var <= 0.0 || label_var <= 0.0 {
            scores.push(None);
            continue;
        }
        let cov = snapshots
            .iter()
            .zip(labels)
            .map(|(s, &y)| (s[i] - mean) * (y - label_mean))
            .sum::<Real>();
        let rho2 = (cov * cov) / (var * label_var);
        let score = if rho2 >= 1.0 {
            Real::INFINITY
        } else {
            rho2 / (1.0 - rho2) * (mf - 2.0)
        };
        scores.push(Some(score));
    }
    Ok(scores)
}

/// Selects the `n_r` residual entries most correlated with the labels,
/// ranked by univariate F score; ties break toward the lower index.
pub fn k_sample(snapshots: &[Vec<Real>], labels: &[Real], n_r: usize) -> Result<SamplingMatrix> {
    let scores = f_scores(snapshots, labels)?;
    let mut scored: Vec<(usize, Real)> = scores
        .iter()
        .enumerate()
        .filter_map(|(i, s)| s.map(|v| (i, v)))
        .collect();
    if scored.len() < n_r {
        return Err(Error::InvalidSampling(format!(
            "only {} residual entries are scoreable, {n_r} requested",
            scored.len()
        )));
    }
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(SamplingMatrix {
        row_indices: scored[..n_r].iter().map(|&(i, _)| i).collect(),
        scheme: SamplingScheme::K,
    })
}

/// Shared per-training-set state reused across a hyperparameter grid:
/// pruning map, residual mean, and a full-rank principal-component basis.
/// Fitting extractors for many `m_r` values against one context avoids
/// recomputing the decomposition.
#[derive(Clone, Debug)]
pub struct FeatureFamilyContext {
    /// Residual entries with nonzero variance across the training set.
    pub kept: Vec<usize>,
    /// Mean of the pruned training residuals.
    pub residual_mean: Vec<Real>,
    /// Full-rank centered principal components (pruned space), if fitted.
    pub pca: Option<PodBasis<Real>>,
    /// Numerical rank of the centered residual matrix.
    pub rank: usize,
    /// Full residual dimension before pruning.
    pub n_full: usize,
}

impl FeatureFamilyContext {
    /// Fits pruning, mean, and (optionally) the principal components on
    /// training samples.
    pub fn fit(samples: &[FeatureSample], with_pca: bool) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::FeatureExtraction(
                "cannot fit on an empty training set".into(),
            ));
        }
        let n_full = samples[0].residual.len();
        if samples.iter().any(|s| s.residual.len() != n_full) {
            return Err(Error::FeatureExtraction(
                "training residuals must have equal length".into(),
            ));
        }
        let kept: Vec<usize> = (0..n_full)
            .filter(|&i| samples.iter().any(|s| s.residual[i] != samples[0].residual[i]))
            .collect();
        let pruned: Vec<Vec<Real>> = samples
            .iter()
            .map(|s| kept.iter().map(|&i| s.residual[i]).collect())
            .collect();
        if with_pca && kept.is_empty() {
            return Err(Error::DegenerateSnapshots(
                "all residual entries are constant across the training set".into(),
            ));
        }
        let (pca, residual_mean, rank) = if with_pca {
            let (pod, mean, rank) = centered_pca(&pruned)?;
            (Some(pod), mean, rank)
        } else {
            let m = pruned.len() as Real;
            let mut mean = vec![0.0; kept.len()];
            for row in &pruned {
                for (acc, &v) in mean.iter_mut().zip(row) {
                    *acc += v;
                }
            }
            for v in &mut mean {
                *v /= m;
            }
            (None, mean, 0)
        };
        Ok(Self {
            kept,
            residual_mean,
            pca,
            rank,
            n_full,
        })
    }
}

/// A frozen feature extractor: method, pruning map, basis, sampling, and
/// standardization statistics. Transforming a training row reproduces the
/// fitted standardized features bit for bit.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FittedFeatureExtractor {
    pub method: FeatureMethod,
    /// Residual entries retained after zero-variance pruning.
    pub kept: Vec<usize>,
    /// Training mean of the pruned residual (centered methods).
    pub residual_mean: Vec<Real>,
    /// Truncated principal-component basis in pruned space.
    pub pca_basis: Option<RealMatrix>,
    /// Sampled entry indices in pruned space.
    pub sampling: Option<SamplingMatrix>,
    /// Pseudoinverse of the sampled basis (gappy reconstruction map).
    pub gappy_map: Option<RealMatrix>,
    pub standardizer: Standardizer,
    /// Full residual dimension expected at transform time.
    pub n_full: usize,
}

impl FittedFeatureExtractor {
    /// Fits an extractor, building its own family context.
    pub fn fit(
        method: &FeatureMethod,
        samples: &[FeatureSample],
        mode: ScalingMode,
    ) -> Result<Self> {
        let ctx = FeatureFamilyContext::fit(samples, method.needs_pca())?;
        Self::fit_with_context(method, samples, &ctx, mode)
    }

    /// Fits an extractor reusing a precomputed family context (cheap when
    /// sweeping `m_r`/`n_r` grids over the same training set).
    pub fn fit_with_context(
        method: &FeatureMethod,
        samples: &[FeatureSample],
        ctx: &FeatureFamilyContext,
        mode: ScalingMode,
    ) -> Result<Self> {
        method.validate()?;
        if samples.is_empty() {
            return Err(Error::FeatureExtraction(
                "cannot fit on an empty training set".into(),
            ));
        }
        if method.needs_dual() && samples.iter().any(|s| s.dual.is_none()) {
            return Err(Error::FeatureExtraction(
                "dual-weighted features require a dual value on every sample".into(),
            ));
        }

        let mut pca_basis = None;
        let mut sampling = None;
        let mut gappy_map = None;

        // Basis used to pick sampled entries: enough columns to make every
        // pivot meaningful, fixed across the component-count grid.
        let sampling_basis = |n_r: usize| -> Result<RealMatrix> {
            let pod = ctx.pca.as_ref().ok_or_else(|| {
                Error::FeatureExtraction("sampling requires a fitted basis".into())
            })?;
            Ok(pod.truncated(n_r.min(ctx.rank)))
        };
        let make_sampling = |n_r: usize, scheme: SamplingScheme| -> Result<SamplingMatrix> {
            if n_r > ctx.kept.len() {
                return Err(Error::InvalidSampling(format!(
                    "requested {n_r} samples but only {} residual entries remain \
                     after pruning",
                    ctx.kept.len()
                )));
            }
            match scheme {
                SamplingScheme::Q => q_sample(&sampling_basis(n_r)?, n_r),
                SamplingScheme::K => {
                    let pruned: Vec<Vec<Real>> = samples
                        .iter()
                        .map(|s| ctx.kept.iter().map(|&i| s.residual[i]).collect())
                        .collect();
                    let labels: Vec<Real> = samples.iter().map(|s| s.label).collect();
                    k_sample(&pruned, &labels, n_r)
                }
            }
        };

        match *method {
            FeatureMethod::ParamsAndResidualPca { m_r } => {
                let pod = ctx.pca.as_ref().expect("context fitted with basis");
                if m_r > ctx.rank {
                    return Err(Error::RankDeficient {
                        requested: m_r,
                        rank: ctx.rank,
                    });
                }
                pca_basis = Some(pod.truncated(m_r));
            }
            FeatureMethod::ParamsAndGappyPca { m_r, n_r, sampler } => {
                let pod = ctx.pca.as_ref().expect("context fitted with basis");
                if m_r > ctx.rank {
                    return Err(Error::RankDeficient {
                        requested: m_r,
                        rank: ctx.rank,
                    });
                }
                let phi = pod.truncated(m_r);
                let p = make_sampling(n_r, sampler)?;
                let sampled_phi = phi.select_rows(&p.row_indices);
                let map = pseudo_inverse(&sampled_phi, None)?;
                // The sampled basis must determine the coefficients: check
                // map * sampled_phi = I.
                let defect = map
                    .matmul(&sampled_phi)
                    .sub(&RealMatrix::identity(m_r))
                    .frobenius_norm();
                if !(defect < 1e-8) {
                    return Err(Error::RankDeficient {
                        requested: m_r,
                        rank: numerical_rank(&sampled_phi)?,
                    });
                }
                pca_basis = Some(phi);
                sampling = Some(p);
                gappy_map = Some(map);
            }
            FeatureMethod::ParamsAndResidualSamples { n_r, sampler } => {
                sampling = Some(make_sampling(n_r, sampler)?);
            }
            _ => {}
        }

        let mut extractor = Self {
            method: method.clone(),
            kept: ctx.kept.clone(),
            residual_mean: ctx.residual_mean.clone(),
            pca_basis,
            sampling,
            gappy_map,
            standardizer: Standardizer::identity(0), // replaced below
            n_full: ctx.n_full,
        };

        let raw_rows: Vec<Vec<Real>> = samples
            .iter()
            .map(|s| {
                let acc = ResidualAccessor::new(&s.residual);
                extractor.raw_features(&s.mu, &acc, s.dual)
            })
            .collect::<Result<_>>()?;
        extractor.standardizer = Standardizer::fit(&raw_rows, mode);
        if extractor.standardizer.output_dim() == 0 {
            return Err(Error::FeatureExtraction(
                "every assembled feature column is constant on the training set".into(),
            ));
        }
        Ok(extractor)
    }

    /// Fits and returns the standardized training matrix, computed through
    /// the same path as `transform`.
    pub fn fit_transform(
        method: &FeatureMethod,
        samples: &[FeatureSample],
        ctx: &FeatureFamilyContext,
        mode: ScalingMode,
    ) -> Result<(Self, Vec<Vec<Real>>)> {
        let extractor = Self::fit_with_context(method, samples, ctx, mode)?;
        let rows = samples
            .iter()
            .map(|s| extractor.transform_sample(s))
            .collect::<Result<_>>()?;
        Ok((extractor, rows))
    }

    /// Number of standardized features produced.
    pub fn output_dim(&self) -> usize {
        self.standardizer.output_dim()
    }

    fn raw_features(
        &self,
        mu: &[Real],
        residual: &ResidualAccessor<'_>,
        dual: Option<Real>,
    ) -> Result<Vec<Real>> {
        if self.method.needs_residual() && residual.len() != self.n_full {
            return Err(Error::DimensionMismatch {
                context: "residual length at feature extraction",
                expected: self.n_full,
                actual: residual.len(),
            });
        }
        let pruned = |out: &mut Vec<Real>| {
            out.extend(self.kept.iter().map(|&i| residual.get(i)));
        };
        let mut x = Vec::new();
        match &self.method {
            FeatureMethod::Params => x.extend_from_slice(mu),
            FeatureMethod::DualWeightedResidual => {
                let d = dual.ok_or_else(|| {
                    Error::FeatureExtraction(
                        "dual-weighted feature requested without a dual value".into(),
                    )
                })?;
                x.push(d);
            }
            FeatureMethod::ParamsAndResidualNorm => {
                x.extend_from_slice(mu);
                let mut r = Vec::new();
                pruned(&mut r);
                x.push(norm2(&r));
            }
            FeatureMethod::ResidualNorm => {
                let mut r = Vec::new();
                pruned(&mut r);
                x.push(norm2(&r));
            }
            FeatureMethod::ParamsAndResidual => {
                x.extend_from_slice(mu);
                pruned(&mut x);
            }
            FeatureMethod::ParamsAndResidualPca { .. } => {
                x.extend_from_slice(mu);
                let phi = self.pca_basis.as_ref().expect("fitted basis");
                let mut r = Vec::new();
                pruned(&mut r);
                for (v, &m) in r.iter_mut().zip(&self.residual_mean) {
                    *v -= m;
                }
                x.extend(phi.matvec_transposed(&r));
            }
            FeatureMethod::ParamsAndGappyPca { .. } => {
                x.extend_from_slice(mu);
                x.extend(self.gappy_from_accessor(residual));
            }
            FeatureMethod::ParamsAndResidualSamples { .. } => {
                x.extend_from_slice(mu);
                let p = self.sampling.as_ref().expect("fitted sampling");
                x.extend(p.row_indices.iter().map(|&j| residual.get(self.kept[j])));
            }
        }
        Ok(x)
    }

    fn gappy_from_accessor(&self, residual: &ResidualAccessor<'_>) -> Vec<Real> {
        let p = self.sampling.as_ref().expect("fitted sampling");
        let map = self.gappy_map.as_ref().expect("fitted gappy map");
        let sampled: Vec<Real> = p
            .row_indices
            .iter()
            .map(|&j| residual.get(self.kept[j]) - self.residual_mean[j])
            .collect();
        map.matvec(&sampled)
    }

    /// Standardized features for one evaluation point.
    pub fn transform(
        &self,
        mu: &[Real],
        residual: &ResidualAccessor<'_>,
        dual: Option<Real>,
    ) -> Result<Vec<Real>> {
        let raw = self.raw_features(mu, residual, dual)?;
        Ok(self.standardizer.apply(&raw))
    }

    /// Convenience wrapper over `transform` for stored samples.
    pub fn transform_sample(&self, s: &FeatureSample) -> Result<Vec<Real>> {
        let acc = ResidualAccessor::new(&s.residual);
        self.transform(&s.mu, &acc, s.dual)
    }
}

/// Gappy reconstruction coefficients of a full residual vector through a
/// fitted sampled-component extractor; reads exactly `n_r` entries.
pub fn gappy_coefficients(
    r_tilde: &[Real],
    extractor: &FittedFeatureExtractor,
) -> Result<Vec<Real>> {
    if !matches!(extractor.method, FeatureMethod::ParamsAndGappyPca { .. }) {
        return Err(Error::InvalidArgument(
            "gappy coefficients require a sampled-component extractor".into(),
        ));
    }
    if r_tilde.len() != extractor.n_full {
        return Err(Error::DimensionMismatch {
            context: "residual length for gappy coefficients",
            expected: extractor.n_full,
            actual: r_tilde.len(),
        });
    }
    let acc = ResidualAccessor::new(r_tilde);
    Ok(extractor.gappy_from_accessor(&acc))
}

fn numerical_rank(a: &RealMatrix) -> Result<usize> {
    let r = svd(a)?;
    let sigma_max = r.singular_values.first().copied().unwrap_or(0.0);
    let tol = a.rows().max(a.cols()) as Real * sigma_max * Real::EPSILON;
    Ok(r.singular_values.iter().filter(|&&s| s > tol).count())
}
