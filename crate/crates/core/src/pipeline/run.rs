//! The experiment sweep: dataset generation (cached), per-cell
//! cross-validated model selection, noise fitting, metrics, and artifact
//! emission. A cell is one (dataset method, feature instance, regressor
//! family, training size) combination; under the unique dataset method a
//! cell holds one model per approximation type plus an aggregate row.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::datasets::{
    disjoint_parameters, generate_labels, nested_subsets, sample_parameters, to_feature_samples,
    DatasetMethod, GeneratedSet, GenerationSpec, LabeledRow,
};
use crate::error::{Error, Result};
use crate::error_model::ErrorModel;
use crate::features::{FeatureMethod, FeatureSample};
use crate::metrics::{fraction_of_variance_unexplained, mean_squared_error, variance};
use crate::model_selection::{build_grid, grid_search_cv, CvRow, RegressorFamily};
use crate::pod::compute_pod;
use crate::{Real, RealMatrix};

use super::cache::{content_key, load_or_compute};
use super::config::{ExperimentPlan, FeatureInstance};
use super::derive_seed;

/// Approx label for rows built from all approximation types at once.
pub const APPROX_ALL: &str = "all";
/// Approx label for the unique-method aggregate row (mean test MSE over
/// the per-type models).
pub const APPROX_MEAN: &str = "mean-over-types";

/// One emitted result row. Metric fields are `None` when the cell failed
/// (see `status`). Wall times live in a separate timings file so metrics
/// files are byte-identical across repeated runs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MetricsRow {
    pub id: String,
    pub problem: String,
    pub dataset_method: String,
    pub approx: String,
    pub feature_base: String,
    pub sampler: Option<String>,
    pub n_r: Option<usize>,
    pub regressor_family: String,
    pub train_size: usize,
    pub train_rows: usize,
    pub status: String,
    pub chosen_feature: Option<String>,
    pub chosen_regressor: Option<String>,
    pub cv_score: Option<Real>,
    pub mse: Option<Real>,
    pub variance: Option<Real>,
    pub fvu: Option<Real>,
    pub r2: Option<Real>,
    pub noise_variance: Option<Real>,
    /// (omega, empirical coverage) pairs on the second test set.
    pub validation: Vec<(Real, Real)>,
    pub degenerate_intervals: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TimingRow {
    pub id: String,
    pub fit_seconds: Real,
    pub predict_seconds: Real,
}

/// Exact-vs-predicted error pairs on the test set for one row.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScatterData {
    pub id: String,
    pub chosen_feature: String,
    pub chosen_regressor: String,
    /// (exact error, predicted error) per test sample.
    pub pairs: Vec<(Real, Real)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CvReportFile {
    pub id: String,
    pub chosen_index: usize,
    pub rows: Vec<CvRow>,
}

/// A persisted final model with enough context to replay predictions.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub id: String,
    pub dataset_method: String,
    pub approx_index: Option<usize>,
    pub model: ErrorModel,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunSummary {
    pub problem: String,
    /// Fresh high-fidelity solves in this invocation (0 on a full cache
    /// hit).
    pub hf_solves_performed: usize,
    pub dataset_cache_hits: usize,
    pub cell_cache_hits: usize,
    pub generation_failures: usize,
    pub rows_emitted: usize,
    pub failed_rows: usize,
}

/// Generated data for the three roles plus the optional reduced basis.
pub struct Datasets {
    pub train: GeneratedSet,
    pub test: GeneratedSet,
    pub second: GeneratedSet,
    pub rom_basis: Option<RealMatrix>,
    pub hf_solves_performed: usize,
    pub cache_hits: usize,
    pub keys: DatasetKeys,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DatasetKeys {
    pub train: String,
    pub test: String,
    pub second: String,
    pub snapshots: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub problem: String,
    pub keys: DatasetKeys,
    pub n_train: usize,
    pub n_test: usize,
    pub train_rows: usize,
    pub test_rows: usize,
    pub second_rows: usize,
    pub failures: Vec<(Vec<Real>, String)>,
}

/// Everything that determines a generated dataset, hashed into its cache
/// key. Parameter vectors are included verbatim so the key is robust to
/// sampler changes.
#[derive(Serialize)]
struct DataCacheSpec<'a> {
    n_interior: usize,
    error_kind: &'a str,
    compute_dual: bool,
    solvers: Vec<String>,
    mus: &'a [Vec<Real>],
    rom_key: Option<&'a str>,
}

fn error_kind_label(plan: &ExperimentPlan) -> &'static str {
    match plan.error_kind {
        crate::datasets::ErrorKind::Qoi => "qoi",
        crate::datasets::ErrorKind::StateNorm => "state-norm",
    }
}

fn generate_role(
    plan: &ExperimentPlan,
    cache_dir: &Path,
    mus: &[Vec<Real>],
    solvers: &[crate::approximators::ApproximateSolver],
    rom_basis: Option<&RealMatrix>,
    rom_key: Option<&str>,
) -> Result<(GeneratedSet, String, bool)> {
    let spec_key = content_key(&DataCacheSpec {
        n_interior: plan.config.n_interior,
        error_kind: error_kind_label(plan),
        compute_dual: plan.compute_dual,
        solvers: solvers.iter().map(|s| s.label()).collect(),
        mus,
        rom_key,
    })?;
    let (set, cached) = load_or_compute(cache_dir, "data", &spec_key, || {
        let gen_spec = GenerationSpec {
            config: &plan.burgers,
            solvers,
            error_kind: plan.error_kind,
            compute_dual: plan.compute_dual,
            rom_basis,
        };
        Ok(generate_labels(&gen_spec, mus))
    })?;
    Ok((set, spec_key, cached))
}

/// Generates (or loads from cache) the train/test/second datasets and,
/// for the reduced-order problem, the snapshot-built basis.
pub fn generate_datasets(plan: &ExperimentPlan, out_dir: &Path) -> Result<Datasets> {
    let cache_dir = out_dir.join("cache");
    let seed = plan.config.seed;
    let mu_train = sample_parameters(&plan.domain, plan.config.data.n_train, derive_seed(seed, "mu/train"));
    let mu_test = sample_parameters(&plan.domain, plan.config.data.n_test, derive_seed(seed, "mu/test"));
    let mu_second = sample_parameters(&plan.domain, plan.config.data.n_test, derive_seed(seed, "mu/second"));
    if !disjoint_parameters(&mu_train, &mu_test)
        || !disjoint_parameters(&mu_train, &mu_second)
        || !disjoint_parameters(&mu_test, &mu_second)
    {
        return Err(Error::InvalidArgument(
            "train/test/second parameter sets must be disjoint".into(),
        ));
    }

    let mut hf = 0usize;
    let mut hits = 0usize;
    let mut tally = |set: &GeneratedSet, cached: bool| {
        if cached {
            hits += 1;
        } else {
            hf += set.hf_solves;
        }
    };

    // The reduced basis comes from a dedicated snapshot set so training
    // data generation still costs one solve per instance.
    let (rom_basis, snapshots_key) = if plan.config.problem == "burgers-rom-demo" {
        let mu_snap = sample_parameters(
            &plan.domain,
            plan.config.rom.snapshot_count,
            derive_seed(seed, "mu/rom-snapshots"),
        );
        let (snap_set, key, cached) = generate_role(plan, &cache_dir, &mu_snap, &[], None, None)?;
        tally(&snap_set, cached);
        if snap_set.high_fidelity.is_empty() {
            return Err(Error::DegenerateSnapshots(
                "no snapshot solves succeeded".into(),
            ));
        }
        let states: Vec<Vec<Real>> = snap_set
            .high_fidelity
            .iter()
            .map(|r| r.state.clone())
            .collect();
        let pod = compute_pod(&states)?;
        (Some(pod.basis), Some(key))
    } else {
        (None, None)
    };

    let (train, train_key, c1) = generate_role(
        plan,
        &cache_dir,
        &mu_train,
        &plan.solvers,
        rom_basis.as_ref(),
        snapshots_key.as_deref(),
    )?;
    tally(&train, c1);
    let (test, test_key, c2) = generate_role(
        plan,
        &cache_dir,
        &mu_test,
        &plan.solvers,
        rom_basis.as_ref(),
        snapshots_key.as_deref(),
    )?;
    tally(&test, c2);
    let (second, second_key, c3) = generate_role(
        plan,
        &cache_dir,
        &mu_second,
        &plan.solvers,
        rom_basis.as_ref(),
        snapshots_key.as_deref(),
    )?;
    tally(&second, c3);

    let datasets = Datasets {
        train,
        test,
        second,
        rom_basis,
        hf_solves_performed: hf,
        cache_hits: hits,
        keys: DatasetKeys {
            train: train_key,
            test: test_key,
            second: second_key,
            snapshots: snapshots_key,
        },
    };

    let manifest = DatasetManifest {
        problem: plan.config.problem.clone(),
        keys: datasets.keys.clone(),
        n_train: plan.config.data.n_train,
        n_test: plan.config.data.n_test,
        train_rows: datasets.train.rows.len(),
        test_rows: datasets.test.rows.len(),
        second_rows: datasets.second.rows.len(),
        failures: datasets
            .train
            .failures
            .iter()
            .chain(&datasets.test.failures)
            .chain(&datasets.second.failures)
            .cloned()
            .collect(),
    };
    std::fs::create_dir_all(out_dir)?;
    write_json(&out_dir.join("datasets.json"), &manifest)?;
    Ok(datasets)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Assembled feature dimension before pruning; bounds the k-NN feature
/// screening grid.
fn feature_dim_hint(method: &FeatureMethod, mu_dim: usize, n_full: usize) -> usize {
    match *method {
        FeatureMethod::Params => mu_dim,
        FeatureMethod::DualWeightedResidual => 1,
        FeatureMethod::ParamsAndResidualNorm => mu_dim + 1,
        FeatureMethod::ResidualNorm => 1,
        FeatureMethod::ParamsAndResidual => mu_dim + n_full,
        FeatureMethod::ParamsAndResidualPca { m_r } => mu_dim + m_r,
        FeatureMethod::ParamsAndGappyPca { m_r, .. } => mu_dim + m_r,
        FeatureMethod::ParamsAndResidualSamples { n_r, .. } => mu_dim + n_r,
    }
}

fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

/// Output of one cell (possibly several rows under the unique method).
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
struct CellOutput {
    rows: Vec<MetricsRow>,
    scatters: Vec<ScatterData>,
    cv_reports: Vec<CvReportFile>,
    models: Vec<ModelArtifact>,
    timings: Vec<TimingRow>,
}

struct SubFit<'a> {
    id: String,
    approx: String,
    approx_index: Option<usize>,
    train: Vec<FeatureSample>,
    test: Vec<FeatureSample>,
    second: Vec<FeatureSample>,
    feature: &'a FeatureInstance,
    family: RegressorFamily,
}

fn failed_row(
    plan: &ExperimentPlan,
    ds: DatasetMethod,
    sub: &SubFit<'_>,
    size: usize,
    message: String,
) -> MetricsRow {
    MetricsRow {
        id: sub.id.clone(),
        problem: plan.config.problem.clone(),
        dataset_method: ds.label().to_string(),
        approx: sub.approx.clone(),
        feature_base: sub.feature.base.clone(),
        sampler: sub.feature.sampler.clone(),
        n_r: sub.feature.n_r,
        regressor_family: sub.family.label().to_string(),
        train_size: size,
        train_rows: sub.train.len(),
        status: message,
        chosen_feature: None,
        chosen_regressor: None,
        cv_score: None,
        mse: None,
        variance: None,
        fvu: None,
        r2: None,
        noise_variance: None,
        validation: Vec::new(),
        degenerate_intervals: false,
    }
}

#[allow(clippy::too_many_arguments)]
fn fit_one(
    plan: &ExperimentPlan,
    ds: DatasetMethod,
    sub: SubFit<'_>,
    size: usize,
    out: &mut CellOutput,
) {
    let seed = plan.config.seed;
    let grid_seed = derive_seed(seed, &format!("grid/{}", sub.id));
    let cv_seed = derive_seed(seed, &format!("cv/{}", sub.id));
    let mu_dim = plan.domain.bounds.len();
    let dim_hint = feature_dim_hint(&sub.feature.method, mu_dim, plan.config.n_interior);

    let result = (|| -> Result<()> {
        if sub.train.is_empty() || sub.test.is_empty() {
            return Err(Error::InvalidArgument(
                "cell has no training or test rows".into(),
            ));
        }
        let grid = build_grid(sub.family, &sub.feature.method, sub.train.len(), dim_hint, grid_seed);
        let t0 = Instant::now();
        let outcome = grid_search_cv(&sub.train, &grid, plan.config.cv_folds, cv_seed, plan.scaling)?;
        let fit_seconds = t0.elapsed().as_secs_f64();

        let model = ErrorModel::fit(outcome.extractor, outcome.regressor, &sub.test)?;
        let t1 = Instant::now();
        let predictions: Vec<Real> = sub
            .test
            .iter()
            .map(|s| model.predict(s).map(|(m, _)| m))
            .collect::<Result<_>>()?;
        let predict_seconds = t1.elapsed().as_secs_f64();

        let targets: Vec<Real> = sub.test.iter().map(|s| s.label).collect();
        let mse = mean_squared_error(&targets, &predictions);
        let var = variance(&targets);
        let fvu = fraction_of_variance_unexplained(&targets, &predictions);
        if !fvu.is_finite() {
            return Err(Error::InvalidArgument(
                "test labels have zero variance; FVU undefined".into(),
            ));
        }
        let report = model.validation_frequencies(&sub.second, &plan.config.validation.omegas)?;

        out.rows.push(MetricsRow {
            id: sub.id.clone(),
            problem: plan.config.problem.clone(),
            dataset_method: ds.label().to_string(),
            approx: sub.approx.clone(),
            feature_base: sub.feature.base.clone(),
            sampler: sub.feature.sampler.clone(),
            n_r: sub.feature.n_r,
            regressor_family: sub.family.label().to_string(),
            train_size: size,
            train_rows: sub.train.len(),
            status: "ok".into(),
            chosen_feature: Some(outcome.chosen.feature.label()),
            chosen_regressor: Some(outcome.chosen.regressor.label()),
            cv_score: Some(outcome.report[outcome.chosen_index].mean_score),
            mse: Some(mse),
            variance: Some(var),
            fvu: Some(fvu),
            r2: Some(1.0 - fvu),
            noise_variance: Some(model.noise_variance),
            validation: report.rows,
            degenerate_intervals: report.degenerate,
        });
        out.scatters.push(ScatterData {
            id: sub.id.clone(),
            chosen_feature: outcome.chosen.feature.label(),
            chosen_regressor: outcome.chosen.regressor.label(),
            pairs: targets.iter().copied().zip(predictions).collect(),
        });
        out.cv_reports.push(CvReportFile {
            id: sub.id.clone(),
            chosen_index: outcome.chosen_index,
            rows: outcome.report,
        });
        out.timings.push(TimingRow {
            id: sub.id.clone(),
            fit_seconds,
            predict_seconds,
        });
        if plan.config.save_models {
            out.models.push(ModelArtifact {
                id: sub.id.clone(),
                dataset_method: ds.label().to_string(),
                approx_index: sub.approx_index,
                model,
            });
        }
        Ok(())
    })();

    if let Err(e) = result {
        out.rows.push(failed_row(plan, ds, &sub, size, e.to_string()));
    }
}

fn subset_rows(rows: &[LabeledRow], keep: &[bool]) -> Vec<LabeledRow> {
    rows.iter().filter(|r| keep[r.hf_index]).cloned().collect()
}

fn row_id(
    plan: &ExperimentPlan,
    ds: DatasetMethod,
    approx: &str,
    feature: &FeatureInstance,
    family: RegressorFamily,
    size: usize,
) -> String {
    let sampler = feature
        .sampler
        .as_deref()
        .map(|s| format!("-{s}"))
        .unwrap_or_default();
    format!(
        "{}_{}_{}_{}{}_{}_t{}",
        plan.config.problem,
        ds.label(),
        approx,
        feature.base,
        sampler,
        family.label(),
        size
    )
}

fn run_cell(
    plan: &ExperimentPlan,
    data: &Datasets,
    ds: DatasetMethod,
    feature: &FeatureInstance,
    family: RegressorFamily,
    size: usize,
    keep: &[bool],
) -> CellOutput {
    let mut out = CellOutput::default();
    let train_rows = subset_rows(&data.train.rows, keep);
    match ds {
        DatasetMethod::Pooled => {
            let sub = SubFit {
                id: row_id(plan, ds, APPROX_ALL, feature, family, size),
                approx: APPROX_ALL.into(),
                approx_index: None,
                train: to_feature_samples(&train_rows, None),
                test: to_feature_samples(&data.test.rows, None),
                second: to_feature_samples(&data.second.rows, None),
                feature,
                family,
            };
            fit_one(plan, ds, sub, size, &mut out);
        }
        DatasetMethod::Unique => {
            for (i, solver) in plan.solvers.iter().enumerate() {
                let sub = SubFit {
                    id: row_id(plan, ds, &solver.label(), feature, family, size),
                    approx: solver.label(),
                    approx_index: Some(i),
                    train: to_feature_samples(&train_rows, Some(i)),
                    test: to_feature_samples(&data.test.rows, Some(i)),
                    second: to_feature_samples(&data.second.rows, Some(i)),
                    feature,
                    family,
                };
                fit_one(plan, ds, sub, size, &mut out);
            }
            // Aggregate row: mean per-type test MSE against the pooled
            // test variance.
            let per_type: Vec<&MetricsRow> =
                out.rows.iter().filter(|r| r.status == "ok").collect();
            let id = row_id(plan, ds, APPROX_MEAN, feature, family, size);
            if per_type.len() == plan.solvers.len() {
                let mse =
                    per_type.iter().map(|r| r.mse.unwrap()).sum::<Real>() / per_type.len() as Real;
                let pooled: Vec<Real> = data.test.rows.iter().map(|r| r.label).collect();
                let var = variance(&pooled);
                let train_row_total: usize = per_type.iter().map(|r| r.train_rows).sum();
                if var > 0.0 {
                    let fvu = mse / var;
                    out.rows.push(MetricsRow {
                        id,
                        problem: plan.config.problem.clone(),
                        dataset_method: ds.label().to_string(),
                        approx: APPROX_MEAN.into(),
                        feature_base: feature.base.clone(),
                        sampler: feature.sampler.clone(),
                        n_r: feature.n_r,
                        regressor_family: family.label().to_string(),
                        train_size: size,
                        train_rows: train_row_total,
                        status: "ok".into(),
                        chosen_feature: None,
                        chosen_regressor: None,
                        cv_score: None,
                        mse: Some(mse),
                        variance: Some(var),
                        fvu: Some(fvu),
                        r2: Some(1.0 - fvu),
                        noise_variance: None,
                        validation: Vec::new(),
                        degenerate_intervals: false,
                    });
                }
            }
        }
    }
    out
}

/// Runs the full sweep, writing metrics, scatter data, CV reports,
/// timings, models, and a run summary under `out_dir`.
pub fn run_experiment(plan: &ExperimentPlan, out_dir: &Path) -> Result<RunSummary> {
    std::fs::create_dir_all(out_dir)?;
    let data = generate_datasets(plan, out_dir)?;
    let n_instances = data.train.high_fidelity.len();
    if *plan.train_sizes.last().unwrap() > n_instances {
        return Err(Error::InvalidArgument(format!(
            "training ladder needs {} instances but only {} solves succeeded",
            plan.train_sizes.last().unwrap(),
            n_instances
        )));
    }
    let subsets = nested_subsets(
        n_instances,
        &plan.train_sizes,
        derive_seed(plan.config.seed, "subsets"),
    )?;

    let cache_dir = out_dir.join("cache");
    let mut all = CellOutput::default();
    let mut cell_hits = 0usize;
    for &ds in &plan.dataset_methods {
        for feature in &plan.features {
            for &family in &plan.families {
                for (si, &size) in plan.train_sizes.iter().enumerate() {
                    let mut keep = vec![false; n_instances];
                    for &i in &subsets[si] {
                        keep[i] = true;
                    }
                    let cell_key = content_key(&(
                        &data.keys,
                        ds.label(),
                        &feature.method,
                        family.label(),
                        size,
                        plan.config.cv_folds,
                        plan.config.scaling.as_str(),
                        &plan.config.validation.omegas,
                        plan.config.seed,
                        plan.config.save_models,
                    ))?;
                    let (cell, cached) = load_or_compute(&cache_dir, "cell", &cell_key, || {
                        Ok(run_cell(plan, &data, ds, feature, family, size, &keep))
                    })?;
                    if cached {
                        cell_hits += 1;
                    }
                    all.rows.extend(cell.rows);
                    all.scatters.extend(cell.scatters);
                    all.cv_reports.extend(cell.cv_reports);
                    all.models.extend(cell.models);
                    all.timings.extend(cell.timings);
                }
            }
        }
    }

    write_json(&out_dir.join("metrics.json"), &all.rows)?;
    write_json(&out_dir.join("timings.json"), &all.timings)?;
    let scatter_dir = out_dir.join("scatter");
    std::fs::create_dir_all(&scatter_dir)?;
    for s in &all.scatters {
        write_json(&scatter_dir.join(format!("{}.json", sanitize(&s.id))), s)?;
    }
    let cv_dir = out_dir.join("cv");
    std::fs::create_dir_all(&cv_dir)?;
    for r in &all.cv_reports {
        write_json(&cv_dir.join(format!("{}.json", sanitize(&r.id))), r)?;
    }
    if plan.config.save_models {
        let model_dir = out_dir.join("models");
        std::fs::create_dir_all(&model_dir)?;
        for m in &all.models {
            write_json(&model_dir.join(format!("{}.json", sanitize(&m.id))), m)?;
        }
    }

    let summary = RunSummary {
        problem: plan.config.problem.clone(),
        hf_solves_performed: data.hf_solves_performed,
        dataset_cache_hits: data.cache_hits,
        cell_cache_hits: cell_hits,
        generation_failures: data.train.failures.len()
            + data.test.failures.len()
            + data.second.failures.len(),
        rows_emitted: all.rows.len(),
        failed_rows: all.rows.iter().filter(|r| r.status != "ok").count(),
    };
    write_json(&out_dir.join("run_summary.json"), &summary)?;
    Ok(summary)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PredictionFile {
    pub id: String,
    /// (exact error, predicted mean, predicted variance) per sample of
    /// the second test set.
    pub rows: Vec<(Real, Real, Real)>,
}

/// Replays every persisted model on the second test set.
pub fn predict_all(plan: &ExperimentPlan, out_dir: &Path) -> Result<usize> {
    let model_dir = out_dir.join("models");
    if !model_dir.is_dir() {
        return Err(Error::InvalidArgument(format!(
            "no models directory at {}; run `train` first",
            model_dir.display()
        )));
    }
    let data = generate_datasets(plan, out_dir)?;
    let pred_dir = out_dir.join("predictions");
    std::fs::create_dir_all(&pred_dir)?;
    let mut paths: Vec<_> = std::fs::read_dir(&model_dir)?
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    let mut count = 0usize;
    for path in paths {
        let artifact: ModelArtifact = serde_json::from_str(&std::fs::read_to_string(&path)?)?;
        let samples = to_feature_samples(&data.second.rows, artifact.approx_index);
        let rows = samples
            .iter()
            .map(|s| artifact.model.predict(s).map(|(m, v)| (s.label, m, v)))
            .collect::<Result<Vec<_>>>()?;
        write_json(
            &pred_dir.join(format!("{}.json", sanitize(&artifact.id))),
            &PredictionFile {
                id: artifact.id,
                rows,
            },
        )?;
        count += 1;
    }
    Ok(count)
}
