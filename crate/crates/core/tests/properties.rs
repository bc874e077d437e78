//! Randomized property checks of the numerical building blocks: basis
//! construction, gappy reconstruction, analytic derivatives, optimizer
//! feasibility, exact-fit guarantees, cross-validation hygiene, and
//! end-to-end determinism of the sweep pipeline.

use errmodel::burgers::{burgers_jacobian, burgers_residual, BurgersConfig};
use errmodel::features::{
    gappy_coefficients, FeatureFamilyContext, FeatureMethod, FeatureSample,
    FittedFeatureExtractor, SamplingScheme, ScalingMode,
};
use errmodel::metrics::mean_squared_error;
use errmodel::model_selection::{fold_features, kfold_split};
use errmodel::numerics::{qr_column_pivoted, DenseMatrix};
use errmodel::pipeline::ExperimentConfig;
use errmodel::pod::compute_pod;
use errmodel::regression::{
    self, ann_loss_and_gradient, ann_parameter_count, Activation, FittedModel, KnnWeights,
    RegressionSpec,
};

type Real = f64;
type RealMatrix = DenseMatrix<Real>;

fn lcg(state: &mut u64) -> Real {
    *state = state
        .wrapping_mul(6364136223846793005)
        .wrapping_add(1442695040888963407);
    ((*state >> 11) as Real / (1u64 << 53) as Real) * 2.0 - 1.0
}

fn random_matrix(rows: usize, cols: usize, state: &mut u64) -> RealMatrix {
    let data: Vec<Real> = (0..rows * cols).map(|_| lcg(state)).collect();
    RealMatrix::from_vec(rows, cols, data)
}

fn orthonormality_defect(m: &RealMatrix) -> Real {
    m.transpose()
        .matmul(m)
        .sub(&RealMatrix::identity(m.cols()))
        .frobenius_norm()
}

/// Jacobi eigendecomposition of a small symmetric matrix; independent of
/// the SVD used by the basis construction.
fn symmetric_eigenvalues(a: &RealMatrix) -> Vec<Real> {
    let n = a.rows();
    let mut m = a.clone();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[(i, j)] * m[(i, j)];
            }
        }
        if off.sqrt() < 1e-14 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * m[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut eig: Vec<Real> = (0..n).map(|i| m[(i, i)]).collect();
    eig.sort_by(|a, b| b.partial_cmp(a).unwrap());
    eig
}

/// 100 random snapshot sets: the computed basis is orthonormal to 1e-10,
/// the cumulative energies are monotone and end at one, and both the
/// singular values and energies match an independent method-of-snapshots
/// eigendecomposition of the Gram matrix to 1e-8.
#[test]
fn pod_orthonormal_and_matches_method_of_snapshots() {
    let mut state = 0x9e3779b97f4a7c15u64;
    for case in 0..100 {
        let n = 5 + (case % 30);
        let m = 1 + (case % 9);
        let snapshots: Vec<Vec<Real>> = (0..m)
            .map(|_| (0..n).map(|_| lcg(&mut state)).collect())
            .collect();
        let pod = compute_pod(&snapshots).unwrap();
        assert!(
            orthonormality_defect(&pod.basis) < 1e-10,
            "case {case}: basis not orthonormal"
        );
        for w in pod.energies.windows(2) {
            assert!(w[1] >= w[0] - 1e-15, "case {case}: energies not monotone");
        }
        assert!((pod.energies.last().unwrap() - 1.0).abs() < 1e-12);

        let s = RealMatrix::from_columns(&snapshots);
        let gram = s.transpose().matmul(&s);
        let eig = symmetric_eigenvalues(&gram);
        let total: Real = eig.iter().sum();
        let mut running = 0.0;
        // The basis retains min(n, m) modes; surplus Gram eigenvalues are
        // zero up to rounding.
        for (i, &lambda) in eig.iter().take(pod.len()).enumerate() {
            running += lambda;
            assert!(
                (pod.singular_values[i] - lambda.max(0.0).sqrt()).abs() < 1e-8,
                "case {case}: sigma {i}"
            );
            assert!(
                (pod.energies[i] - running / total).abs() < 1e-8,
                "case {case}: energy {i}"
            );
        }
    }
}

/// 1000 random cases: a residual lying in the span of the training
/// residuals is recovered exactly from its sampled entries, and the fitted
/// reconstruction map is a left inverse of the sampled basis to 1e-8.
#[test]
fn gappy_reconstruction_exact_in_span() {
    let mut state = 0x243f6a8885a308d3u64;
    for case in 0..1000 {
        let n = 12 + (case % 20); // full residual dimension
        let m = 2 + (case % 4); // span dimension
        let n_r = m + (case % 3); // sampled entries
        let n_train = m + 3;
        // Ground-truth span and affine offset for the training residuals.
        let basis = random_matrix(n, m, &mut state);
        let offset: Vec<Real> = (0..n).map(|_| lcg(&mut state)).collect();
        let residual_of = |c: &[Real]| -> Vec<Real> {
            let mut r = basis.matvec(c);
            for (ri, &o) in r.iter_mut().zip(&offset) {
                *ri += o;
            }
            r
        };
        let samples: Vec<FeatureSample> = (0..n_train)
            .map(|_| {
                let c: Vec<Real> = (0..m).map(|_| lcg(&mut state)).collect();
                FeatureSample {
                    mu: vec![lcg(&mut state)],
                    residual: residual_of(&c),
                    dual: None,
                    label: lcg(&mut state),
                }
            })
            .collect();
        let sampler = if case % 2 == 0 {
            SamplingScheme::Q
        } else {
            SamplingScheme::K
        };
        let method = FeatureMethod::ParamsAndGappyPca {
            m_r: m,
            n_r,
            sampler,
        };
        let extractor =
            FittedFeatureExtractor::fit(&method, &samples, ScalingMode::StandardDeviation)
                .unwrap();

        // Left-inverse property of the reconstruction map.
        let phi = extractor.pca_basis.as_ref().unwrap();
        let sampled_phi = phi.select_rows(&extractor.sampling.as_ref().unwrap().row_indices);
        let defect = extractor
            .gappy_map
            .as_ref()
            .unwrap()
            .matmul(&sampled_phi)
            .sub(&RealMatrix::identity(m))
            .frobenius_norm();
        assert!(defect < 1e-8, "case {case}: left-inverse defect {defect}");

        // Exact recovery of a fresh in-span residual from n_r entries.
        let c: Vec<Real> = (0..m).map(|_| 2.0 * lcg(&mut state)).collect();
        let fresh = residual_of(&c);
        let coeffs = gappy_coefficients(&fresh, &extractor).unwrap();
        let mut reconstructed = phi.matvec(&coeffs);
        for (v, &mean) in reconstructed.iter_mut().zip(&extractor.residual_mean) {
            *v += mean;
        }
        let scale = fresh.iter().fold(1.0_f64, |a, &b| a.max(b.abs()));
        for (&rec, &idx) in reconstructed.iter().zip(&extractor.kept) {
            assert!(
                (rec - fresh[idx]).abs() < 1e-8 * scale,
                "case {case}: entry {idx} reconstructed {rec}, exact {}",
                fresh[idx]
            );
        }
    }
}

/// 20 random states and parameters: the analytic Jacobian of the discrete
/// system matches central finite differences of the residual to a relative
/// accuracy of 1e-6 along random directions.
#[test]
fn jacobian_matches_finite_differences() {
    let cfg = BurgersConfig::new(25).unwrap();
    let mut state = 0xb7e151628aed2a6bu64;
    for case in 0..20 {
        let mu = [
            lcg(&mut state).abs() * 1.9 + 0.1,
            lcg(&mut state).abs() * 2.0 + 0.1,
            50.0 + 950.0 * lcg(&mut state).abs(),
        ];
        let v: Vec<Real> = (0..25).map(|_| lcg(&mut state)).collect();
        let j = burgers_jacobian(&v, &mu, &cfg);
        let vnorm: Real = v.iter().map(|a| a * a).sum::<Real>().sqrt();
        let h = 1e-6 * (1.0 + vnorm);
        for _dir in 0..5 {
            let d: Vec<Real> = (0..25).map(|_| lcg(&mut state)).collect();
            let vp: Vec<Real> = v.iter().zip(&d).map(|(a, b)| a + h * b).collect();
            let vm: Vec<Real> = v.iter().zip(&d).map(|(a, b)| a - h * b).collect();
            let rp = burgers_residual(&vp, &mu, &cfg);
            let rm = burgers_residual(&vm, &mu, &cfg);
            let jd = j.matvec(&d);
            let mut num = 0.0;
            let mut den = 0.0;
            for i in 0..25 {
                let fd = (rp[i] - rm[i]) / (2.0 * h);
                num += (jd[i] - fd) * (jd[i] - fd);
                den += jd[i] * jd[i];
            }
            assert!(
                num.sqrt() / den.sqrt().max(1e-12) < 1e-6,
                "case {case}: Jacobian/finite-difference mismatch"
            );
        }
    }
}

/// 10 random networks: the backpropagation gradient of the training
/// objective matches central finite differences to a relative accuracy of
/// 1e-6 in every coordinate.
#[test]
fn ann_gradient_matches_finite_differences() {
    let mut state = 0x13198a2e03707344u64;
    let activations = [
        Activation::Identity,
        Activation::Logistic,
        Activation::Tanh,
        Activation::Relu,
    ];
    for case in 0..10 {
        let d = 2 + (case % 3);
        let h = 3 + (case % 4);
        let n = 6 + (case % 5);
        let act = activations[case % 4];
        let alpha = [0.0, 1e-4, 0.3][case % 3];
        let x: Vec<Vec<Real>> = (0..n)
            .map(|_| (0..d).map(|_| lcg(&mut state)).collect())
            .collect();
        let y: Vec<Real> = (0..n).map(|_| lcg(&mut state)).collect();
        // Offset keeps ReLU pre-activations away from the kink.
        let params: Vec<Real> = (0..ann_parameter_count(d, h))
            .map(|_| lcg(&mut state) + 0.1)
            .collect();
        let (_, grad) = ann_loss_and_gradient(&params, &x, &y, act, alpha, h);
        let eps = 1e-6;
        for i in 0..params.len() {
            let mut p = params.clone();
            p[i] += eps;
            let (fp, _) = ann_loss_and_gradient(&p, &x, &y, act, alpha, h);
            p[i] -= 2.0 * eps;
            let (fm, _) = ann_loss_and_gradient(&p, &x, &y, act, alpha, h);
            let fd = (fp - fm) / (2.0 * eps);
            let scale = grad[i].abs().max(fd.abs()).max(1e-8);
            // Below 1e-9 the central difference itself is dominated by
            // truncation and rounding noise.
            assert!(
                (grad[i] - fd).abs() < 1e-9 || (grad[i] - fd).abs() / scale < 1e-6,
                "case {case}: parameter {i} analytic {} vs finite-difference {fd}",
                grad[i]
            );
        }
    }
}

/// 50 random support-vector fits: the reported working-set violation is at
/// most 1e-6, the dual coefficients sum to zero (equality constraint), and
/// no coefficient breaches its box bound.
#[test]
fn svr_fits_satisfy_kkt_conditions() {
    let mut state = 0xa4093822299f31d0u64;
    for case in 0..50 {
        let n = 10 + (case % 30);
        let d = 1 + (case % 4);
        let x: Vec<Vec<Real>> = (0..n)
            .map(|_| (0..d).map(|_| lcg(&mut state)).collect())
            .collect();
        let y: Vec<Real> = x
            .iter()
            .map(|r| r.iter().sum::<Real>().sin() + 0.1 * lcg(&mut state))
            .collect();
        let c = [0.1, 1.0, 10.0, 100.0][case % 4];
        let epsilon = [0.0, 0.01, 0.1][case % 3];
        let spec = if case % 2 == 0 {
            RegressionSpec::SvrLinear { c, epsilon }
        } else {
            RegressionSpec::SvrRbf {
                c,
                epsilon,
                gamma: [0.1, 1.0, 10.0][case % 3],
            }
        };
        let fitted = regression::fit(&spec, &x, &y).unwrap();
        let FittedModel::Svr(model) = &fitted.model else {
            panic!("expected a support-vector model");
        };
        assert!(
            model.kkt_violation <= 1e-6,
            "case {case}: violation {}",
            model.kkt_violation
        );
        let (sum, breach) = model.dual_feasibility(c);
        assert!(sum.abs() <= 1e-9 * c * n as Real, "case {case}: sum {sum}");
        assert!(breach <= 1e-12 * c, "case {case}: box breach {breach}");
    }
}

/// A one-nearest-neighbor model reproduces every training label exactly
/// when the training inputs are distinct.
#[test]
fn knn_one_neighbor_has_zero_training_error() {
    let mut state = 0x082efa98ec4e6c89u64;
    for case in 0..20 {
        let n = 5 + (case % 25);
        let d = 1 + (case % 3);
        let x: Vec<Vec<Real>> = (0..n)
            .map(|i| {
                let mut row: Vec<Real> = (0..d).map(|_| lcg(&mut state)).collect();
                row[0] += i as Real; // guarantees distinct rows
                row
            })
            .collect();
        let y: Vec<Real> = (0..n).map(|_| lcg(&mut state)).collect();
        let spec = RegressionSpec::Knn {
            k: 1,
            weights: if case % 2 == 0 {
                KnnWeights::Uniform
            } else {
                KnnWeights::InverseDistance
            },
            n_kept_features: None,
        };
        let model = regression::fit(&spec, &x, &y).unwrap();
        for (row, &label) in x.iter().zip(&y) {
            let p = model.predict_one(row).unwrap();
            assert_eq!(p, label, "case {case}");
        }
    }
}

/// Quadratic least squares reproduces an exactly quadratic target to a
/// training mean squared error of 1e-10.
#[test]
fn quadratic_least_squares_is_exact_on_quadratics() {
    let mut state = 0x452821e638d01377u64;
    for case in 0..20 {
        let d = 1 + (case % 4);
        let n = 3 * (1 + d + d * (d + 1) / 2);
        // Random quadratic: constant + linear + full quadratic form.
        let c0 = lcg(&mut state);
        let lin: Vec<Real> = (0..d).map(|_| lcg(&mut state)).collect();
        let quad: Vec<Vec<Real>> = (0..d)
            .map(|_| (0..d).map(|_| lcg(&mut state)).collect())
            .collect();
        let target = |r: &[Real]| -> Real {
            let mut v = c0;
            for i in 0..d {
                v += lin[i] * r[i];
                for j in 0..d {
                    v += quad[i][j] * r[i] * r[j];
                }
            }
            v
        };
        let x: Vec<Vec<Real>> = (0..n)
            .map(|_| (0..d).map(|_| 2.0 * lcg(&mut state)).collect())
            .collect();
        let y: Vec<Real> = x.iter().map(|r| target(r)).collect();
        let model = regression::fit(&RegressionSpec::OlsQuadratic, &x, &y).unwrap();
        let pred: Vec<Real> = x.iter().map(|r| model.predict_one(r).unwrap()).collect();
        let mse = mean_squared_error(&y, &pred);
        assert!(mse <= 1e-10, "case {case}: training MSE {mse}");
    }
}

/// Mutation check against validation leakage: drastically perturbing the
/// validation rows of a fold leaves the fold-fitted features and model
/// bit-identical, through the same code path the grid search uses.
#[test]
fn cross_validation_ignores_validation_rows() {
    let mut state = 0xbe5466cf34e90c6cu64;
    let mut samples: Vec<FeatureSample> = (0..25)
        .map(|_| {
            let mu = vec![lcg(&mut state), lcg(&mut state), lcg(&mut state)];
            let residual: Vec<Real> = (0..8).map(|_| lcg(&mut state)).collect();
            let label = 2.0 * mu[0] + 0.01 * lcg(&mut state);
            FeatureSample {
                mu,
                residual,
                dual: None,
                label,
            }
        })
        .collect();
    let folds = kfold_split(samples.len(), 5, 17).unwrap();

    for method in [
        FeatureMethod::Params,
        FeatureMethod::ParamsAndResidualPca { m_r: 2 },
        FeatureMethod::ParamsAndGappyPca {
            m_r: 2,
            n_r: 4,
            sampler: SamplingScheme::Q,
        },
        FeatureMethod::ParamsAndResidualSamples {
            n_r: 3,
            sampler: SamplingScheme::K,
        },
    ] {
        let val_idx = folds[0].clone();
        let train_idx: Vec<usize> = (0..samples.len())
            .filter(|i| !val_idx.contains(i))
            .collect();
        let train: Vec<FeatureSample> = train_idx.iter().map(|&i| samples[i].clone()).collect();
        let ctx = FeatureFamilyContext::fit(&train, method.needs_pca()).unwrap();
        let (_, tx1, _) = fold_features(
            &samples,
            &train_idx,
            &val_idx,
            &method,
            &ctx,
            ScalingMode::StandardDeviation,
        )
        .unwrap();

        // Corrupt every validation row.
        let mut mutated = samples.clone();
        for &i in &val_idx {
            mutated[i].label = 1e6 + mutated[i].label * -17.0;
            for v in &mut mutated[i].residual {
                *v = *v * -3.5 + 42.0;
            }
            for v in &mut mutated[i].mu {
                *v += 100.0;
            }
        }
        let (_, tx2, _) = fold_features(
            &mutated,
            &train_idx,
            &val_idx,
            &method,
            &ctx,
            ScalingMode::StandardDeviation,
        )
        .unwrap();
        for (a, b) in tx1.iter().flatten().zip(tx2.iter().flatten()) {
            assert_eq!(a.to_bits(), b.to_bits(), "{}", method.label());
        }

        // The downstream model is likewise unchanged.
        let y1: Vec<Real> = train_idx.iter().map(|&i| samples[i].label).collect();
        let y2: Vec<Real> = train_idx.iter().map(|&i| mutated[i].label).collect();
        assert_eq!(y1, y2);
        let m1 = regression::fit(&RegressionSpec::OlsLinear, &tx1, &y1).unwrap();
        let m2 = regression::fit(&RegressionSpec::OlsLinear, &tx2, &y2).unwrap();
        let probe = vec![0.25; m1.input_dim];
        assert_eq!(
            m1.predict_one(&probe).unwrap().to_bits(),
            m2.predict_one(&probe).unwrap().to_bits(),
            "{}",
            method.label()
        );
    }

    // Keep the borrow checker honest about the original samples.
    samples.truncate(25);
}

const DETERMINISM_CONFIG: &str = r#"
problem = "burgers-inexact"
seed = 90210
n_interior = 199
regressors = ["ols-linear", "knn"]

[data]
n_train = 12
n_test = 10
dataset_methods = ["pooled", "unique"]

[[solvers]]
kind = "inexact-newton"
k = 1

[[solvers]]
kind = "inexact-newton"
k = 2

[[features]]
method = "params"

[[features]]
method = "params-gappy"
samplers = ["q"]
n_r = [5]
"#;

/// Two full sweeps of the same configuration into fresh output
/// directories produce byte-identical metrics files.
#[test]
fn repeated_sweeps_are_byte_identical() {
    let plan = ExperimentConfig::from_toml(DETERMINISM_CONFIG)
        .unwrap()
        .plan()
        .unwrap();
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    errmodel::pipeline::run_experiment(&plan, dir_a.path()).unwrap();
    errmodel::pipeline::run_experiment(&plan, dir_b.path()).unwrap();
    let a = std::fs::read(dir_a.path().join("metrics.json")).unwrap();
    let b = std::fs::read(dir_b.path().join("metrics.json")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b, "metrics files differ between identical sweeps");
}
