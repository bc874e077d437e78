//! Generators of approximate solutions on the high-fidelity grid.
//!
//! Three families: truncated Newton iterates (inexact solutions),
//! prolongated coarse-mesh solves (lower-fidelity models), and
//! POD-Galerkin reduced-order models. Each returns the approximate state
//! together with its high-fidelity residual and quantity of interest,
//! which downstream feature extraction consumes.

use serde::{Deserialize, Serialize};

use crate::burgers::{
    linear_initial_guess, newton_solve, qoi_slope, solve_burgers, AntisymmetricBurgersModel,
    BurgersConfig, BurgersModel, NonlinearModel, PARAM_UA,
};
use crate::error::{Error, Result};
use crate::numerics::matrix::norm2;
use crate::numerics::solve_dense;
use crate::{Real, RealMatrix};

/// Tolerance used for "exact" nonlinear solves backing the approximators
/// (coarse-mesh and reduced-order systems).
pub const SOLVE_TOL: Real = 1e-10;
pub const SOLVE_MAX_ITER: usize = 50;

/// One of the approximate-solution families.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub enum ApproximateSolver {
    /// Stop Newton after exactly `k` iterations from the linear guess.
    InexactNewton { k: usize },
    /// Solve on a coarser equispaced grid, then interpolate to the fine
    /// grid.
    CoarseProlongation { n_coarse: usize },
    /// POD-Galerkin reduced-order model with `m_u` basis vectors.
    GalerkinRom { m_u: usize },
}

impl ApproximateSolver {
    /// Short stable identifier used in reports and cache keys.
    pub fn label(&self) -> String {
        match self {
            ApproximateSolver::InexactNewton { k } => format!("newton-k{k}"),
            ApproximateSolver::CoarseProlongation { n_coarse } => format!("coarse-{n_coarse}"),
            ApproximateSolver::GalerkinRom { m_u } => format!("rom-m{m_u}"),
        }
    }
}

/// Approximate state with its fine-grid residual and QoI value.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ApproxResult {
    pub state: Vec<Real>,
    pub residual: Vec<Real>,
    pub qoi: Real,
}

impl ApproxResult {
    fn checked(state: Vec<Real>, residual: Vec<Real>, qoi: Real) -> Result<Self> {
        let finite = qoi.is_finite()
            && state.iter().all(|x| x.is_finite())
            && residual.iter().all(|x| x.is_finite());
        if !finite {
            return Err(Error::NonFinite {
                context: "approximate solution",
            });
        }
        Ok(Self {
            state,
            residual,
            qoi,
        })
    }
}

fn finish(state: Vec<Real>, mu: &[Real], config: &BurgersConfig) -> Result<ApproxResult> {
    let model = BurgersModel::new(*config);
    let residual = model.residual(&state, mu);
    let qoi = qoi_slope(&state, config)?;
    ApproxResult::checked(state, residual, qoi)
}

/// The K-th Newton iterate from the linear initial guess.
///
/// Iterations run undamped in the antisymmetric half-space (see
/// [`AntisymmetricBurgersModel`]); no convergence is required — the point
/// is precisely the error left after `k` iterations.
pub fn inexact_solution(mu: &[Real], k: usize, config: &BurgersConfig) -> Result<ApproxResult> {
    if k == 0 {
        return Err(Error::InvalidArgument(
            "inexact solution requires at least one Newton iteration".into(),
        ));
    }
    let reduced = AntisymmetricBurgersModel::new(*config)?;
    let w0 = reduced.restrict(&linear_initial_guess(mu, config));
    // tol = 0 never triggers the residual test early except at an exact
    // root, so exactly k iterations are taken.
    let run = newton_solve(&reduced, mu, &w0, 1.0, 0.0, k)?;
    finish(reduced.expand(&run.state), mu, config)
}

/// Coarse-grid node coordinates including boundaries.
fn coarse_nodes(n_coarse: usize) -> impl Iterator<Item = Real> {
    let dx = 1.0 / (n_coarse as Real + 1.0);
    (0..n_coarse + 2).map(move |j| j as Real * dx)
}

/// Piecewise-linear interpolation of a coarse solution (with boundary
/// values attached) onto the fine interior nodes.
pub fn prolongate(
    coarse_interior: &[Real],
    mu: &[Real],
    fine_config: &BurgersConfig,
) -> Vec<Real> {
    let n_coarse = coarse_interior.len();
    let u_a = mu[PARAM_UA];
    let mut xs: Vec<Real> = coarse_nodes(n_coarse).collect();
    let mut us = Vec::with_capacity(n_coarse + 2);
    us.push(u_a);
    us.extend_from_slice(coarse_interior);
    us.push(-u_a);
    // Guard against rounding at the right endpoint.
    if let Some(last) = xs.last_mut() {
        *last = 1.0;
    }
    let mut out = Vec::with_capacity(fine_config.n_interior);
    let mut seg = 0usize;
    for i in 0..fine_config.n_interior {
        let x = fine_config.node(i);
        while seg + 2 < xs.len() && xs[seg + 1] < x {
            seg += 1;
        }
        let (x0, x1) = (xs[seg], xs[seg + 1]);
        let t = (x - x0) / (x1 - x0);
        out.push(us[seg] + t * (us[seg + 1] - us[seg]));
    }
    out
}

/// Converged coarse-mesh solve prolongated to the fine grid.
pub fn coarse_solution(
    mu: &[Real],
    n_coarse: usize,
    fine_config: &BurgersConfig,
) -> Result<ApproxResult> {
    if n_coarse >= fine_config.n_interior {
        return Err(Error::InvalidArgument(format!(
            "coarse grid ({n_coarse}) must be strictly coarser than the fine grid ({})",
            fine_config.n_interior
        )));
    }
    let coarse_config = BurgersConfig::new(n_coarse)?;
    let solve = solve_burgers(&coarse_config, mu, SOLVE_TOL, SOLVE_MAX_ITER)?;
    if !solve.converged {
        return Err(Error::NewtonFailure {
            iteration: solve.history.len() - 1,
            reason: format!("coarse solve (n = {n_coarse}) did not converge"),
        });
    }
    let fine_state = prolongate(&solve.state, mu, fine_config);
    finish(fine_state, mu, fine_config)
}

/// POD-Galerkin reduced-order solve: find û with
/// `Phi^T r(Phi û + ū; mu) = 0`, returning the reconstructed state and
/// its full-dimension residual.
pub fn galerkin_rom_solution(
    model: &dyn NonlinearModel,
    mu: &[Real],
    basis: &RealMatrix,
    m_u: usize,
    u_ref: &[Real],
    config: &BurgersConfig,
) -> Result<ApproxResult> {
    if m_u == 0 || m_u > basis.cols() {
        return Err(Error::InvalidArgument(format!(
            "ROM dimension {m_u} out of range 1..={}",
            basis.cols()
        )));
    }
    let phi = basis.truncate_cols(m_u);
    let run = reduced_newton(model, mu, &phi, u_ref, 1.0, SOLVE_TOL, SOLVE_MAX_ITER)
        .or_else(|_| reduced_newton(model, mu, &phi, u_ref, 0.5, SOLVE_TOL, SOLVE_MAX_ITER))?;
    finish(run, mu, config)
}

fn reduced_newton(
    model: &dyn NonlinearModel,
    mu: &[Real],
    phi: &RealMatrix,
    u_ref: &[Real],
    step: Real,
    tol: Real,
    max_iter: usize,
) -> Result<Vec<Real>> {
    let m = phi.cols();
    let mut coeffs = vec![0.0; m];
    let reconstruct = |c: &[Real]| -> Vec<Real> {
        let mut v = phi.matvec(c);
        for (vi, &ri) in v.iter_mut().zip(u_ref) {
            *vi += ri;
        }
        v
    };
    let mut state = reconstruct(&coeffs);
    let mut reduced_res = phi.matvec_transposed(&model.residual(&state, mu));
    let ref_norm = norm2(&reduced_res).max(Real::MIN_POSITIVE);
    for iter in 0..max_iter {
        if norm2(&reduced_res) <= tol * ref_norm {
            return Ok(state);
        }
        // Reduced Jacobian Phi^T J Phi, column by column.
        let mut jr = RealMatrix::zeros(m, m);
        for j in 0..m {
            let col = phi.column(j);
            let jphi = model.jacobian_matvec(&state, mu, &col);
            let proj = phi.matvec_transposed(&jphi);
            for i in 0..m {
                jr[(i, j)] = proj[i];
            }
        }
        let delta = solve_dense(&jr, &reduced_res).map_err(|e| Error::RomFailure {
            m_u: m,
            reason: format!("iteration {iter}: {e}"),
        })?;
        for (c, d) in coeffs.iter_mut().zip(&delta) {
            *c -= step * d;
        }
        state = reconstruct(&coeffs);
        reduced_res = phi.matvec_transposed(&model.residual(&state, mu));
        if !norm2(&reduced_res).is_finite() {
            return Err(Error::RomFailure {
                m_u: m,
                reason: format!("diverged at iteration {iter}"),
            });
        }
    }
    if norm2(&reduced_res) <= tol * ref_norm {
        Ok(state)
    } else {
        Err(Error::RomFailure {
            m_u: m,
            reason: format!("no convergence in {max_iter} iterations"),
        })
    }
}

/// Dispatches to the family-specific generator. ROM solves need a basis,
/// supplied by the caller.
pub fn approximate_solution(
    solver: &ApproximateSolver,
    mu: &[Real],
    config: &BurgersConfig,
    rom_basis: Option<&RealMatrix>,
) -> Result<ApproxResult> {
    match solver {
        ApproximateSolver::InexactNewton { k } => inexact_solution(mu, *k, config),
        ApproximateSolver::CoarseProlongation { n_coarse } => {
            coarse_solution(mu, *n_coarse, config)
        }
        ApproximateSolver::GalerkinRom { m_u } => {
            let basis = rom_basis.ok_or_else(|| {
                Error::InvalidArgument("ROM solver requires a POD basis".into())
            })?;
            let model = BurgersModel::new(*config);
            let u_ref = vec![0.0; config.n_interior];
            galerkin_rom_solution(&model, mu, basis, *m_u, &u_ref, config)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::burgers::SlopeQoi;
    use crate::burgers::QoiFunctional;
    use crate::pod::compute_pod;

    fn slope(v: &[Real], cfg: &BurgersConfig) -> Real {
        SlopeQoi::new(*cfg).unwrap().evaluate(v)
    }

    #[test]
    fn inexact_high_k_recovers_exact_solution() {
        let cfg = BurgersConfig::new(199).unwrap();
        let mu = [0.8, 1.1, 120.0];
        let exact = solve_burgers(&cfg, &mu, 1e-12, 50).unwrap();
        assert!(exact.converged);
        let approx = inexact_solution(&mu, 30, &cfg).unwrap();
        let diff: Real = approx
            .state
            .iter()
            .zip(&exact.state)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<Real>()
            .sqrt();
        assert!(diff < 1e-8, "diff = {diff:e}");
    }

    #[test]
    fn inexact_trivial_parameters_zero_error() {
        let cfg = BurgersConfig::new(99).unwrap();
        let mu = [0.0, 0.0, 100.0];
        let res = inexact_solution(&mu, 1, &cfg).unwrap();
        assert!(res.state.iter().all(|&x| x == 0.0));
        assert_eq!(res.qoi, 0.0);
        assert!(norm2(&res.residual) == 0.0);
    }

    #[test]
    fn inexact_error_shrinks_with_k() {
        let cfg = BurgersConfig::high_fidelity();
        let mu = [1.0, 1.0, 500.0];
        let exact = solve_burgers(&cfg, &mu, 1e-10, 50).unwrap();
        let m_exact = slope(&exact.state, &cfg);
        let d1 = (inexact_solution(&mu, 1, &cfg).unwrap().qoi - m_exact).abs();
        let d2 = (inexact_solution(&mu, 2, &cfg).unwrap().qoi - m_exact).abs();
        assert!(d2 < d1, "d1 = {d1:e}, d2 = {d2:e}");
    }

    #[test]
    fn prolongation_of_identical_grid_is_near_exact() {
        // Same grid size: interpolation nodes coincide, so delta is at
        // solver-tolerance level.
        let cfg = BurgersConfig::new(199).unwrap();
        let mu = [0.6, 0.9, 90.0];
        let exact = solve_burgers(&cfg, &mu, 1e-12, 50).unwrap();
        let prolonged = prolongate(&exact.state, &mu, &cfg);
        let diff: Real = prolonged
            .iter()
            .zip(&exact.state)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, Real::max);
        assert!(diff < 1e-12);
    }

    #[test]
    fn prolongation_reproduces_linear_profiles() {
        // Piecewise-linear interpolation is exact for a globally linear
        // profile, boundaries included.
        let fine = BurgersConfig::new(199).unwrap();
        let mu = [0.0, 1.4, 100.0];
        let coarse = BurgersConfig::new(49).unwrap();
        let coarse_state = linear_initial_guess(&mu, &coarse);
        let prolonged = prolongate(&coarse_state, &mu, &fine);
        let expected = linear_initial_guess(&mu, &fine);
        for (a, b) in prolonged.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn coarse_trivial_parameters_zero_error() {
        let cfg = BurgersConfig::new(199).unwrap();
        let mu = [0.0, 0.0, 100.0];
        let res = coarse_solution(&mu, 49, &cfg).unwrap();
        assert!(res.state.iter().all(|&x| x.abs() < 1e-14));
        assert!(res.qoi.abs() < 1e-12);
    }

    #[test]
    fn finer_coarse_grid_is_better() {
        let cfg = BurgersConfig::high_fidelity();
        let mut state = 77u64;
        let mut un = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut better = 0;
        let total = 20;
        for _ in 0..total {
            let mu = [0.1 + 1.9 * un(), 0.1 + 2.0 * un(), 50.0 + 950.0 * un()];
            let exact = solve_burgers(&cfg, &mu, 1e-10, 50).unwrap();
            let e499 = coarse_solution(&mu, 499, &cfg).unwrap();
            let e999 = coarse_solution(&mu, 999, &cfg).unwrap();
            let err = |r: &ApproxResult| {
                r.state
                    .iter()
                    .zip(&exact.state)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<Real>()
                    .sqrt()
            };
            if err(&e999) < err(&e499) {
                better += 1;
            }
        }
        assert!(better * 10 >= total * 9, "better = {better}/{total}");
    }

    #[test]
    fn rom_exact_when_truth_in_span() {
        let cfg = BurgersConfig::new(199).unwrap();
        let mu = [0.5, 0.8, 80.0];
        let exact = solve_burgers(&cfg, &mu, 1e-12, 50).unwrap();
        let pod = compute_pod(&[exact.state.clone()]).unwrap();
        let model = BurgersModel::new(cfg);
        let u_ref = vec![0.0; 199];
        let res = galerkin_rom_solution(&model, &mu, &pod.basis, 1, &u_ref, &cfg).unwrap();
        let diff: Real = res
            .state
            .iter()
            .zip(&exact.state)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<Real>()
            .sqrt();
        assert!(diff < 1e-7, "diff = {diff:e}");
    }

    #[test]
    fn rom_identity_basis_reproduces_high_fidelity() {
        let cfg = BurgersConfig::new(99).unwrap();
        let mu = [0.3, 0.2, 60.0];
        let model = BurgersModel::new(cfg);
        let identity = RealMatrix::identity(99);
        let u_ref = vec![0.0; 99];
        let res = galerkin_rom_solution(&model, &mu, &identity, 99, &u_ref, &cfg).unwrap();
        assert!(norm2(&res.residual) < 1e-8, "{:e}", norm2(&res.residual));
    }

    #[test]
    fn rom_residual_orthogonal_but_nonzero() {
        // A converged reduced solve kills the projected residual while the
        // full residual stays at the level of the approximation error.
        let cfg = BurgersConfig::new(199).unwrap();
        let snapshots: Vec<Vec<Real>> = [[0.4, 0.5, 70.0], [0.6, 1.0, 90.0], [0.9, 1.5, 110.0]]
            .iter()
            .map(|mu| solve_burgers(&cfg, mu, 1e-12, 50).unwrap().state)
            .collect();
        let pod = compute_pod(&snapshots).unwrap();
        let model = BurgersModel::new(cfg);
        let mu = [0.5, 0.7, 100.0];
        let u_ref = vec![0.0; 199];
        let res = galerkin_rom_solution(&model, &mu, &pod.basis, 2, &u_ref, &cfg).unwrap();
        let phi = pod.basis.truncate_cols(2);
        let projected = phi.matvec_transposed(&res.residual);
        assert!(norm2(&projected) < 1e-9, "{:e}", norm2(&projected));
        assert!(norm2(&res.residual) > 1e-6);
    }

    #[test]
    fn solver_labels_stable() {
        assert_eq!(ApproximateSolver::InexactNewton { k: 2 }.label(), "newton-k2");
        assert_eq!(
            ApproximateSolver::CoarseProlongation { n_coarse: 499 }.label(),
            "coarse-499"
        );
        assert_eq!(ApproximateSolver::GalerkinRom { m_u: 3 }.label(), "rom-m3");
    }
}
