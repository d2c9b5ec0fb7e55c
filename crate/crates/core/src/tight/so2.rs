//! Tight SO(2) certificate: the four-dimensional reduced problem.

use nalgebra::DMatrix;

use crate::error::{CertError, Result};
use crate::geometry::{epsilon_params, quarter_turn_cw, EpsilonParams, Perturbation, PointCloud};
use crate::orbit::check_sigma;
use crate::reduced::{ReducedProblem, Statistic};

/// Reduced problem from the scalar parameters `(||X||, ||Delta||, eps1, eps2)`.
///
/// With `a = 2 eps1 + ||X||^2 + ||Delta||^2`, `b = eps1 + ||X||^2`,
/// `c = ||X||^2`:
/// `m1 = [a, 0, b, eps2] / sigma^2`, `m2 = [b, -eps2, c, 0] / sigma^2` and
/// `S = [[a, 0, b, eps2], [0, a, -eps2, b], [b, -eps2, c, 0], [eps2, b, 0, c]] / sigma^2`.
pub fn build_so2_problem_from_params(eps: &EpsilonParams, sigma: f64) -> Result<ReducedProblem> {
    check_sigma(sigma)?;
    let EpsilonParams {
        eps1,
        eps2,
        norm_x,
        norm_delta,
    } = *eps;
    if !(norm_x >= 0.0 && norm_delta >= 0.0 && eps1.is_finite() && eps2.is_finite()) {
        return Err(CertError::domain("invalid orientation parameters"));
    }
    if !eps.is_feasible() {
        return Err(CertError::domain(format!(
            "infeasible orientation parameters: |({eps1}, {eps2})| > {}",
            norm_x * norm_delta
        )));
    }
    let s2 = sigma * sigma;
    let c = norm_x * norm_x;
    let a = 2.0 * eps1 + c + norm_delta * norm_delta;
    let b = eps1 + c;
    let m1 = vec![a / s2, 0.0, b / s2, eps2 / s2];
    let m2 = vec![b / s2, -eps2 / s2, c / s2, 0.0];
    #[rustfmt::skip]
    let cov = DMatrix::from_row_slice(4, 4, &[
        a, 0.0, b, eps2,
        0.0, a, -eps2, b,
        b, -eps2, c, 0.0,
        eps2, b, 0.0, c,
    ]) / s2;
    ReducedProblem::new(m1, m2, cov, Statistic::So2)
}

/// Reduced problem for two 2D clouds.
pub fn build_so2_problem(x: &PointCloud, x_prime: &PointCloud, sigma: f64) -> Result<ReducedProblem> {
    let delta = Perturbation::between(x, x_prime)?;
    build_so2_problem_from_params(&epsilon_params(x, &delta)?, sigma)
}

/// `W` with rows `vec(X')`, `vec(X' R(-pi/2)^T)`, `vec(X)`, `vec(X R(-pi/2)^T)`
/// scaled by `1 / sigma^2`, so that `S = sigma^2 W W^T`.
pub fn so2_w_matrix(x: &PointCloud, x_prime: &PointCloud, sigma: f64) -> Result<DMatrix<f64>> {
    check_sigma(sigma)?;
    if x.dim() != 2 {
        return Err(CertError::domain("the SO(2) certificate needs D = 2"));
    }
    Perturbation::between(x, x_prime)?;
    let rows = [
        x_prime.matrix().clone(),
        quarter_turn_cw(x_prime.matrix()),
        x.matrix().clone(),
        quarter_turn_cw(x.matrix()),
    ];
    let len = 2 * x.n_points();
    let s2 = sigma * sigma;
    Ok(DMatrix::from_fn(4, len, |r, k| rows[r].as_slice()[k] / s2))
}
