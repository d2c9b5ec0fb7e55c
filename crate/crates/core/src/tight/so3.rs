//! Tight SO(3) certificate: the Haar-averaged Gaussian kernel β̂ reduced to a
//! two-dimensional integral, and the linear feature map it depends on.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix3};

use crate::error::{CertError, Result};
use crate::geometry::{check_shapes, PointCloud};
use crate::numerics::bessel::log_i0_unchecked;
use crate::numerics::clenshaw_curtis;
use crate::orbit::check_sigma;
use crate::reduced::{ReducedProblem, So3Reduction, Statistic};

/// Default Clenshaw-Curtis degree per integration axis.
pub const DEFAULT_QUAD_DEGREE: usize = 20;

#[derive(Debug, Clone, Copy)]
struct Node {
    log_weight: f64,
    c2: f64,
    s2: f64,
    c3: f64,
    s3: f64,
}

/// Tensor Clenshaw-Curtis rule over `(w2, w3) in [-pi/2, pi/2] x [0, 2 pi]`
/// with the Haar weight `cos(w2)` folded into the log weights.
#[derive(Debug, Clone)]
pub struct So3Quadrature {
    degree: usize,
    nodes: Vec<Node>,
}

impl So3Quadrature {
    pub fn new(degree: usize) -> Result<Self> {
        if degree < 4 {
            return Err(CertError::domain(format!(
                "SO(3) quadrature degree must be >= 4, got {degree}"
            )));
        }
        let r2 = clenshaw_curtis(degree, -PI / 2.0, PI / 2.0)?;
        let r3 = clenshaw_curtis(degree, 0.0, 2.0 * PI)?;
        let mut nodes = Vec::with_capacity(r2.len() * r3.len());
        for (&w2, &a2) in r2.nodes.iter().zip(&r2.weights) {
            let (s2, c2) = w2.sin_cos();
            let outer = a2 * c2;
            if outer <= 0.0 {
                continue;
            }
            for (&w3, &a3) in r3.nodes.iter().zip(&r3.weights) {
                let (s3, c3) = w3.sin_cos();
                nodes.push(Node {
                    log_weight: (outer * a3).ln(),
                    c2,
                    s2,
                    c3,
                    s3,
                });
            }
        }
        Ok(So3Quadrature { degree, nodes })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `log β̂(m)` for an already scaled matrix `m = X^T Z / sigma^2`,
    /// including the `2 pi` from the eliminated `w1` integral.
    pub fn log_beta_hat(&self, m: &Matrix3<f64>) -> f64 {
        let (m11, m12, m13) = (m[(0, 0)], m[(0, 1)], m[(0, 2)]);
        let (m21, m22, m23) = (m[(1, 0)], m[(1, 1)], m[(1, 2)]);
        let (m31, m32, m33) = (m[(2, 0)], m[(2, 1)], m[(2, 2)]);
        // streaming log-sum-exp
        let mut max = f64::NEG_INFINITY;
        let mut acc = 0.0;
        for n in &self.nodes {
            let chi1 = n.c2 * m11 + n.s2 * n.s3 * m12 + n.c3 * n.s2 * m13 + n.c3 * m22 - n.s3 * m23;
            let chi2 = n.c2 * m21 + n.s2 * n.s3 * m22 + n.c3 * n.s2 * m23 - n.c3 * m12 + n.s3 * m13;
            let chi3 = -n.s2 * m31 + n.c2 * n.s3 * m32 + n.c2 * n.c3 * m33;
            let v = n.log_weight + chi3 + log_i0_unchecked(chi1.hypot(chi2));
            if v > max {
                acc = acc * (max - v).exp() + 1.0;
                max = v;
            } else {
                acc += (v - max).exp();
            }
        }
        (2.0 * PI).ln() + max + acc.ln()
    }
}

/// `log β̂(m / sigma^2)` with `m = X^T Z`.
pub fn so3_log_beta_hat(m: &Matrix3<f64>, sigma: f64, degree: usize) -> Result<f64> {
    check_sigma(sigma)?;
    if m.iter().any(|v| !v.is_finite()) {
        return Err(CertError::domain("matrix has non-finite entries"));
    }
    Ok(So3Quadrature::new(degree)?.log_beta_hat(&(m / (sigma * sigma))))
}

fn check_3d(x: &PointCloud, x_prime: &PointCloud) -> Result<()> {
    if x.dim() != 3 {
        return Err(CertError::domain(format!(
            "the SO(3) certificate needs D = 3, got D = {}",
            x.dim()
        )));
    }
    check_shapes(x.shape(), x_prime.shape())
}

/// The linear map `W` from column-major `vec(Z)` to the features: the kept
/// entries of `X'^T Z / sigma^2` followed by those of `X^T Z / sigma^2`.
pub fn so3_w_matrix(
    x: &PointCloud,
    x_prime: &PointCloud,
    sigma: f64,
    reduction: So3Reduction,
) -> Result<DMatrix<f64>> {
    check_3d(x, x_prime)?;
    check_sigma(sigma)?;
    let n = x.n_points();
    let kept = reduction.kept();
    let s2 = sigma * sigma;
    let mut w = DMatrix::zeros(2 * kept.len(), 3 * n);
    for (block, cloud) in [x_prime, x].into_iter().enumerate() {
        for (r, &pos) in kept.iter().enumerate() {
            let (i, j) = (pos % 3, pos / 3);
            let row = block * kept.len() + r;
            for p in 0..n {
                w[(row, j * n + p)] = cloud.matrix()[(p, i)] / s2;
            }
        }
    }
    Ok(w)
}

/// Build the reduced problem for `SO(3)`. Means and covariance are formed
/// from the Gram matrix of `[X', X]` directly rather than through `W`.
pub fn build_so3_problem(
    x: &PointCloud,
    x_prime: &PointCloud,
    sigma: f64,
    degree: usize,
    reduction: So3Reduction,
) -> Result<ReducedProblem> {
    check_3d(x, x_prime)?;
    check_sigma(sigma)?;
    So3Quadrature::new(degree)?;
    let s2 = sigma * sigma;
    let clouds = [x_prime.matrix(), x.matrix()];
    let gram = |a: usize, b: usize| clouds[a].transpose() * clouds[b];
    let kept = reduction.kept();
    let k = kept.len();
    let dim = 2 * k;

    let mut mean_perturbed = vec![0.0; dim];
    let mut mean_clean = vec![0.0; dim];
    let mut cov = DMatrix::zeros(dim, dim);
    for a in 0..2 {
        // means: E[A^T Z] = A^T X' or A^T X
        let gp = gram(a, 0);
        let gc = gram(a, 1);
        for (r, &pos) in kept.iter().enumerate() {
            let (i, j) = (pos % 3, pos / 3);
            mean_perturbed[a * k + r] = gp[(i, j)] / s2;
            mean_clean[a * k + r] = gc[(i, j)] / s2;
        }
        for b in 0..2 {
            let g = gram(a, b);
            for (r, &pa) in kept.iter().enumerate() {
                for (c, &pb) in kept.iter().enumerate() {
                    if pa / 3 == pb / 3 {
                        cov[(a * k + r, b * k + c)] = g[(pa % 3, pb % 3)] / s2;
                    }
                }
            }
        }
    }
    ReducedProblem::new(
        mean_perturbed,
        mean_clean,
        cov,
        Statistic::So3 { degree, reduction },
    )
}
