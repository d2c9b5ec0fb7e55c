#![allow(dead_code)]

use invariance_cert::PointCloud;
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn uniform_cloud(rng: &mut impl Rng, n: usize, d: usize) -> PointCloud {
    PointCloud::new(DMatrix::from_fn(n, d, |_, _| rng.random_range(-1.0..1.0))).unwrap()
}

pub fn gaussian_matrix(rng: &mut impl Rng, n: usize, d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, d, |_, _| StandardNormal.sample(rng))
}

/// A cloud rescaled to Frobenius norm `norm`.
pub fn cloud_with_norm(rng: &mut impl Rng, n: usize, d: usize, norm: f64) -> PointCloud {
    let m = gaussian_matrix(rng, n, d);
    let s = norm / m.norm();
    PointCloud::new(m * s).unwrap()
}

/// `Phi(x) = 1/2 + phi(x) sum_k x^(2k+1) / (2k+1)!!` for moderate `x`, and
/// the Laplace continued fraction of the Mills ratio in the tails.
pub fn phi_oracle(x: f64) -> f64 {
    let density = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    if x.abs() > 5.0 {
        let t = x.abs();
        let mut cf = t;
        for k in (1..=300).rev() {
            cf = t + k as f64 / cf;
        }
        let tail = density / cf;
        return if x < 0.0 { tail } else { 1.0 - tail };
    }
    let mut term = x;
    let mut sum = x;
    let mut k = 1.0;
    while term.abs() > 1e-18 * sum.abs().max(1e-300) {
        term *= x * x / (2.0 * k + 1.0);
        sum += term;
        k += 1.0;
        if k > 500.0 {
            break;
        }
    }
    0.5 + density * sum
}

/// Bisection on [`phi_oracle`].
pub fn quantile_oracle(p: f64) -> f64 {
    let (mut lo, mut hi) = (-8.0, 8.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi_oracle(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
