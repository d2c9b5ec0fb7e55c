use std::f64::consts::PI;

use crate::error::{CertError, Result};

/// A fixed interpolatory quadrature rule on `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub interval: (f64, f64),
}

impl QuadratureRule {
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Clenshaw-Curtis rule with `degree + 1` Chebyshev extreme points, exact for
/// polynomials up to `degree`.
pub fn clenshaw_curtis(degree: usize, lo: f64, hi: f64) -> Result<QuadratureRule> {
    if degree < 2 {
        return Err(CertError::domain(format!(
            "Clenshaw-Curtis degree must be >= 2, got {degree}"
        )));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(CertError::domain(format!("bad interval [{lo}, {hi}]")));
    }
    let n = degree;
    let nf = n as f64;
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);

    let mut nodes = Vec::with_capacity(n + 1);
    let mut weights = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let theta = j as f64 * PI / nf;
        let mut s = 0.0;
        for k in 1..=n / 2 {
            let b = if 2 * k == n { 1.0 } else { 2.0 };
            s += b / (4.0 * (k * k) as f64 - 1.0) * (2.0 * k as f64 * theta).cos();
        }
        let c = if j == 0 || j == n { 1.0 } else { 2.0 };
        weights.push(c / nf * (1.0 - s) * half);
        // reversed so nodes ascend
        nodes.push(mid - half * theta.cos());
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        interval: (lo, hi),
    })
}
