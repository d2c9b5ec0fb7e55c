//! Low-dimensional Gaussian problems that the tight certificates reduce to.
//!
//! A [`ReducedProblem`] holds the laws `N(m1, S)` (noise around the perturbed
//! input) and `N(m2, S)` (noise around the clean input) of a linear feature
//! `q = W vec(Z)`, together with the log likelihood-ratio statistic ρ(q)
//! whose sublevel sets are the worst-case decision regions.

use nalgebra::{DMatrix, Matrix3};
use serde::{Deserialize, Serialize};

use crate::error::{CertError, Result};
use crate::numerics::bessel::log_i0_unchecked;
use crate::numerics::GaussianSpec;
use crate::tight::so3::So3Quadrature;

/// How the 3D feature vector is formed from `X'^T Z` and `X^T Z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum So3Reduction {
    /// All nine entries of each `3 x 3` block (18 features).
    #[default]
    Full,
    /// Eight entries per block with entry `(2,1)` fixed to zero (16 features).
    Zeta16,
}

impl So3Reduction {
    /// Column-major positions of the retained entries of a `3 x 3` block.
    pub(crate) fn kept(self) -> &'static [usize] {
        match self {
            So3Reduction::Full => &[0, 1, 2, 3, 4, 5, 6, 7, 8],
            So3Reduction::Zeta16 => &[0, 2, 3, 4, 5, 6, 7, 8],
        }
    }

    fn block(self, q: &[f64]) -> Matrix3<f64> {
        let mut m = Matrix3::zeros();
        for (&pos, &v) in self.kept().iter().zip(q) {
            m[(pos % 3, pos / 3)] = v;
        }
        m
    }
}

/// The log likelihood-ratio statistic ρ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    /// `ρ(q) = q_1`: isotropic Gaussian shift (black-box and translation).
    Identity,
    /// `log I0(|q_1:2|) - log I0(|q_3:4|)`.
    So2,
    /// `log β̂(q_perturbed) - log β̂(q_clean)` by tensor quadrature.
    So3 {
        degree: usize,
        reduction: So3Reduction,
    },
}

impl Statistic {
    pub fn dim(&self) -> usize {
        match self {
            Statistic::Identity => 1,
            Statistic::So2 => 4,
            Statistic::So3 { reduction, .. } => 2 * reduction.kept().len(),
        }
    }

    pub fn evaluator(&self) -> Result<StatisticEvaluator> {
        Ok(match *self {
            Statistic::Identity => StatisticEvaluator::Identity,
            Statistic::So2 => StatisticEvaluator::So2,
            Statistic::So3 { degree, reduction } => StatisticEvaluator::So3 {
                quadrature: So3Quadrature::new(degree)?,
                reduction,
            },
        })
    }
}

/// A [`Statistic`] with its quadrature tables precomputed.
#[derive(Debug, Clone)]
pub enum StatisticEvaluator {
    Identity,
    So2,
    So3 {
        quadrature: So3Quadrature,
        reduction: So3Reduction,
    },
}

impl StatisticEvaluator {
    pub fn eval(&self, q: &[f64]) -> f64 {
        match self {
            StatisticEvaluator::Identity => q[0],
            StatisticEvaluator::So2 => rho_so2(q),
            StatisticEvaluator::So3 {
                quadrature,
                reduction,
            } => {
                let half = q.len() / 2;
                quadrature.log_beta_hat(&reduction.block(&q[..half]))
                    - quadrature.log_beta_hat(&reduction.block(&q[half..]))
            }
        }
    }
}

/// `log I0(sqrt(q1^2 + q2^2)) - log I0(sqrt(q3^2 + q4^2))`.
pub fn rho_so2(q: &[f64]) -> f64 {
    log_i0_unchecked(q[0].hypot(q[1])) - log_i0_unchecked(q[2].hypot(q[3]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedProblem {
    /// `m1`, mean of the features under noise around the perturbed input.
    pub mean_perturbed: Vec<f64>,
    /// `m2`, mean of the features under noise around the clean input.
    pub mean_clean: Vec<f64>,
    pub covariance: DMatrix<f64>,
    pub statistic: Statistic,
}

impl ReducedProblem {
    pub fn new(
        mean_perturbed: Vec<f64>,
        mean_clean: Vec<f64>,
        covariance: DMatrix<f64>,
        statistic: Statistic,
    ) -> Result<Self> {
        let d = statistic.dim();
        if mean_perturbed.len() != d || mean_clean.len() != d || covariance.shape() != (d, d) {
            return Err(CertError::domain(format!(
                "reduced problem dimensions ({}, {}, {:?}) do not match statistic dimension {d}",
                mean_perturbed.len(),
                mean_clean.len(),
                covariance.shape()
            )));
        }
        // validates symmetry and finiteness
        GaussianSpec::new(mean_perturbed.clone(), covariance.clone())?;
        GaussianSpec::new(mean_clean.clone(), covariance.clone())?;
        Ok(ReducedProblem {
            mean_perturbed,
            mean_clean,
            covariance,
            statistic,
        })
    }

    /// One-dimensional problem `N(shift, 1)` against `N(0, 1)`: the exact
    /// reduction of black-box smoothing with `shift = ||Delta|| / sigma`, and of
    /// the translation group with `shift = residual / sigma`.
    pub fn isotropic_shift(shift: f64) -> Result<Self> {
        if !(shift >= 0.0 && shift.is_finite()) {
            return Err(CertError::domain(format!("shift must be >= 0, got {shift}")));
        }
        Self::new(
            vec![shift],
            vec![0.0],
            DMatrix::identity(1, 1),
            Statistic::Identity,
        )
    }

    pub fn dim(&self) -> usize {
        self.mean_clean.len()
    }

    pub fn perturbed_law(&self) -> Result<GaussianSpec> {
        GaussianSpec::new(self.mean_perturbed.clone(), self.covariance.clone())
    }

    pub fn clean_law(&self) -> Result<GaussianSpec> {
        GaussianSpec::new(self.mean_clean.clone(), self.covariance.clone())
    }
}
