//! Special functions, quadrature, Gaussian sampling and binomial confidence
//! bounds shared by every certificate.

pub(crate) mod bessel;
pub(crate) mod binomial;
mod gaussian;
mod normal;
mod quadrature;

pub use bessel::{log_bessel_i0, BESSEL_SWITCH};
pub use binomial::{
    binomial_test_p_value, clopper_pearson_lower, clopper_pearson_upper, BinomialBoundRequest,
    Tail,
};
pub use gaussian::{sample_gaussian, GaussianSampler, GaussianSpec, SAMPLE_CHUNK};
pub use normal::{clamp_probability, std_normal_cdf, std_normal_quantile, PROB_CLAMP};
pub use quadrature::{clenshaw_curtis, QuadratureRule};

/// `log(sum(exp(v)))` without overflow. Empty input gives `-inf`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}
