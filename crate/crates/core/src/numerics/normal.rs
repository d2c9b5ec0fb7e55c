use libm::erfc;
use statrs::function::erf::erfc_inv;

use crate::error::{CertError, Result};

/// Empirical probabilities are clamped into `[PROB_CLAMP, 1 - PROB_CLAMP]`
/// before inversion.
pub const PROB_CLAMP: f64 = 1e-12;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Standard normal CDF, evaluated through `erfc` so both tails keep full
/// relative precision.
pub fn std_normal_cdf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(CertError::domain(format!("normal cdf of non-finite {x}")));
    }
    Ok(0.5 * erfc(-x / SQRT_2))
}

/// Inverse of [`std_normal_cdf`] on the open unit interval.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(CertError::domain(format!(
            "normal quantile needs p in (0,1), got {p}"
        )));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    let mut x = -SQRT_2 * erfc_inv(2.0 * p);
    // one Newton polish against the erfc-based cdf
    let density = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    if density > 0.0 {
        let err = 0.5 * erfc(-x / SQRT_2) - p;
        x -= err / density;
    }
    Ok(x)
}

/// Clamp a probability into `[PROB_CLAMP, 1 - PROB_CLAMP]`; the flag reports
/// whether the value moved.
pub fn clamp_probability(p: f64) -> (f64, bool) {
    let c = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
    (c, c != p)
}
