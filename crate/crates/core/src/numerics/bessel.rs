use crate::error::{CertError, Result};

/// Argument at which `log_bessel_i0` leaves the power series for the
/// large-argument expansion.
pub const BESSEL_SWITCH: f64 = 50.0;

/// `log I0(x)` for `x >= 0`, evaluated entirely in the log domain so that
/// arguments far beyond the `f64` overflow point of `I0` (about 713) stay
/// finite.
///
/// Below [`BESSEL_SWITCH`] the ascending series `sum (x^2/4)^k / (k!)^2` is
/// summed directly; above it the Hankel expansion
/// `I0(x) ~ e^x / sqrt(2 pi x) * sum_k ((2k-1)!!)^2 / (k! (8x)^k)` is used,
/// truncated at the smallest term.
pub fn log_bessel_i0(x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(CertError::domain(format!("log I0 needs x >= 0, got {x}")));
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }
    Ok(if x < BESSEL_SWITCH {
        series(x)
    } else {
        asymptotic(x)
    })
}

/// Infallible variant for hot loops whose callers already guarantee `x >= 0`.
#[inline]
pub(crate) fn log_i0_unchecked(x: f64) -> f64 {
    if !x.is_finite() {
        return x.abs();
    }
    if x < BESSEL_SWITCH {
        series(x)
    } else {
        asymptotic(x)
    }
}

fn series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= q / (k * k);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
        k += 1.0;
    }
    sum.ln()
}

fn asymptotic(x: f64) -> f64 {
    let inv8x = 1.0 / (8.0 * x);
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        let odd = 2.0 * k - 1.0;
        let next = term * odd * odd * inv8x / k;
        if next >= term || next < 1e-17 * sum {
            break;
        }
        term = next;
        sum += term;
        k += 1.0;
    }
    x - 0.5 * (2.0 * std::f64::consts::PI * x).ln() + sum.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: `I0(x) = (1/pi) int_0^pi exp(x cos t) dt`, with the
    /// periodic trapezoid rule (spectrally accurate) and the exponent shifted
    /// by `x` to stay in range.
    fn integral_oracle(x: f64) -> f64 {
        let n = 4000;
        let h = std::f64::consts::PI / n as f64;
        let mut s = 0.5 * (1.0 + (-2.0 * x).exp());
        for i in 1..n {
            s += (x * ((i as f64 * h).cos() - 1.0)).exp();
        }
        x + (s * h / std::f64::consts::PI).ln()
    }

    #[test]
    fn examples() {
        assert_eq!(log_bessel_i0(0.0).unwrap(), 0.0);
        let v = log_bessel_i0(1.0).unwrap();
        assert!((v - 1.2660658778_f64.ln()).abs() < 1e-10);
        let big = log_bessel_i0(1000.0).unwrap();
        let approx = 1000.0 - 0.5 * (2.0 * std::f64::consts::PI * 1000.0).ln();
        assert!(((big - approx) / approx).abs() < 1e-3);
        assert!(log_bessel_i0(-1e-300).is_err());
        assert!(log_bessel_i0(f64::NAN).is_err());
        assert!(log_bessel_i0(1e12).unwrap().is_finite());
    }

    #[test]
    fn matches_integral_representation() {
        for i in 0..=300 {
            let x = i as f64 * 0.1;
            let a = log_bessel_i0(x).unwrap();
            let b = integral_oracle(x);
            let rel = if b.abs() > 1e-300 { ((a - b) / b).abs() } else { a.abs() };
            assert!(rel < 1e-12 || (a - b).abs() < 1e-15, "x={x} {a} {b}");
        }
    }

    #[test]
    fn branches_agree_at_switch() {
        let s = series(BESSEL_SWITCH);
        let a = asymptotic(BESSEL_SWITCH);
        assert!(((s - a) / s).abs() < 1e-8, "{s} {a}");
        assert!((integral_oracle(BESSEL_SWITCH) - a).abs() / a < 1e-12);
    }

    #[test]
    fn monotone() {
        let mut prev = -1.0;
        for i in 0..2000 {
            let x = i as f64 * 0.05;
            let v = log_bessel_i0(x).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }
}
