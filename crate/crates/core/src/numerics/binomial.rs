use statrs::function::beta::beta_reg;
use statrs::function::gamma::ln_gamma;

use crate::error::{CertError, Result};

/// Which binomial tail a p-value sums over.
///
/// `Lower` is `P[X <= k]`, the p-value of a test whose null hypothesis is
/// "success rate >= p0"; `Upper` is `P[X >= k]`, for the null "rate <= p0".
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Tail {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinomialBoundRequest {
    pub successes: u64,
    pub trials: u64,
    pub confidence: f64,
}

impl BinomialBoundRequest {
    pub fn new(successes: u64, trials: u64, confidence: f64) -> Result<Self> {
        if trials == 0 {
            return Err(CertError::domain("binomial bound needs trials >= 1"));
        }
        if successes > trials {
            return Err(CertError::domain(format!(
                "successes {successes} exceed trials {trials}"
            )));
        }
        if !(confidence > 0.0 && confidence < 1.0) {
            return Err(CertError::domain(format!(
                "confidence must lie in (0,1), got {confidence}"
            )));
        }
        Ok(BinomialBoundRequest {
            successes,
            trials,
            confidence,
        })
    }
}

fn log_choose(n: u64, k: u64) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

fn log_pmf(n: u64, k: u64, p: f64) -> f64 {
    if p == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if p == 1.0 {
        return if k == n { 0.0 } else { f64::NEG_INFINITY };
    }
    log_choose(n, k) + k as f64 * p.ln() + (n - k) as f64 * (-p).ln_1p()
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

fn check_p0(p0: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p0) {
        return Err(CertError::domain(format!("success rate {p0} outside [0,1]")));
    }
    Ok(())
}

/// Exact one-sided binomial tail `P[X <= k]` or `P[X >= k]` for
/// `X ~ Bin(trials, p0)`, summed term by term in the log domain.
pub fn binomial_test_p_value(successes: u64, trials: u64, tail: Tail, p0: f64) -> Result<f64> {
    check_p0(p0)?;
    if successes > trials {
        return Err(CertError::domain(format!(
            "successes {successes} exceed trials {trials}"
        )));
    }
    let range: Box<dyn Iterator<Item = u64>> = match tail {
        Tail::Lower => Box::new(0..=successes),
        Tail::Upper => Box::new(successes..=trials),
    };
    let log_tail = range.fold(f64::NEG_INFINITY, |acc, k| {
        log_add(acc, log_pmf(trials, k, p0))
    });
    Ok(log_tail.exp().min(1.0))
}

/// Largest `k` with `P[X <= k] < level` for `X ~ Bin(trials, p0)`, or `None`
/// if even `P[X <= 0]` reaches the level. Scans upward from zero.
pub(crate) fn max_k_lower_tail_below(trials: u64, p0: f64, level: f64) -> Option<u64> {
    let log_level = level.ln();
    let mut acc = f64::NEG_INFINITY;
    let mut best = None;
    for k in 0..=trials {
        acc = log_add(acc, log_pmf(trials, k, p0));
        if acc < log_level {
            best = Some(k);
        } else {
            break;
        }
    }
    best
}

/// Smallest `k` with `P[X >= k] < level`, or `None` if no such `k <= trials`
/// exists. Scans downward from `trials`.
pub(crate) fn min_k_upper_tail_below(trials: u64, p0: f64, level: f64) -> Option<u64> {
    let log_level = level.ln();
    let mut acc = f64::NEG_INFINITY;
    let mut best = None;
    for k in (0..=trials).rev() {
        acc = log_add(acc, log_pmf(trials, k, p0));
        if acc < log_level {
            best = Some(k);
        } else {
            break;
        }
    }
    best
}

/// One-sided Clopper-Pearson lower bound at the requested confidence: the
/// `1 - confidence` quantile of `Beta(k, n - k + 1)`.
pub fn clopper_pearson_lower(req: BinomialBoundRequest) -> f64 {
    let BinomialBoundRequest {
        successes: k,
        trials: n,
        confidence,
    } = req;
    let alpha = 1.0 - confidence;
    if k == 0 {
        return 0.0;
    }
    if k == n {
        return alpha.powf(1.0 / n as f64);
    }
    let (a, b) = (k as f64, (n - k + 1) as f64);
    // I_p(a, b) is increasing in p; find I_p = alpha on [0, k/n]
    let mut lo = 0.0;
    let mut hi = k as f64 / n as f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if beta_reg(a, b, mid) < alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Mirror of [`clopper_pearson_lower`]: `1 - lower(n - k, n, c)`.
pub fn clopper_pearson_upper(req: BinomialBoundRequest) -> f64 {
    let mirrored = BinomialBoundRequest {
        successes: req.trials - req.successes,
        ..req
    };
    1.0 - clopper_pearson_lower(mirrored)
}
