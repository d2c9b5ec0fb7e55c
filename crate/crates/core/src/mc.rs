//! Monte-Carlo certification: smoothed prediction with abstention and the
//! three sampling procedures behind the tight certificates (lower bound,
//! upper bound, inverse certificate).

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CertError, Result};
use crate::geometry::{GroupKind, PointCloud};
use crate::numerics::binomial::{max_k_lower_tail_below, min_k_upper_tail_below};
use crate::numerics::{
    clopper_pearson_lower, clopper_pearson_upper, BinomialBoundRequest, GaussianSampler,
    SAMPLE_CHUNK,
};
use crate::orbit::check_sigma;
use crate::outcome::{CertificateOutcome, Method, Note, ProbabilityBound};
use crate::reduced::ReducedProblem;
use crate::seed::{derive, stream};

/// Sample budgets and overall significance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    /// Samples for the clean prediction probability.
    pub n1: usize,
    /// Samples for the threshold κ.
    pub n2: usize,
    /// Samples for the final bound.
    pub n3: usize,
    pub alpha: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            n1: 10_000,
            n2: 10_000,
            n3: 10_000,
            alpha: 0.001,
        }
    }
}

impl McConfig {
    pub fn new(n1: usize, n2: usize, n3: usize, alpha: f64) -> Result<Self> {
        let cfg = McConfig { n1, n2, n3, alpha };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n1 < 100 || self.n2 < 100 || self.n3 < 100 {
            return Err(CertError::domain(format!(
                "sample budgets must be >= 100, got ({}, {}, {})",
                self.n1, self.n2, self.n3
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 0.5) {
            return Err(CertError::domain(format!(
                "alpha must lie in (0, 0.5), got {}",
                self.alpha
            )));
        }
        Ok(())
    }

    /// Per-bound confidences `(1 - a, 1 - a/2, 1 - a/3)`.
    pub fn ladder(&self) -> [f64; 3] {
        [
            1.0 - self.alpha,
            1.0 - self.alpha / 2.0,
            1.0 - self.alpha / 3.0,
        ]
    }
}

/// A deterministic base classifier `g`.
pub trait BaseClassifier: Sync {
    fn classify(&self, x: &PointCloud) -> usize;

    /// The group under which the label is declared invariant.
    fn invariance(&self) -> GroupKind;
}

/// Where the clean prediction probability comes from.
#[derive(Clone, Copy)]
pub enum PSource<'a> {
    /// A lower bound supplied by the caller.
    Fixed(f64),
    /// Estimate it with `n1` noisy evaluations of `classifier` at `input`.
    Estimate {
        classifier: &'a dyn BaseClassifier,
        input: &'a PointCloud,
        sigma: f64,
    },
}

impl From<f64> for PSource<'_> {
    fn from(p: f64) -> Self {
        PSource::Fixed(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothPrediction {
    /// The majority label, or `None` to abstain.
    pub label: Option<usize>,
    pub top_label: usize,
    pub top_count: usize,
    pub samples: usize,
    /// Clopper-Pearson lower bound on the top label's probability.
    pub p_lower: f64,
}

/// Labels of `g(X + sigma * noise)` for `n` noise draws, in draw order.
pub fn noisy_labels(
    g: &dyn BaseClassifier,
    x: &PointCloud,
    sigma: f64,
    n: usize,
    seed: u64,
) -> Vec<usize> {
    let (rows, cols) = x.shape();
    let chunks = n.div_ceil(SAMPLE_CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = SAMPLE_CHUNK.min(n - c * SAMPLE_CHUNK);
            let mut rng = ChaCha8Rng::seed_from_u64(derive(seed, &[c as u64]));
            let mut out = Vec::with_capacity(len);
            for _ in 0..len {
                let noisy = DMatrix::from_fn(rows, cols, |i, j| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    x.matrix()[(i, j)] + sigma * z
                });
                let cloud = PointCloud::new(noisy).expect("finite noisy cloud");
                out.push(g.classify(&cloud));
            }
            out
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// Majority vote under Gaussian noise with a one-sided Clopper-Pearson bound
/// at confidence `1 - alpha`; abstains when the bound does not exceed 1/2.
pub fn smooth_predict(
    g: &dyn BaseClassifier,
    x: &PointCloud,
    sigma: f64,
    n: usize,
    alpha: f64,
    seed: u64,
) -> Result<SmoothPrediction> {
    check_sigma(sigma)?;
    if n == 0 {
        return Err(CertError::domain("sample count must be >= 1"));
    }
    let labels = noisy_labels(g, x, sigma, n, seed);
    let max_label = labels.iter().copied().max().unwrap_or(0);
    let mut counts = vec![0usize; max_label + 1];
    for &l in &labels {
        counts[l] += 1;
    }
    // first label with the highest count
    let (top_label, &top_count) = counts
        .iter()
        .enumerate()
        .rev()
        .max_by_key(|(_, c)| **c)
        .expect("at least one label");
    let p_lower = clopper_pearson_lower(BinomialBoundRequest::new(
        top_count as u64,
        n as u64,
        1.0 - alpha,
    )?);
    Ok(SmoothPrediction {
        label: (p_lower > 0.5).then_some(top_label),
        top_label,
        top_count,
        samples: n,
        p_lower,
    })
}

fn sample_statistic(
    problem: &ReducedProblem,
    perturbed: bool,
    count: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let law = if perturbed {
        problem.perturbed_law()?
    } else {
        problem.clean_law()?
    };
    let sampler = GaussianSampler::new(&law)?;
    let evaluator = problem.statistic.evaluator()?;
    let values = sampler.map_samples(count, seed, |q| evaluator.eval(q));
    if let Some(i) = values.iter().position(|v| v.is_nan()) {
        return Err(CertError::Numerical(format!(
            "statistic {:?} returned NaN at sample {i} of {count} (stream seed {seed}, {} law, mean {:?})",
            problem.statistic,
            if perturbed { "perturbed" } else { "clean" },
            if perturbed { &problem.mean_perturbed } else { &problem.mean_clean },
        )));
    }
    Ok(values)
}


fn std_error(count: usize, n: usize) -> f64 {
    let f = count as f64 / n as f64;
    (f * (1.0 - f) / n as f64).sqrt()
}

/// A threshold on the pair `(ρ, u)` ordered lexicographically, where the tag
/// `u = (i + 1/2) / n` of sample `i` acts as an independent uniform. Atoms in
/// the law of ρ are thereby split exactly as a randomized test would.
#[derive(Debug, Clone, Copy)]
struct Threshold {
    value: f64,
    tag: f64,
    tied: bool,
}

fn tag(i: usize, n: usize) -> f64 {
    (i as f64 + 0.5) / n as f64
}

impl Threshold {
    /// The `k`-th smallest (1-indexed) sample in `(ρ, u)` order.
    fn order_statistic(values: &[f64], k: usize) -> Threshold {
        let mut idx: Vec<usize> = (0..values.len()).collect();
        idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        let i = idx[k - 1];
        let value = values[i];
        let tied = (k >= 2 && values[idx[k - 2]] == value)
            || idx.get(k).is_some_and(|&j| values[j] == value);
        Threshold {
            value,
            tag: tag(i, values.len()),
            tied,
        }
    }

    fn count_at_most(&self, values: &[f64]) -> usize {
        let n = values.len();
        values
            .iter()
            .enumerate()
            .filter(|&(i, &r)| r < self.value || (r == self.value && tag(i, n) <= self.tag))
            .count()
    }

    fn count_at_least(&self, values: &[f64]) -> usize {
        let n = values.len();
        values
            .iter()
            .enumerate()
            .filter(|&(i, &r)| r > self.value || (r == self.value && tag(i, n) >= self.tag))
            .count()
    }
}

fn resolve_p_lower(
    source: PSource<'_>,
    mc: &McConfig,
    seed: u64,
    notes: &mut Vec<Note>,
) -> Result<f64> {
    match source {
        PSource::Fixed(p) => {
            if !(p > 0.0 && p < 1.0) {
                return Err(CertError::domain(format!("p_lower must lie in (0,1), got {p}")));
            }
            notes.push(Note::PLowerSupplied);
            Ok(p)
        }
        PSource::Estimate {
            classifier,
            input,
            sigma,
        } => Ok(smooth_predict(
            classifier,
            input,
            sigma,
            mc.n1,
            mc.alpha,
            derive(seed, &[stream::CLASSIFIER]),
        )?
        .p_lower),
    }
}

/// Lower bound on the worst-case probability of the predicted class.
///
/// 1. `p_lower` at confidence `1 - a` (supplied or estimated);
/// 2. κ̲ = the `n*`-th smallest ρ over `n2` clean-law samples, with `n*` the
///    largest `n` such that `P[Bin(n2, p_lower) <= n] < a/2`;
/// 3. Clopper-Pearson lower bound at `1 - a/3` on `P[ρ <= κ̲]` from `n3`
///    perturbed-law samples.
pub fn prob_certify_reduced(
    p_source: PSource<'_>,
    problem: &ReducedProblem,
    mc: &McConfig,
    seed: u64,
) -> Result<CertificateOutcome> {
    mc.validate()?;
    let mut notes = Vec::new();
    let p_lower = resolve_p_lower(p_source, mc, seed, &mut notes)?;
    let mut out = CertificateOutcome::new(GroupKind::Trivial, Method::TightMonteCarlo, p_lower);
    out.notes = notes;
    out.ladder = Some(mc.ladder());
    out.confidence = 1.0 - mc.alpha;

    let n_star = match max_k_lower_tail_below(mc.n2 as u64, p_lower, mc.alpha / 2.0) {
        Some(k) if k >= 1 => k as usize,
        _ => {
            out.note(Note::ThresholdUndetermined);
            return Ok(out);
        }
    };
    let rho_clean = sample_statistic(problem, false, mc.n2, derive(seed, &[stream::THRESHOLD]))?;
    let kappa = Threshold::order_statistic(&rho_clean, n_star);
    if kappa.tied {
        out.note(Note::TiesAtThreshold);
    }

    let rho_pert = sample_statistic(problem, true, mc.n3, derive(seed, &[stream::BOUND]))?;
    let count = kappa.count_at_most(&rho_pert);
    let bound = clopper_pearson_lower(BinomialBoundRequest::new(
        count as u64,
        mc.n3 as u64,
        1.0 - mc.alpha / 3.0,
    )?);
    out.bound_value = bound;
    out.certified = bound > 0.5;
    out.log_kappa = Some(kappa.value);
    out.mc_std_error = Some(std_error(count, mc.n3));
    Ok(out)
}

/// Upper bound on the worst-case probability of a competing class whose
/// clean probability is at most `p_upper`: κ̲ is a lower confidence bound on
/// the `1 - p_upper` quantile of ρ under the clean law, and the bound is the
/// Clopper-Pearson upper bound at `1 - a/3` on `P[ρ >= κ̲]` under the
/// perturbed law.
pub fn prob_certify_upper_reduced(
    p_upper: f64,
    problem: &ReducedProblem,
    mc: &McConfig,
    seed: u64,
) -> Result<ProbabilityBound> {
    mc.validate()?;
    if !(p_upper > 0.0 && p_upper < 1.0) {
        return Err(CertError::domain(format!("p_upper must lie in (0,1), got {p_upper}")));
    }
    let mut out = ProbabilityBound {
        value: 1.0,
        log_kappa: None,
        confidence: 1.0 - mc.alpha,
        mc_std_error: None,
        notes: vec![Note::PLowerSupplied],
    };
    let n_star = match max_k_lower_tail_below(mc.n2 as u64, 1.0 - p_upper, mc.alpha / 2.0) {
        Some(k) if k >= 1 => k as usize,
        _ => {
            out.notes.push(Note::ThresholdUndetermined);
            return Ok(out);
        }
    };
    let rho_clean = sample_statistic(
        problem,
        false,
        mc.n2,
        derive(seed, &[stream::UPPER, stream::THRESHOLD]),
    )?;
    let kappa = Threshold::order_statistic(&rho_clean, n_star);
    if kappa.tied {
        out.notes.push(Note::TiesAtThreshold);
    }
    let rho_pert = sample_statistic(
        problem,
        true,
        mc.n3,
        derive(seed, &[stream::UPPER, stream::BOUND]),
    )?;
    let count = kappa.count_at_least(&rho_pert);
    out.value = clopper_pearson_upper(BinomialBoundRequest::new(
        count as u64,
        mc.n3 as u64,
        1.0 - mc.alpha / 3.0,
    )?);
    out.log_kappa = Some(kappa.value);
    out.mc_std_error = Some(std_error(count, mc.n3));
    Ok(out)
}

/// Upper bound on `p_min`, the smallest clean probability that still
/// certifies: κ̄ = the `n*`-th smallest ρ over `n1` perturbed-law samples
/// with `n*` the smallest `n` such that `P[Bin(n1, 1/2) >= n] < a`, then the
/// Clopper-Pearson upper bound at `1 - a/2` on `P[ρ <= κ̄]` from `n2`
/// clean-law samples. The result is clamped to `[1/2, 1]`.
pub fn inverse_certify_reduced(
    problem: &ReducedProblem,
    mc: &McConfig,
    seed: u64,
) -> Result<ProbabilityBound> {
    mc.validate()?;
    let mut out = ProbabilityBound {
        value: 1.0,
        log_kappa: None,
        confidence: 1.0 - mc.alpha,
        mc_std_error: None,
        notes: Vec::new(),
    };
    let n_star = match min_k_upper_tail_below(mc.n1 as u64, 0.5, mc.alpha) {
        Some(k) if k >= 1 => k as usize,
        _ => {
            out.notes.push(Note::ThresholdUndetermined);
            return Ok(out);
        }
    };
    let rho_pert = sample_statistic(problem, true, mc.n1, derive(seed, &[stream::THRESHOLD]))?;
    let kappa = Threshold::order_statistic(&rho_pert, n_star);
    if kappa.tied {
        out.notes.push(Note::TiesAtThreshold);
    }
    let rho_clean = sample_statistic(problem, false, mc.n2, derive(seed, &[stream::BOUND]))?;
    let count = kappa.count_at_most(&rho_clean);
    let upper = clopper_pearson_upper(BinomialBoundRequest::new(
        count as u64,
        mc.n2 as u64,
        1.0 - mc.alpha / 2.0,
    )?);
    out.value = upper.clamp(0.5, 1.0);
    out.log_kappa = Some(kappa.value);
    out.mc_std_error = Some(std_error(count, mc.n2));
    Ok(out)
}
