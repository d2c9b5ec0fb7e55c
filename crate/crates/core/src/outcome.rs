use serde::{Deserialize, Serialize};

use crate::geometry::GroupKind;

/// Which certificate produced an outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Plain Gaussian smoothing radius, no invariance used.
    BlackBox,
    /// Residual after orbit projection compared to the black-box radius.
    Orbit,
    /// Tight certificate in closed form (translation).
    TightClosedForm,
    /// Tight certificate estimated by Monte-Carlo sampling.
    TightMonteCarlo,
}

/// Flags recorded alongside a result. They never change the verdict; they
/// explain it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Note {
    /// A probability was clamped into `[1e-12, 1 - 1e-12]` before inversion.
    ProbabilityClamped,
    /// `p = 0.5`: radius zero, nothing can be certified.
    BoundaryProbability,
    /// The κ order-statistic index was empty; the bound is vacuous.
    ThresholdUndetermined,
    /// `p_lower` was supplied by the caller; the first ladder slot is reserved
    /// but not spent.
    PLowerSupplied,
    /// The projection is only an upper bound; a negative verdict proves nothing.
    Inconclusive,
    /// Multi-class: the lower bound for the top class does not exceed the
    /// upper bound for the runner-up.
    ClassesNotSeparated,
    /// Sampled ρ values contained ties at the threshold.
    TiesAtThreshold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateOutcome {
    pub certified: bool,
    pub group: GroupKind,
    pub method: Method,
    /// Lower bound on the worst-case probability of the predicted class.
    pub bound_value: f64,
    /// Black-box radius `sigma * Phi^-1(p_lower)`, when one applies.
    pub radius: Option<f64>,
    pub p_lower: f64,
    /// Joint confidence of every bound involved.
    pub confidence: f64,
    /// Per-bound confidences `(1 - a, 1 - a/2, 1 - a/3)` for Monte-Carlo results.
    pub ladder: Option<[f64; 3]>,
    /// The threshold κ̲ in log domain.
    pub log_kappa: Option<f64>,
    /// Orbit residual `min_t ||t(X') - X||`.
    pub residual: Option<f64>,
    /// `radius - residual`; positive iff certified for radius-form results.
    pub margin: Option<f64>,
    /// Binomial standard error of the final Monte-Carlo frequency.
    pub mc_std_error: Option<f64>,
    /// Multi-class: upper bound on the runner-up class probability.
    pub runner_up_upper: Option<f64>,
    pub notes: Vec<Note>,
}

impl CertificateOutcome {
    pub(crate) fn new(group: GroupKind, method: Method, p_lower: f64) -> Self {
        CertificateOutcome {
            certified: false,
            group,
            method,
            bound_value: 0.0,
            radius: None,
            p_lower,
            confidence: 1.0,
            ladder: None,
            log_kappa: None,
            residual: None,
            margin: None,
            mc_std_error: None,
            runner_up_upper: None,
            notes: Vec::new(),
        }
    }

    pub fn has_note(&self, note: Note) -> bool {
        self.notes.contains(&note)
    }

    pub(crate) fn note(&mut self, note: Note) {
        if !self.notes.contains(&note) {
            self.notes.push(note);
        }
    }
}

/// A one-sided Monte-Carlo probability bound (upper bound or `p_min`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityBound {
    pub value: f64,
    pub log_kappa: Option<f64>,
    pub confidence: f64,
    pub mc_std_error: Option<f64>,
    pub notes: Vec<Note>,
}
