//! Tight gray-box certificates: the best certificate any classifier with the
//! declared invariance admits.
//!
//! Translations have a closed form. Rotations (and, after centering,
//! roto-translations) reduce to a low-dimensional Gaussian problem whose
//! likelihood-ratio threshold is estimated by Monte-Carlo sampling.

mod grid;
pub mod so2;
pub mod so3;

pub use grid::{pmin_grid, GridCell, GridDomain, GridGroup, PminGrid};
pub use so2::{build_so2_problem, build_so2_problem_from_params, so2_w_matrix};
pub use so3::{build_so3_problem, so3_log_beta_hat, so3_w_matrix, So3Quadrature, DEFAULT_QUAD_DEGREE};

use serde::{Deserialize, Serialize};

use crate::error::{CertError, Result};
use crate::geometry::{center, check_shapes, GroupKind, GroupSpec, PointCloud};
use crate::mc::{
    inverse_certify_reduced, prob_certify_reduced, prob_certify_upper_reduced, McConfig, PSource,
};
use crate::numerics::{std_normal_cdf, std_normal_quantile};
use crate::orbit::{
    check_group_dim, check_sigma, multiclass_radius, prepare_probability, project_translation,
};
use crate::outcome::{CertificateOutcome, Method, Note, ProbabilityBound};
use crate::reduced::{ReducedProblem, So3Reduction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TightOptions {
    /// Clenshaw-Curtis degree for the SO(3) statistic.
    pub quad_degree: usize,
    pub reduction: So3Reduction,
}

impl Default for TightOptions {
    fn default() -> Self {
        TightOptions {
            quad_degree: DEFAULT_QUAD_DEGREE,
            reduction: So3Reduction::Full,
        }
    }
}

/// `Phi(Phi^-1(p) - ||Delta - 1 mean(Delta)|| / sigma)`; certified iff it
/// exceeds 1/2.
pub fn tight_translation(
    x: &PointCloud,
    x_prime: &PointCloud,
    p_lower: f64,
    sigma: f64,
) -> Result<CertificateOutcome> {
    check_sigma(sigma)?;
    let projection = project_translation(x, x_prime)?;
    let mut out = CertificateOutcome::new(GroupKind::Translation, Method::TightClosedForm, p_lower);
    let p = prepare_probability(p_lower, &mut out.notes)?;
    let z = std_normal_quantile(p)?;
    out.bound_value = std_normal_cdf(z - projection.residual / sigma)?;
    out.certified = out.bound_value > 0.5;
    out.radius = Some(sigma * z);
    out.residual = Some(projection.residual);
    out.margin = Some(sigma * z - projection.residual);
    Ok(out)
}

fn rotation_group(group: &GroupSpec) -> Result<()> {
    match group.kind {
        GroupKind::Rotation | GroupKind::RotoTranslation => Ok(()),
        other => Err(CertError::Unsupported(format!(
            "no Monte-Carlo tight certificate for group {}",
            other.symbol()
        ))),
    }
}

/// The reduced problem for `SO(D)` or `SE(D)`; the latter centers both
/// clouds first.
pub fn build_rotation_problem(
    group: GroupSpec,
    x: &PointCloud,
    x_prime: &PointCloud,
    sigma: f64,
    opts: &TightOptions,
) -> Result<ReducedProblem> {
    rotation_group(&group)?;
    check_group_dim(&group, x)?;
    check_shapes(x.shape(), x_prime.shape())?;
    let (x, x_prime) = if group.kind == GroupKind::RotoTranslation {
        (center(x), center(x_prime))
    } else {
        (x.clone(), x_prime.clone())
    };
    match group.dim {
        2 => build_so2_problem(&x, &x_prime, sigma),
        3 => build_so3_problem(&x, &x_prime, sigma, opts.quad_degree, opts.reduction),
        d => Err(CertError::domain(format!("unsupported dimension {d}"))),
    }
}

/// Monte-Carlo lower bound on the worst-case probability over all
/// `group`-invariant classifiers consistent with the clean probability.
#[allow(clippy::too_many_arguments)]
pub fn certify_rotation_tight<'a>(
    group: GroupSpec,
    x: &PointCloud,
    x_prime: &PointCloud,
    p: impl Into<PSource<'a>>,
    sigma: f64,
    mc: &McConfig,
    opts: &TightOptions,
    seed: u64,
) -> Result<CertificateOutcome> {
    let problem = build_rotation_problem(group, x, x_prime, sigma, opts)?;
    let mut out = prob_certify_reduced(p.into(), &problem, mc, seed)?;
    out.group = group.kind;
    Ok(out)
}

/// Monte-Carlo upper bound on the worst-case probability of a competing
/// class whose clean probability is at most `p_upper`.
#[allow(clippy::too_many_arguments)]
pub fn upper_bound_rotation_tight(
    group: GroupSpec,
    x: &PointCloud,
    x_prime: &PointCloud,
    p_upper: f64,
    sigma: f64,
    mc: &McConfig,
    opts: &TightOptions,
    seed: u64,
) -> Result<ProbabilityBound> {
    let problem = build_rotation_problem(group, x, x_prime, sigma, opts)?;
    prob_certify_upper_reduced(p_upper, &problem, mc, seed)
}

/// Tight certificate for any supported group: black-box for the trivial
/// group, closed form for translations, Monte-Carlo for rotations.
#[allow(clippy::too_many_arguments)]
pub fn certify_tight(
    group: GroupSpec,
    x: &PointCloud,
    x_prime: &PointCloud,
    p_lower: f64,
    sigma: f64,
    mc: &McConfig,
    opts: &TightOptions,
    seed: u64,
) -> Result<CertificateOutcome> {
    check_group_dim(&group, x)?;
    match group.kind {
        GroupKind::Trivial => crate::orbit::certify_orbit(group, x, x_prime, p_lower, sigma),
        GroupKind::Translation => tight_translation(x, x_prime, p_lower, sigma),
        GroupKind::Rotation | GroupKind::RotoTranslation => {
            let mut notes = Vec::new();
            let p = prepare_probability(p_lower, &mut notes)?;
            let mut out = certify_rotation_tight(group, x, x_prime, p, sigma, mc, opts, seed)?;
            for n in notes {
                out.note(n);
            }
            Ok(out)
        }
        other => Err(CertError::Unsupported(format!(
            "no tight certificate for group {}",
            other.symbol()
        ))),
    }
}

/// Multi-class certificate: the lower bound for the top class must exceed
/// the upper bound for the runner-up. The two Monte-Carlo bounds each use
/// half of `alpha`, so the verdict holds with confidence `1 - alpha`.
#[allow(clippy::too_many_arguments)]
pub fn certify_multiclass(
    group: GroupSpec,
    x: &PointCloud,
    x_prime: &PointCloud,
    p_a_lower: f64,
    p_b_upper: f64,
    sigma: f64,
    mc: &McConfig,
    opts: &TightOptions,
    seed: u64,
) -> Result<CertificateOutcome> {
    check_sigma(sigma)?;
    check_group_dim(&group, x)?;
    check_shapes(x.shape(), x_prime.shape())?;
    let mut notes = Vec::new();
    let pa = prepare_probability(p_a_lower, &mut notes)?;
    let pb = prepare_probability(p_b_upper, &mut notes)?;
    notes.retain(|n| *n != Note::BoundaryProbability);

    let separated = pa > pb;
    let mut out = match group.kind {
        GroupKind::Trivial | GroupKind::Translation => {
            let method = if group.kind == GroupKind::Trivial {
                Method::BlackBox
            } else {
                Method::TightClosedForm
            };
            let residual = crate::orbit::project(group.kind, x, x_prime)?.residual;
            let mut out = CertificateOutcome::new(group.kind, method, p_a_lower);
            out.residual = Some(residual);
            let lower = std_normal_cdf(std_normal_quantile(pa)? - residual / sigma)?;
            let upper = std_normal_cdf(std_normal_quantile(pb)? + residual / sigma)?;
            out.bound_value = lower;
            out.runner_up_upper = Some(upper);
            if separated {
                let radius = multiclass_radius(pa, pb, sigma)?;
                out.radius = Some(radius);
                out.margin = Some(radius - residual);
                out.certified = residual < radius;
            }
            out
        }
        GroupKind::Rotation | GroupKind::RotoTranslation => {
            let half = McConfig {
                alpha: mc.alpha / 2.0,
                ..*mc
            };
            let problem = build_rotation_problem(group, x, x_prime, sigma, opts)?;
            let mut out = prob_certify_reduced(PSource::Fixed(pa), &problem, &half, seed)?;
            let upper = prob_certify_upper_reduced(pb, &problem, &half, seed)?;
            out.group = group.kind;
            out.confidence = 1.0 - mc.alpha;
            out.runner_up_upper = Some(upper.value);
            out.certified = separated && out.bound_value > upper.value;
            for n in upper.notes {
                out.note(n);
            }
            out
        }
        other => {
            return Err(CertError::Unsupported(format!(
                "no tight multi-class certificate for group {}",
                other.symbol()
            )))
        }
    };
    for n in notes {
        out.note(n);
    }
    if !separated {
        out.certified = false;
        out.note(Note::ClassesNotSeparated);
    }
    Ok(out)
}

/// Upper bound on the smallest clean probability `p_min` for which the
/// tight certificate still succeeds. Closed form for the trivial and
/// translation groups, Monte-Carlo for rotations.
pub fn inverse_certificate(
    group: GroupSpec,
    x: &PointCloud,
    x_prime: &PointCloud,
    sigma: f64,
    mc: &McConfig,
    opts: &TightOptions,
    seed: u64,
) -> Result<ProbabilityBound> {
    check_sigma(sigma)?;
    check_group_dim(&group, x)?;
    match group.kind {
        GroupKind::Trivial | GroupKind::Translation => {
            let residual = crate::orbit::project(group.kind, x, x_prime)?.residual;
            Ok(ProbabilityBound {
                value: std_normal_cdf(residual / sigma)?,
                log_kappa: None,
                confidence: 1.0,
                mc_std_error: None,
                notes: Vec::new(),
            })
        }
        GroupKind::Rotation | GroupKind::RotoTranslation => {
            let problem = build_rotation_problem(group, x, x_prime, sigma, opts)?;
            inverse_certify_reduced(&problem, mc, seed)
        }
        other => Err(CertError::Unsupported(format!(
            "no inverse certificate for group {}",
            other.symbol()
        ))),
    }
}
