use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use invariance_cert::{GroupKind, So3Reduction};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "invcert", version, about = "Robustness certificates for invariant point-cloud classifiers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certify a clean/perturbed pair.
    Certify(CertifyArgs),
    /// Sweep the inverse certificate over the normalized orientation plane.
    PminGrid(GridArgs),
    /// Project the perturbed cloud onto the orbit of the clean cloud.
    Project(ProjectArgs),
    /// Smoothed prediction of a synthetic classifier.
    SmoothPredict(PredictArgs),
    /// Write clean and perturbed fixture clouds.
    Fixture(FixtureArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Group {
    #[value(name = "none", alias = "blackbox")]
    #[serde(rename = "none")]
    None,
    #[value(name = "T")]
    #[serde(rename = "T")]
    T,
    #[value(name = "SO")]
    #[serde(rename = "SO")]
    So,
    #[value(name = "O")]
    #[serde(rename = "O")]
    O,
    #[value(name = "SE")]
    #[serde(rename = "SE")]
    Se,
    #[value(name = "S")]
    #[serde(rename = "S")]
    S,
    #[value(name = "SxSE")]
    #[serde(rename = "SxSE")]
    SxSe,
}

impl From<Group> for GroupKind {
    fn from(g: Group) -> Self {
        match g {
            Group::None => GroupKind::Trivial,
            Group::T => GroupKind::Translation,
            Group::So => GroupKind::Rotation,
            Group::O => GroupKind::Orthogonal,
            Group::Se => GroupKind::RotoTranslation,
            Group::S => GroupKind::Permutation,
            Group::SxSe => GroupKind::PermutationRotoTranslation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    Orbit,
    Tight,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReductionArg {
    Full,
    Zeta16,
}

impl From<ReductionArg> for So3Reduction {
    fn from(r: ReductionArg) -> Self {
        match r {
            ReductionArg::Full => So3Reduction::Full,
            ReductionArg::Zeta16 => So3Reduction::Zeta16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassifierKind {
    Norm,
    CenteredNorm,
    PairwiseCentroid,
}

/// Flags describing a synthetic base classifier.
#[derive(Debug, Clone, Args, Serialize)]
pub struct ClassifierArgs {
    /// Threshold of the norm classifiers.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Reference clouds of the pairwise-centroid classifier, one per label.
    #[arg(long = "reference")]
    pub references: Vec<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CertifyArgs {
    #[arg(long, value_enum)]
    pub group: Group,
    #[arg(long)]
    pub clean: PathBuf,
    #[arg(long)]
    pub perturbed: PathBuf,
    #[arg(long)]
    pub sigma: f64,
    /// Lower confidence bound on the clean top-class probability.
    #[arg(long, conflicts_with = "classifier", required_unless_present = "classifier")]
    pub p_lower: Option<f64>,
    /// Estimate the clean probability with this synthetic classifier.
    #[arg(long, value_enum, requires = "n1")]
    pub classifier: Option<ClassifierKind>,
    #[command(flatten)]
    pub classifier_args: ClassifierArgs,
    #[arg(long)]
    pub n1: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    pub n2: usize,
    #[arg(long, default_value_t = 10_000)]
    pub n3: usize,
    #[arg(long, default_value_t = 0.001)]
    pub alpha: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = MethodArg::Both)]
    pub method: MethodArg,
    /// Certify top class against a runner-up bounded by --p-upper.
    #[arg(long, requires = "p_upper")]
    pub multiclass: bool,
    #[arg(long, requires = "multiclass")]
    pub p_upper: Option<f64>,
    #[arg(long, default_value_t = invariance_cert::tight::DEFAULT_QUAD_DEGREE)]
    pub quad_degree: usize,
    #[arg(long, value_enum, default_value_t = ReductionArg::Full)]
    pub reduction: ReductionArg,
    /// Alternation cap of the SxSE registration bound.
    #[arg(long, default_value_t = invariance_cert::orbit::REGISTRATION_MAX_ITERS)]
    pub max_iters: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum GridGroupArg {
    #[value(name = "blackbox")]
    #[serde(rename = "blackbox")]
    BlackBox,
    #[value(name = "SO2")]
    #[serde(rename = "SO2")]
    So2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainArg {
    /// [0, 1] x [0, 1]
    Unit,
    /// [-1, 1] x [-1, 1]
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiffArg {
    Blackbox,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GridArgs {
    #[arg(long)]
    pub norm_x: f64,
    #[arg(long)]
    pub norm_delta: f64,
    #[arg(long)]
    pub sigma: f64,
    #[arg(long, default_value_t = 100)]
    pub resolution: usize,
    #[arg(long, value_enum)]
    pub group: GridGroupArg,
    #[arg(long, value_enum, default_value_t = DomainArg::Unit)]
    pub domain: DomainArg,
    /// Write `baseline - group` instead of the group's p_min.
    #[arg(long, value_enum)]
    pub diff: Option<DiffArg>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 10_000)]
    pub n1: usize,
    #[arg(long, default_value_t = 10_000)]
    pub n2: usize,
    #[arg(long, default_value_t = 0.001)]
    pub alpha: f64,
    /// CSV output path; the JSON sidecar goes to stdout.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ProjectArgs {
    #[arg(long, value_enum)]
    pub group: Group,
    #[arg(long)]
    pub clean: PathBuf,
    #[arg(long)]
    pub perturbed: PathBuf,
    #[arg(long, default_value_t = invariance_cert::orbit::REGISTRATION_MAX_ITERS)]
    pub max_iters: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PredictArgs {
    #[arg(long, value_enum)]
    pub classifier: ClassifierKind,
    #[command(flatten)]
    pub classifier_args: ClassifierArgs,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub sigma: f64,
    #[arg(long, default_value_t = 10_000)]
    pub n1: usize,
    #[arg(long, default_value_t = 0.001)]
    pub alpha: f64,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// `X' = (1 + |Delta| / |X|) X`.
    Scaling,
    /// `X' = X R(theta)^T` (D = 2).
    Rotation,
    /// Gaussian perturbation rescaled to the requested norm.
    Random,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FixtureArgs {
    #[arg(long, value_enum)]
    pub scenario: Scenario,
    #[arg(long)]
    pub norm_x: f64,
    #[arg(long, conflicts_with = "theta", required_unless_present = "theta")]
    pub norm_delta: Option<f64>,
    /// Rotation angle of the rotation scenario.
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long, default_value_t = 10)]
    pub n_points: usize,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub clean_out: PathBuf,
    #[arg(long)]
    pub perturbed_out: PathBuf,
}
