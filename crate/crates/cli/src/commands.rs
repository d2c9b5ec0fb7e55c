use std::f64::consts::PI;

use invariance_cert::geometry::{epsilon_params, to_csv, EpsilonParams};
use invariance_cert::mc::smooth_predict;
use invariance_cert::oracles::{CenteredNormThreshold, NormThreshold, PairwiseCentroid};
use invariance_cert::orbit::{
    certify_orbit, certify_orbit_multiclass, certify_projection, project,
    project_registration_upper,
};
use invariance_cert::tight::{
    certify_multiclass, certify_rotation_tight, certify_tight, pmin_grid, GridCell, GridDomain,
    GridGroup, PminGrid,
};
use invariance_cert::{
    derive_seed, BaseClassifier, CertificateOutcome, GroupKind, GroupSpec, McConfig,
    OrbitProjection, PSource, Perturbation, PointCloud, SmoothPrediction, TightOptions,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::args::{
    CertifyArgs, ClassifierArgs, ClassifierKind, DomainArg, FixtureArgs, GridArgs, GridGroupArg,
    MethodArg, PredictArgs, ProjectArgs, Scenario,
};
use crate::error::{at, CliError, CliResult};
use crate::manifest::{print_json, write_file, InputDigest, RunManifest, SCHEMA};

/// Tag of the classifier stream, shared with the library's own estimate.
const CLASSIFIER_STREAM: u64 = 1;

fn build_classifier(
    kind: ClassifierKind,
    args: &ClassifierArgs,
    manifest: &mut RunManifest,
) -> CliResult<Box<dyn BaseClassifier>> {
    let tau = || {
        args.tau
            .ok_or_else(|| CliError::input(format!("--tau is required by --classifier {kind:?}")))
    };
    Ok(match kind {
        ClassifierKind::Norm => Box::new(NormThreshold { tau: tau()? }),
        ClassifierKind::CenteredNorm => Box::new(CenteredNormThreshold { tau: tau()? }),
        ClassifierKind::PairwiseCentroid => {
            if args.references.is_empty() {
                return Err(CliError::input(
                    "--reference: pairwise-centroid needs at least one reference cloud",
                ));
            }
            let clouds = args
                .references
                .iter()
                .map(|p| manifest.read_cloud("--reference", p))
                .collect::<CliResult<Vec<_>>>()?;
            Box::new(PairwiseCentroid::from_clouds(&clouds).map_err(at("--reference"))?)
        }
    })
}

fn check_sigma(sigma: f64) -> CliResult<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(CliError::input(format!("--sigma: must be positive, got {sigma}")))
    }
}

#[derive(Serialize)]
struct CertifyReport {
    schema: u32,
    manifest: RunManifest,
    p_lower: Option<f64>,
    prediction: Option<SmoothPrediction>,
    abstained: bool,
    orbit: Option<CertificateOutcome>,
    tight: Option<CertificateOutcome>,
}

pub fn certify(args: CertifyArgs) -> CliResult<()> {
    let mut manifest = RunManifest::new("certify", &args)?;
    let x = manifest.read_cloud("--clean", &args.clean)?;
    let xp = manifest.read_cloud("--perturbed", &args.perturbed)?;
    if x.shape() != xp.shape() {
        return Err(CliError::input(format!(
            "--perturbed: shape {:?} does not match --clean shape {:?}",
            xp.shape(),
            x.shape()
        )));
    }
    check_sigma(args.sigma)?;
    let kind = GroupKind::from(args.group);
    let group = GroupSpec::new(kind, x.dim()).map_err(at("--clean"))?;
    let want_orbit = args.method != MethodArg::Tight;
    let want_tight = args.method != MethodArg::Orbit;
    if want_tight && !kind.has_tight_certificate() {
        return Err(CliError::input(format!(
            "--method: no tight certificate for --group {}; use --method orbit",
            kind.symbol()
        )));
    }
    if kind == GroupKind::PermutationRotoTranslation && args.max_iters == 0 {
        return Err(CliError::input("--max-iters: must be >= 1"));
    }
    let rotation_path = matches!(kind, GroupKind::Rotation | GroupKind::RotoTranslation);
    let needs_seed = args.classifier.is_some() || (want_tight && rotation_path);
    if needs_seed && args.seed.is_none() {
        return Err(CliError::input(
            "--seed: required for Monte-Carlo estimates (no implicit entropy)",
        ));
    }
    let seed = args.seed.unwrap_or(0);
    let mc = McConfig::new(args.n1.unwrap_or(args.n2), args.n2, args.n3, args.alpha)
        .map_err(at("--n1/--n2/--n3/--alpha"))?;
    let opts = TightOptions {
        quad_degree: args.quad_degree,
        reduction: args.reduction.into(),
    };
    if want_tight && rotation_path && x.dim() == 3 {
        invariance_cert::tight::So3Quadrature::new(opts.quad_degree).map_err(at("--quad-degree"))?;
    }

    let classifier = match args.classifier {
        Some(k) => Some(build_classifier(k, &args.classifier_args, &mut manifest)?),
        None => None,
    };
    if args.multiclass && classifier.is_some() {
        return Err(CliError::input(
            "--multiclass: needs --p-lower and --p-upper, not --classifier",
        ));
    }

    let mut report = CertifyReport {
        schema: SCHEMA,
        manifest,
        p_lower: args.p_lower,
        prediction: None,
        abstained: false,
        orbit: None,
        tight: None,
    };

    let p_lower = match (&classifier, args.p_lower) {
        (_, Some(p)) => p,
        (Some(g), None) => {
            let pred = smooth_predict(
                g.as_ref(),
                &x,
                args.sigma,
                mc.n1,
                mc.alpha,
                derive_seed(seed, &[CLASSIFIER_STREAM]),
            )
            .map_err(at("--classifier"))?;
            let p = pred.p_lower;
            report.abstained = pred.label.is_none();
            report.prediction = Some(pred);
            report.p_lower = Some(p);
            p
        }
        (None, None) => unreachable!("clap requires --p-lower or --classifier"),
    };
    if report.abstained {
        return print_json(&report);
    }

    if want_orbit {
        report.orbit = Some(if let Some(pb) = args.p_upper {
            certify_orbit_multiclass(group, &x, &xp, p_lower, pb, args.sigma).map_err(at("--p-lower"))?
        } else if kind == GroupKind::PermutationRotoTranslation {
            orbit_with_iters(group, &x, &xp, p_lower, args.sigma, args.max_iters)?
        } else {
            certify_orbit(group, &x, &xp, p_lower, args.sigma).map_err(at("--p-lower"))?
        });
    }
    if want_tight {
        report.tight = Some(if let Some(pb) = args.p_upper {
            certify_multiclass(group, &x, &xp, p_lower, pb, args.sigma, &mc, &opts, seed)
                .map_err(at("--multiclass"))?
        } else if let (Some(g), true) = (&classifier, rotation_path) {
            let source = PSource::Estimate {
                classifier: g.as_ref(),
                input: &x,
                sigma: args.sigma,
            };
            certify_rotation_tight(group, &x, &xp, source, args.sigma, &mc, &opts, seed)
                .map_err(at("--method"))?
        } else {
            certify_tight(group, &x, &xp, p_lower, args.sigma, &mc, &opts, seed).map_err(at("--method"))?
        });
    }
    print_json(&report)
}

fn orbit_with_iters(
    group: GroupSpec,
    x: &PointCloud,
    xp: &PointCloud,
    p_lower: f64,
    sigma: f64,
    max_iters: usize,
) -> CliResult<CertificateOutcome> {
    let projection = project_registration_upper(x, xp, max_iters).map_err(at("--max-iters"))?;
    certify_projection(group.kind, &projection, p_lower, sigma).map_err(at("--p-lower"))
}

#[derive(Serialize)]
struct ProjectReport {
    schema: u32,
    manifest: RunManifest,
    #[serde(flatten)]
    projection: OrbitProjection,
}

pub fn project_cmd(args: ProjectArgs) -> CliResult<()> {
    let mut manifest = RunManifest::new("project", &args)?;
    let x = manifest.read_cloud("--clean", &args.clean)?;
    let xp = manifest.read_cloud("--perturbed", &args.perturbed)?;
    if x.shape() != xp.shape() {
        return Err(CliError::input(format!(
            "--perturbed: shape {:?} does not match --clean shape {:?}",
            xp.shape(),
            x.shape()
        )));
    }
    let kind = GroupKind::from(args.group);
    GroupSpec::new(kind, x.dim()).map_err(at("--clean"))?;
    let projection = if kind == GroupKind::PermutationRotoTranslation {
        project_registration_upper(&x, &xp, args.max_iters).map_err(at("--max-iters"))?
    } else {
        project(kind, &x, &xp).map_err(at("--group"))?
    };
    print_json(&ProjectReport {
        schema: SCHEMA,
        manifest,
        projection,
    })
}

#[derive(Serialize)]
struct PredictReport {
    schema: u32,
    manifest: RunManifest,
    /// The label, or the string "ABSTAIN".
    label: serde_json::Value,
    p_lower: f64,
    top_label: usize,
    top_count: usize,
    samples: usize,
}

pub fn smooth_predict_cmd(args: PredictArgs) -> CliResult<()> {
    let mut manifest = RunManifest::new("smooth-predict", &args)?;
    let x = manifest.read_cloud("--input", &args.input)?;
    check_sigma(args.sigma)?;
    let g = build_classifier(args.classifier, &args.classifier_args, &mut manifest)?;
    if args.n1 == 0 {
        return Err(CliError::input("--n1: must be >= 1"));
    }
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(CliError::input(format!("--alpha: must lie in (0,1), got {}", args.alpha)));
    }
    let pred = smooth_predict(
        g.as_ref(),
        &x,
        args.sigma,
        args.n1,
        args.alpha,
        derive_seed(args.seed, &[CLASSIFIER_STREAM]),
    )
    .map_err(at("--input"))?;
    print_json(&PredictReport {
        schema: SCHEMA,
        manifest,
        label: match pred.label {
            Some(l) => l.into(),
            None => "ABSTAIN".into(),
        },
        p_lower: pred.p_lower,
        top_label: pred.top_label,
        top_count: pred.top_count,
        samples: pred.samples,
    })
}

#[derive(Serialize)]
struct GridReport {
    schema: u32,
    manifest: RunManifest,
    group: GridGroup,
    domain: GridDomain,
    resolution: usize,
    axis: Vec<f64>,
    /// Normalized adversarial-rotation loci `(e1, e2)`.
    loci: Vec<(f64, f64)>,
    diff: bool,
    /// Coordinates of the largest written value.
    argmax: Option<(f64, f64)>,
    csv: InputDigest,
}

fn grid_csv(grid: &PminGrid) -> String {
    let mut out = String::new();
    for row in &grid.cells {
        let line: Vec<String> = row
            .iter()
            .map(|c| match c {
                GridCell::Value(v) => format!("{v:?}"),
                GridCell::Infeasible => "INF".to_string(),
            })
            .collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn pmin_grid_cmd(args: GridArgs) -> CliResult<()> {
    let manifest = RunManifest::new("pmin-grid", &args)?;
    check_sigma(args.sigma)?;
    for (flag, v) in [("--norm-x", args.norm_x), ("--norm-delta", args.norm_delta)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(CliError::input(format!("{flag}: must be finite and >= 0, got {v}")));
        }
    }
    if args.resolution < 2 {
        return Err(CliError::input("--resolution: must be >= 2"));
    }
    let mc = McConfig::new(args.n1, args.n2, args.n2, args.alpha).map_err(at("--n1/--n2/--alpha"))?;
    let domain = match args.domain {
        DomainArg::Unit => GridDomain::UnitSquare,
        DomainArg::Full => GridDomain::Full,
    };
    let group = match args.group {
        GridGroupArg::BlackBox => GridGroup::BlackBox,
        GridGroupArg::So2 => GridGroup::So2,
    };
    let run = |g| {
        pmin_grid(g, args.norm_x, args.norm_delta, args.sigma, args.resolution, domain, &mc, args.seed)
            .map_err(at("--group"))
    };
    let grid = run(group)?;
    let written = if args.diff.is_some() {
        run(GridGroup::BlackBox)?.difference(&grid).map_err(at("--diff"))?
    } else {
        grid
    };
    let csv = write_file("--out", &args.out, &grid_csv(&written))?;
    print_json(&GridReport {
        schema: SCHEMA,
        manifest,
        group,
        domain,
        resolution: written.resolution,
        argmax: written.argmax(),
        axis: written.axis,
        loci: written.loci,
        diff: args.diff.is_some(),
        csv,
    })
}

#[derive(Serialize)]
struct FixtureReport {
    schema: u32,
    manifest: RunManifest,
    scenario: Scenario,
    norm_x: f64,
    norm_delta: f64,
    theta: Option<f64>,
    /// Orientation parameters of the perturbation (D = 2 only).
    epsilon: Option<EpsilonParams>,
    outputs: Vec<InputDigest>,
}

fn gaussian_cloud(rng: &mut ChaCha8Rng, n: usize, d: usize, norm: f64) -> CliResult<PointCloud> {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| StandardNormal.sample(rng)).collect())
        .collect();
    let raw = PointCloud::from_rows(&rows).map_err(at("--n-points"))?;
    Ok(raw.scaled(norm / raw.norm()))
}

fn rotate_2d(x: &PointCloud, theta: f64) -> CliResult<PointCloud> {
    let (s, c) = theta.sin_cos();
    let rows: Vec<Vec<f64>> = x
        .rows()
        .into_iter()
        .map(|r| vec![c * r[0] - s * r[1], s * r[0] + c * r[1]])
        .collect();
    PointCloud::from_rows(&rows).map_err(at("--theta"))
}

pub fn fixture(args: FixtureArgs) -> CliResult<()> {
    let manifest = RunManifest::new("fixture", &args)?;
    if !(args.norm_x > 0.0 && args.norm_x.is_finite()) {
        return Err(CliError::input(format!("--norm-x: must be positive, got {}", args.norm_x)));
    }
    if !(2..=3).contains(&args.dim) {
        return Err(CliError::input(format!("--dim: must be 2 or 3, got {}", args.dim)));
    }
    if args.n_points == 0 {
        return Err(CliError::input("--n-points: must be >= 1"));
    }
    if let Some(nd) = args.norm_delta {
        if !(nd >= 0.0 && nd.is_finite()) {
            return Err(CliError::input(format!("--norm-delta: must be >= 0, got {nd}")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let x = gaussian_cloud(&mut rng, args.n_points, args.dim, args.norm_x)?;

    let (xp, theta) = match args.scenario {
        Scenario::Scaling | Scenario::Random if args.theta.is_some() => {
            return Err(CliError::input("--theta: only the rotation scenario takes an angle"));
        }
        Scenario::Scaling => {
            let nd = args.norm_delta.expect("clap requires --norm-delta");
            (x.scaled(1.0 + nd / args.norm_x), None)
        }
        Scenario::Random => {
            let nd = args.norm_delta.expect("clap requires --norm-delta");
            let delta = gaussian_cloud(&mut rng, args.n_points, args.dim, nd)?;
            let xp = PointCloud::new(x.matrix() + delta.matrix()).map_err(at("--norm-delta"))?;
            (xp, None)
        }
        Scenario::Rotation => {
            if args.dim != 2 {
                return Err(CliError::input("--dim: the rotation scenario needs --dim 2"));
            }
            let theta = match (args.theta, args.norm_delta) {
                (Some(t), _) => t,
                (None, Some(nd)) => {
                    if nd > 2.0 * args.norm_x {
                        return Err(CliError::input(format!(
                            "--norm-delta: no rotation moves a cloud of norm {} by {nd} (limit {})",
                            args.norm_x,
                            2.0 * args.norm_x
                        )));
                    }
                    2.0 * (nd / (2.0 * args.norm_x)).asin()
                }
                (None, None) => unreachable!("clap requires --norm-delta or --theta"),
            };
            if !theta.is_finite() {
                return Err(CliError::input("--theta: must be finite"));
            }
            (rotate_2d(&x, theta.rem_euclid(2.0 * PI))?, Some(theta))
        }
    };

    let delta = Perturbation::between(&x, &xp).map_err(at("--perturbed-out"))?;
    let epsilon = if args.dim == 2 {
        Some(epsilon_params(&x, &delta).map_err(at("--dim"))?)
    } else {
        None
    };
    let outputs = vec![
        write_file("--clean-out", &args.clean_out, &to_csv(&x))?,
        write_file("--perturbed-out", &args.perturbed_out, &to_csv(&xp))?,
    ];
    print_json(&FixtureReport {
        schema: SCHEMA,
        manifest,
        scenario: args.scenario,
        norm_x: x.norm(),
        norm_delta: delta.norm(),
        theta,
        epsilon,
        outputs,
    })
}
