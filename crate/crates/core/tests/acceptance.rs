//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use invariance_cert::geometry::{adversarial_rotation_locus, center, epsilon_params, rot2};
use invariance_cert::mc::{inverse_certify_reduced, smooth_predict};
use invariance_cert::oracles::{
    brute_force_orthogonal_2d, brute_force_permutation, brute_force_procrustes_2d,
    haar_closed_form_so2, haar_oracle_so3, haar_oracle_so2, reference_probability, NormThreshold,
};
use invariance_cert::orbit::{
    blackbox_radius, certify_orbit, multiclass_radius, project_orthogonal, project_permutation,
    project_rotation, project_translation,
};
use invariance_cert::tight::{
    certify_rotation_tight, inverse_certificate, so3_log_beta_hat, tight_translation,
};
use invariance_cert::{
    GroupKind, GroupSpec, McConfig, PSource, Perturbation, PointCloud, ReducedProblem,
    TightOptions,
};
use nalgebra::{DMatrix, Matrix3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{cloud_with_norm, phi_oracle, quantile_oracle, uniform_cloud};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn rotate(x: &PointCloud, theta: f64) -> PointCloud {
    let r = rot2(theta);
    x.transform(&DMatrix::from_column_slice(2, 2, r.as_slice())).unwrap()
}

fn c01_blackbox_radius() -> Verdict {
    let r = blackbox_radius(0.8, 0.5).unwrap();
    let expected = 0.5 * quantile_oracle(0.8);
    let g = GroupSpec::new(GroupKind::Trivial, 2).unwrap();
    let x = PointCloud::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
    let at = |norm: f64| {
        let mut d = DMatrix::zeros(3, 2);
        d[(1, 1)] = norm;
        let xp = PointCloud::new(x.matrix() + d).unwrap();
        certify_orbit(g, &x, &xp, 0.8, 0.5).unwrap().certified
    };
    let flips = at(0.42) && !at(0.43);
    verdict(
        (r - expected).abs() < 1e-4 && (r - 0.4208).abs() < 1e-4 && flips,
        format!("radius {r:.6}, oracle {expected:.6}, certified@0.42={} certified@0.43={}", at(0.42), at(0.43)),
    )
}

/// Pure scaling fixture: `X' = (1 + ||Delta|| / ||X||) X`.
fn scaling_fixture(norm_x: f64, norm_delta: f64) -> (PointCloud, PointCloud) {
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    let x = cloud_with_norm(&mut rng, 8, 2, norm_x);
    let xp = x.scaled(1.0 + norm_delta / norm_x);
    (x, xp)
}

fn c02_tight_gap() -> Verdict {
    let g = GroupSpec::new(GroupKind::Rotation, 2).unwrap();
    let mc = McConfig::new(100_000, 100_000, 100_000, 0.001).unwrap();
    let opts = TightOptions::default();
    let seed = 2026;
    let run = |nd: f64| {
        let (x, xp) = scaling_fixture(0.01, nd);
        certify_rotation_tight(g, &x, &xp, 0.8, 0.5, &mc, &opts, seed).unwrap()
    };
    let at70 = run(0.70);
    let at80 = run(0.80);
    verdict(
        at70.certified && !at80.certified,
        format!(
            "seed {seed}: bound@0.70={:.5} bound@0.80={:.5} (black-box radius 0.4208)",
            at70.bound_value, at80.bound_value
        ),
    )
}

fn c03_translation_equivalence() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0_f64;
    let mut mismatches = 0;
    for i in 0..500 {
        let d = 2 + i % 2;
        let n = rng.random_range(1..10);
        let x = uniform_cloud(&mut rng, n, d);
        let delta = uniform_cloud(&mut rng, n, d).scaled(rng.random_range(0.0..1.5));
        let xp = PointCloud::new(x.matrix() + delta.matrix()).unwrap();
        let p = rng.random_range(0.51..0.999);
        let sigma = rng.random_range(0.1..2.0);
        let out = tight_translation(&x, &xp, p, sigma).unwrap();

        let mut centered = delta.matrix().clone();
        let mean = centered.row_mean();
        for mut row in centered.row_iter_mut() {
            row -= &mean;
        }
        let residual = centered.norm();
        let expected = phi_oracle(quantile_oracle(p) - residual / sigma);
        worst = worst.max((out.bound_value - expected).abs());
        let g = GroupSpec::new(GroupKind::Translation, d).unwrap();
        if certify_orbit(g, &x, &xp, p, sigma).unwrap().certified != out.certified {
            mismatches += 1;
        }
    }
    verdict(
        worst < 1e-12 && mismatches == 0,
        format!("max |bound - oracle| = {worst:.2e}, verdict mismatches {mismatches}/500"),
    )
}

fn c04_se_reduction() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mc = McConfig::new(1000, 1000, 1000, 0.01).unwrap();
    let opts = TightOptions::default();
    let mut identical = 0;
    for i in 0..100 {
        let d = if i < 50 { 2 } else { 3 };
        let n = rng.random_range(3..8);
        let x = uniform_cloud(&mut rng, n, d).translate(&vec![2.0; d]).unwrap();
        let xp = PointCloud::new(x.matrix() + uniform_cloud(&mut rng, n, d).scaled(0.3).matrix()).unwrap();
        let p = rng.random_range(0.6..0.99);
        let seed = rng.random();
        let se = GroupSpec::new(GroupKind::RotoTranslation, d).unwrap();
        let so = GroupSpec::new(GroupKind::Rotation, d).unwrap();
        let a = certify_rotation_tight(se, &x, &xp, p, 0.5, &mc, &opts, seed).unwrap();
        let b = certify_rotation_tight(so, &center(&x), &center(&xp), p, 0.5, &mc, &opts, seed).unwrap();
        if a.bound_value.to_bits() == b.bound_value.to_bits()
            && a.log_kappa.map(f64::to_bits) == b.log_kappa.map(f64::to_bits)
            && a.certified == b.certified
        {
            identical += 1;
        }
    }
    verdict(identical == 100, format!("{identical}/100 bit-identical (50 2D + 50 3D)"))
}

fn c05_strictness() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mc = McConfig::new(100_000, 100_000, 100_000, 0.001).unwrap();
    let opts = TightOptions::default();
    let sigma = 0.5;
    let g = GroupSpec::new(GroupKind::Rotation, 2).unwrap();
    let (mut above, mut clear) = (0, 0);
    for _ in 0..100 {
        let n = rng.random_range(3..8);
        let (nx, nd) = (rng.random_range(0.005..sigma / 10.0), rng.random_range(0.2..0.6));
        let x = cloud_with_norm(&mut rng, n, 2, nx);
        let delta = cloud_with_norm(&mut rng, n, 2, nd);
        let xp = PointCloud::new(x.matrix() + delta.matrix()).unwrap();
        let p = rng.random_range(0.7..0.95);
        let tight = certify_rotation_tight(g, &x, &xp, p, sigma, &mc, &opts, rng.random()).unwrap();
        let orbit = certify_orbit(g, &x, &xp, p, sigma).unwrap();
        let se = tight.mc_std_error.unwrap();
        if tight.bound_value > orbit.bound_value - 3.0 * se {
            above += 1;
        }
        if tight.bound_value > orbit.bound_value + 0.01 {
            clear += 1;
        }
    }
    verdict(
        above == 100 && clear >= 50,
        format!("above orbit - 3se: {above}/100, above orbit + 0.01: {clear}/100"),
    )
}

fn c06_haar_so2() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0_f64;
    for _ in 0..200 {
        let n = rng.random_range(1..8);
        let x = uniform_cloud(&mut rng, n, 2);
        let z = uniform_cloud(&mut rng, n, 2).scaled(rng.random_range(0.0..2.0));
        let sigma = rng.random_range(0.3..2.0);
        let oracle = haar_oracle_so2(&x, &z, sigma, 20_000).unwrap();
        let closed = haar_closed_form_so2(&x, &z, sigma).unwrap();
        worst = worst.max((oracle - closed).abs());
    }
    verdict(worst < 1e-7, format!("max relative error (|log ratio|) {worst:.2e} over 200 triples"))
}

fn so3_fixtures() -> Vec<Matrix3<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    (0..50)
        .map(|_| Matrix3::from_fn(|_, _| rng.random_range(-1.0..1.0)))
        .collect()
}

fn c07_so3_quadrature() -> Verdict {
    use rayon::prelude::*;
    let fixtures = so3_fixtures();
    let errors: Vec<(f64, f64)> = fixtures
        .par_iter()
        .map(|m| {
            let q20 = so3_log_beta_hat(m, 1.0, 20).unwrap();
            let q40 = so3_log_beta_hat(m, 1.0, 40).unwrap();
            let oracle = haar_oracle_so3(m, 1.0, 200).unwrap();
            ((q20 - oracle).abs(), (q20 - q40).abs())
        })
        .collect();
    let worst = errors.iter().fold(0.0_f64, |a, e| a.max(e.0));
    let drift = errors.iter().fold(0.0_f64, |a, e| a.max(e.1));
    verdict(
        worst < 1e-5 && drift < 1e-6,
        format!("max |log ratio| vs 200^3 oracle {worst:.2e}, degree 20->40 drift {drift:.2e}"),
    )
}

fn c08_procrustes_hungarian() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0_f64;
    for _ in 0..200 {
        let n = rng.random_range(2..8);
        let x = uniform_cloud(&mut rng, n, 2);
        let xp = uniform_cloud(&mut rng, n, 2);
        let so = project_rotation(&x, &xp).unwrap().residual;
        let o = project_orthogonal(&x, &xp).unwrap().residual;
        worst = worst
            .max((so - brute_force_procrustes_2d(&x, &xp, 100_000).unwrap()).abs())
            .max((o - brute_force_orthogonal_2d(&x, &xp, 100_000).unwrap()).abs());
    }
    let mut hungarian_bad = 0;
    let mut tested = 0;
    for n in 1..=7 {
        for d in [2, 3] {
            for _ in 0..10 {
                let x = uniform_cloud(&mut rng, n, d);
                let xp = uniform_cloud(&mut rng, n, d);
                let fast = project_permutation(&x, &xp).unwrap().residual;
                let slow = brute_force_permutation(&x, &xp).unwrap();
                tested += 1;
                if (fast - slow).abs() > 1e-12 * (1.0 + slow) {
                    hungarian_bad += 1;
                }
            }
        }
    }
    verdict(
        worst < 1e-6 && hungarian_bad == 0,
        format!(
            "SVD vs angle grid max diff {worst:.2e} (200 instances); Hungarian mismatches {hungarian_bad}/{tested} (N=1..7)"
        ),
    )
}

fn c09_coverage() -> Verdict {
    let sigma = 0.5;
    let g = NormThreshold { tau: 1.8 };
    let x = PointCloud::from_rows(&[
        vec![0.3, 0.1],
        vec![-0.2, 0.4],
        vec![0.1, -0.3],
        vec![-0.2, -0.2],
    ])
    .unwrap();
    let xp = rotate(&x, 0.9).scaled(1.3);
    let group = GroupSpec::new(GroupKind::Rotation, 2).unwrap();
    let mc = McConfig::new(10_000, 10_000, 10_000, 0.001).unwrap();
    let opts = TightOptions::default();

    let label = smooth_predict(&g, &x, sigma, 100_000, 0.001, 1).unwrap().top_label;
    let (reference, se) = reference_probability(&g, &xp, label, sigma, 10_000_000, 99).unwrap();
    let mut covered = 0;
    let mut mean_bound = 0.0;
    for trial in 0..1000u64 {
        let source = PSource::Estimate {
            classifier: &g,
            input: &x,
            sigma,
        };
        let out = certify_rotation_tight(group, &x, &xp, source, sigma, &mc, &opts, trial).unwrap();
        mean_bound += out.bound_value / 1000.0;
        if out.bound_value <= reference {
            covered += 1;
        }
    }
    verdict(
        covered >= 999,
        format!("{covered}/1000 bounds <= reference {reference:.5} (se {se:.1e}); mean bound {mean_bound:.5}"),
    )
}

fn c10_inverse_consistency() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mc = McConfig::new(100_000, 100_000, 100_000, 0.001).unwrap();
    let opts = TightOptions::default();
    let sigma = 0.5;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_closed = 0.0_f64;
    for i in 0..10 {
        let x = uniform_cloud(&mut rng, 5, 2);
        let xp = PointCloud::new(x.matrix() + uniform_cloud(&mut rng, 5, 2).scaled(0.15).matrix()).unwrap();
        for kind in [GroupKind::Trivial, GroupKind::Translation] {
            let g = GroupSpec::new(kind, 2).unwrap();
            let closed = inverse_certificate(g, &x, &xp, sigma, &mc, &opts, 0).unwrap().value;
            let residual = if kind == GroupKind::Trivial {
                Perturbation::between(&x, &xp).unwrap().norm()
            } else {
                project_translation(&x, &xp).unwrap().residual
            };
            let oracle = phi_oracle(residual / sigma);
            let problem = ReducedProblem::isotropic_shift(residual / sigma).unwrap();
            let mc_out = inverse_certify_reduced(&problem, &mc, i).unwrap();
            let width = 4.0 * mc_out.mc_std_error.unwrap();
            worst_excess = worst_excess.max((mc_out.value - oracle).abs() - width - 0.01);
            worst_closed = worst_closed.max((closed - oracle).abs());
        }
    }
    let same = ReducedProblem::isotropic_shift(0.0).unwrap();
    let pmin = inverse_certify_reduced(&same, &mc, 11).unwrap().value;
    verdict(
        worst_excess <= 0.0 && worst_closed < 1e-12 && (0.50..=0.53).contains(&pmin),
        format!(
            "max |MC - closed form| minus (MC width + 0.01): {worst_excess:.4}; closed form vs oracle {worst_closed:.1e}; identical-law p_min {pmin:.5}"
        ),
    )
}

fn c11_rotation_locus() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0_f64;
    let mut locus_miss = 0;
    for _ in 0..200 {
        let n = rng.random_range(1..8);
        let x = uniform_cloud(&mut rng, n, 2);
        let theta = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        let xp = rotate(&x, theta);
        let delta = Perturbation::between(&x, &xp).unwrap();
        let eps = epsilon_params(&x, &delta).unwrap();
        let (nx, nd) = (x.norm(), delta.norm());
        let e1 = -0.5 * nd * nd;
        let e2 = 0.5 * (nd * nd * (4.0 * nx * nx - nd * nd)).max(0.0).sqrt();
        worst = worst
            .max((eps.eps1 - e1).abs())
            .max((eps.eps2.abs() - e2).abs());
        let locus = adversarial_rotation_locus(nx, nd).unwrap();
        if !locus
            .iter()
            .any(|p| (p.eps1 - eps.eps1).abs() < 1e-9 && (p.eps2 - eps.eps2).abs() < 1e-9)
        {
            locus_miss += 1;
        }
    }
    let mut infeasible_wrong = 0;
    for k in 0..=400 {
        let nd = k as f64 * 0.01;
        let empty = adversarial_rotation_locus(1.0, nd).unwrap().is_empty();
        if empty != (nd > 2.0) {
            infeasible_wrong += 1;
        }
    }
    verdict(
        worst < 1e-9 && locus_miss == 0 && infeasible_wrong == 0,
        format!(
            "max eps error {worst:.2e}; fixtures off the locus {locus_miss}/200; infeasibility errors {infeasible_wrong}/401"
        ),
    )
}

fn c12_multiclass_radius() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let pa = rng.random_range(0.3..0.999);
        let pb = rng.random_range(0.001..pa);
        let sigma = rng.random_range(0.1..2.0);
        let r = multiclass_radius(pa, pb, sigma).unwrap();
        let expected = 0.5 * sigma * (quantile_oracle(pa) - quantile_oracle(pb));
        worst = worst.max((r - expected).abs());
    }
    verdict(worst < 1e-6, format!("max |radius - oracle| {worst:.2e} over 100 pairs"))
}

type Criterion = (&'static str, Duration, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 12] = [
        ("1 black-box radius", Duration::from_secs(1), c01_blackbox_radius),
        ("2 tight vs black-box gap", Duration::from_secs(10), c02_tight_gap),
        ("3 translation equivalence", Duration::from_secs(5), c03_translation_equivalence),
        ("4 SE reduces to SO on centered inputs", Duration::from_secs(60), c04_se_reduction),
        ("5 strictness over the orbit bound", Duration::from_secs(60), c05_strictness),
        ("6 SO(2) Haar closed form", Duration::from_secs(30), c06_haar_so2),
        ("7 SO(3) quadrature", Duration::from_secs(600), c07_so3_quadrature),
        ("8 Procrustes and Hungarian exactness", Duration::from_secs(30), c08_procrustes_hungarian),
        ("9 coverage", Duration::from_secs(900), c09_coverage),
        ("10 inverse certificate consistency", Duration::from_secs(30), c10_inverse_consistency),
        ("11 adversarial-rotation locus", Duration::from_secs(1), c11_rotation_locus),
        ("12 multi-class radius", Duration::from_secs(1), c12_multiclass_radius),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, budget, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let v = run();
        let elapsed = start.elapsed();
        let pass = v.pass && elapsed <= budget;
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {name}: {} [{:.2}s, budget {}s]",
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
