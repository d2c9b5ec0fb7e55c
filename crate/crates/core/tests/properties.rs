mod common;

use invariance_cert::geometry::{epsilon_params, parse_csv, rot2, to_csv};
use invariance_cert::numerics::{
    clopper_pearson_lower, clopper_pearson_upper, std_normal_cdf, std_normal_quantile,
    BinomialBoundRequest,
};
use invariance_cert::oracles::random_group_action;
use invariance_cert::orbit::{blackbox_radius, certify_orbit, project, project_registration_upper};
use invariance_cert::tight::{build_so2_problem, certify_rotation_tight, tight_translation};
use invariance_cert::{GroupKind, GroupSpec, McConfig, Perturbation, PointCloud, TightOptions};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cloud(n: usize, d: usize) -> impl Strategy<Value = PointCloud> {
    proptest::collection::vec(-3.0..3.0f64, n * d)
        .prop_map(move |v| PointCloud::new(DMatrix::from_row_slice(n, d, &v)).unwrap())
}

/// Clean and perturbed clouds of equal shape.
fn pair() -> impl Strategy<Value = (PointCloud, PointCloud)> {
    (1usize..7, 2usize..4).prop_flat_map(|(n, d)| (cloud(n, d), cloud(n, d)))
}

fn pair_2d() -> impl Strategy<Value = (PointCloud, PointCloud)> {
    (1usize..7).prop_flat_map(|n| (cloud(n, 2), cloud(n, 2)))
}

fn residual(g: GroupKind, x: &PointCloud, xp: &PointCloud) -> f64 {
    project(g, x, xp).unwrap().residual
}

const SLACK: f64 = 1e-9;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn csv_round_trip(x in (1usize..9, 2usize..4).prop_flat_map(|(n, d)| cloud(n, d))) {
        let back = parse_csv(&to_csv(&x)).unwrap();
        prop_assert_eq!(back, x);
    }

    #[test]
    fn orbit_residuals_nest((x, xp) in pair()) {
        let none = residual(GroupKind::Trivial, &x, &xp);
        let t = residual(GroupKind::Translation, &x, &xp);
        let so = residual(GroupKind::Rotation, &x, &xp);
        let o = residual(GroupKind::Orthogonal, &x, &xp);
        let se = residual(GroupKind::RotoTranslation, &x, &xp);
        let s = residual(GroupKind::Permutation, &x, &xp);
        let sxse = residual(GroupKind::PermutationRotoTranslation, &x, &xp);
        prop_assert!(t <= none + SLACK);
        prop_assert!(so <= none + SLACK);
        prop_assert!(o <= so + SLACK);
        prop_assert!(se <= so + SLACK && se <= t + SLACK);
        prop_assert!(s <= none + SLACK);
        prop_assert!(sxse <= se + SLACK && sxse <= none + SLACK);
    }

    #[test]
    fn transforms_reproduce_residuals((x, xp) in pair()) {
        for g in [
            GroupKind::Trivial,
            GroupKind::Translation,
            GroupKind::Rotation,
            GroupKind::Orthogonal,
            GroupKind::RotoTranslation,
            GroupKind::Permutation,
            GroupKind::PermutationRotoTranslation,
        ] {
            let p = project(g, &x, &xp).unwrap();
            let moved = p.transform.apply(&xp).unwrap();
            let direct = Perturbation::between(&x, &moved).unwrap().norm();
            prop_assert!((direct - p.residual).abs() < 1e-8 * (1.0 + p.residual), "{g:?}");
        }
    }

    #[test]
    fn residuals_are_orbit_invariant((x, xp) in pair(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for g in [
            GroupKind::Translation,
            GroupKind::Rotation,
            GroupKind::Orthogonal,
            GroupKind::RotoTranslation,
            GroupKind::Permutation,
        ] {
            let moved = random_group_action(g, &xp, &mut rng);
            let a = residual(g, &x, &xp);
            let b = residual(g, &x, &moved);
            prop_assert!((a - b).abs() < 1e-8 * (1.0 + a), "{g:?}: {a} vs {b}");
        }
    }

    #[test]
    fn registration_never_worse_with_more_rounds((x, xp) in pair()) {
        let one = project_registration_upper(&x, &xp, 1).unwrap().residual;
        let many = project_registration_upper(&x, &xp, 50).unwrap().residual;
        prop_assert!(many <= one + SLACK);
    }

    #[test]
    fn epsilon_params_are_feasible((x, xp) in pair_2d()) {
        let delta = Perturbation::between(&x, &xp).unwrap();
        let eps = epsilon_params(&x, &delta).unwrap();
        prop_assert!(eps.is_feasible());
        let (e1, e2) = eps.normalized();
        prop_assert!(e1 * e1 + e2 * e2 <= 1.0 + 1e-9);
    }

    #[test]
    fn epsilon_params_rotate_covariantly((x, xp) in pair_2d(), theta in -3.0..3.0f64) {
        // rotating both clouds together leaves (eps1, eps2) unchanged
        let r = rot2(theta);
        let r = DMatrix::from_column_slice(2, 2, r.as_slice());
        let a = epsilon_params(&x, &Perturbation::between(&x, &xp).unwrap()).unwrap();
        let (xr, xpr) = (x.transform(&r).unwrap(), xp.transform(&r).unwrap());
        let b = epsilon_params(&xr, &Perturbation::between(&xr, &xpr).unwrap()).unwrap();
        prop_assert!((a.eps1 - b.eps1).abs() < 1e-9 * (1.0 + a.eps1.abs()));
        prop_assert!((a.eps2 - b.eps2).abs() < 1e-9 * (1.0 + a.eps2.abs()));
    }

    #[test]
    fn clopper_pearson_brackets_the_frequency(n in 1u64..5000, frac in 0.0..=1.0f64, c in 0.5..0.9999f64) {
        let k = ((n as f64) * frac).round() as u64;
        let req = BinomialBoundRequest::new(k, n, c).unwrap();
        let lo = clopper_pearson_lower(req);
        let hi = clopper_pearson_upper(req);
        let f = k as f64 / n as f64;
        prop_assert!((0.0..=f).contains(&lo) && (f..=1.0).contains(&hi), "{lo} {f} {hi}");
    }

    #[test]
    fn clopper_pearson_monotone(n in 2u64..2000, frac in 0.0..1.0f64, c in 0.5..0.999f64) {
        let k = ((n as f64 - 1.0) * frac).floor() as u64;
        let at = |k, c| clopper_pearson_lower(BinomialBoundRequest::new(k, n, c).unwrap());
        prop_assert!(at(k, c) <= at(k + 1, c));
        prop_assert!(at(k, (c + 1.0) / 2.0) <= at(k, c));
    }

    #[test]
    fn quantile_inverts_cdf(p in 0.001..0.999f64) {
        let x = std_normal_quantile(p).unwrap();
        prop_assert!((std_normal_cdf(x).unwrap() - p).abs() < 1e-14);
        prop_assert!((x - common::quantile_oracle(p)).abs() < 1e-10);
    }

    #[test]
    fn orbit_certificate_monotone_in_p((x, xp) in pair(), p in 0.51..0.99f64, dp in 0.0..0.01f64, sigma in 0.1..3.0f64) {
        for g in [GroupKind::Trivial, GroupKind::Translation, GroupKind::Rotation, GroupKind::Permutation] {
            let spec = GroupSpec::new(g, x.dim()).unwrap();
            let lo = certify_orbit(spec, &x, &xp, p, sigma).unwrap();
            let hi = certify_orbit(spec, &x, &xp, p + dp, sigma).unwrap();
            prop_assert!(!lo.certified || hi.certified);
            prop_assert!(hi.bound_value >= lo.bound_value);
            prop_assert!(blackbox_radius(p + dp, sigma).unwrap() >= blackbox_radius(p, sigma).unwrap());
        }
    }

    #[test]
    fn translation_bound_is_shift_invariant((x, xp) in pair(), shift in -5.0..5.0f64, p in 0.51..0.99f64) {
        let b = vec![shift; x.dim()];
        let a = tight_translation(&x, &xp, p, 0.7).unwrap().bound_value;
        let moved = tight_translation(&x, &xp.translate(&b).unwrap(), p, 0.7).unwrap().bound_value;
        prop_assert!((a - moved).abs() < 1e-9);
    }

    #[test]
    fn so2_problem_scale_invariant((x, xp) in pair_2d(), k in -4i32..5, sigma in 0.2..2.0f64) {
        let c = 2f64.powi(k);
        let a = build_so2_problem(&x, &xp, sigma).unwrap();
        let b = build_so2_problem(&x.scaled(c), &xp.scaled(c), sigma * c).unwrap();
        prop_assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn tight_so2_bound_is_rotation_invariant((x, xp) in pair_2d(), theta in -3.0..3.0f64, seed in any::<u64>()) {
        let r = rot2(theta);
        let r = DMatrix::from_column_slice(2, 2, r.as_slice());
        let g = GroupSpec::new(GroupKind::Rotation, 2).unwrap();
        let mc = McConfig::new(500, 20_000, 20_000, 0.01).unwrap();
        let opts = TightOptions::default();
        // rotating the perturbed cloud alone leaves the law of the statistic
        // unchanged, so the bounds agree up to Monte-Carlo noise
        let a = certify_rotation_tight(g, &x, &xp, 0.9, 1.0, &mc, &opts, seed).unwrap();
        let b = certify_rotation_tight(g, &x, &xp.transform(&r).unwrap(), 0.9, 1.0, &mc, &opts, seed).unwrap();
        let (sa, sb) = (a.mc_std_error.unwrap(), b.mc_std_error.unwrap());
        let tol = 6.0 * sa.hypot(sb) + 0.02;
        prop_assert!((a.bound_value - b.bound_value).abs() < tol, "{} vs {}", a.bound_value, b.bound_value);
    }
}
