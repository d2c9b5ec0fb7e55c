//! Orbit-based certificates: project the perturbed cloud onto the group orbit
//! of the clean cloud and compare the residual to the black-box radius.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::assignment;
use crate::error::{CertError, Result};
use crate::geometry::{center_matrix, check_shapes, GroupKind, GroupSpec, PointCloud};
use crate::numerics::{clamp_probability, std_normal_cdf, std_normal_quantile};
use crate::outcome::{CertificateOutcome, Method, Note};

/// Default iteration cap of the alternating registration bound.
pub const REGISTRATION_MAX_ITERS: usize = 50;
const REGISTRATION_TOL: f64 = 1e-9;

/// A group element `t`, acting as `t(X') = P X' R^T + 1 b^T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    Identity,
    Translation(Vec<f64>),
    /// Rotation or orthogonal matrix, stored row-major.
    Linear(Vec<Vec<f64>>),
    RotoTranslation {
        rotation: Vec<Vec<f64>>,
        translation: Vec<f64>,
    },
    /// Row `n` of `t(X')` is row `permutation[n]` of `X'`.
    Permutation(Vec<usize>),
    PermutationRotoTranslation {
        permutation: Vec<usize>,
        rotation: Vec<Vec<f64>>,
        translation: Vec<f64>,
    },
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn from_rows(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let d = rows.len();
    DMatrix::from_fn(d, d, |i, j| rows[i][j])
}

impl Transform {
    pub fn apply(&self, x_prime: &PointCloud) -> Result<PointCloud> {
        match self {
            Transform::Identity => Ok(x_prime.clone()),
            Transform::Translation(b) => x_prime.translate(b),
            Transform::Linear(r) => x_prime.transform(&from_rows(r)),
            Transform::RotoTranslation {
                rotation,
                translation,
            } => x_prime.transform(&from_rows(rotation))?.translate(translation),
            Transform::Permutation(p) => x_prime.permute_rows(p),
            Transform::PermutationRotoTranslation {
                permutation,
                rotation,
                translation,
            } => x_prime
                .permute_rows(permutation)?
                .transform(&from_rows(rotation))?
                .translate(translation),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitProjection {
    /// `min_t ||t(X') - X||_2` (or an upper bound on it when not `exact`).
    pub residual: f64,
    pub transform: Transform,
    pub exact: bool,
    /// Alternation rounds used by the registration bound.
    pub iterations: Option<usize>,
}

/// `sigma * Phi^-1(p_lower)`.
pub fn blackbox_radius(p_lower: f64, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    Ok(sigma * std_normal_quantile(p_lower)?)
}

pub(crate) fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(CertError::domain(format!("sigma must be positive, got {sigma}")));
    }
    Ok(())
}

fn frob(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn project_translation(x: &PointCloud, x_prime: &PointCloud) -> Result<OrbitProjection> {
    check_shapes(x.shape(), x_prime.shape())?;
    let delta = x_prime.matrix() - x.matrix();
    let mean = delta.row_mean();
    Ok(OrbitProjection {
        residual: frob(&center_matrix(&delta)),
        transform: Transform::Translation(mean.iter().map(|v| -v).collect()),
        exact: true,
        iterations: None,
    })
}

/// Optimal `R` for `min ||A R^T - B||` from the SVD of `A^T B`; `proper`
/// restricts to `det R = 1`.
fn procrustes(a: &DMatrix<f64>, b: &DMatrix<f64>, proper: bool) -> DMatrix<f64> {
    let h = a.transpose() * b;
    let d = h.nrows();
    let svd = h.svd(true, true);
    let u = svd.u.expect("requested U");
    let v = svd.v_t.expect("requested V^T").transpose();
    let mut s_hat = DMatrix::<f64>::identity(d, d);
    if proper && (&v * u.transpose()).determinant() < 0.0 {
        let smallest = svd
            .singular_values
            .iter()
            .enumerate()
            .fold(0, |best, (i, s)| if *s < svd.singular_values[best] { i } else { best });
        s_hat[(smallest, smallest)] = -1.0;
    }
    v * s_hat * u.transpose()
}

fn check_pair(x: &PointCloud, x_prime: &PointCloud) -> Result<()> {
    check_shapes(x.shape(), x_prime.shape())
}

pub fn project_rotation(x: &PointCloud, x_prime: &PointCloud) -> Result<OrbitProjection> {
    check_pair(x, x_prime)?;
    let r = procrustes(x_prime.matrix(), x.matrix(), true);
    Ok(OrbitProjection {
        residual: frob(&(x_prime.matrix() * r.transpose() - x.matrix())),
        transform: Transform::Linear(to_rows(&r)),
        exact: true,
        iterations: None,
    })
}

pub fn project_orthogonal(x: &PointCloud, x_prime: &PointCloud) -> Result<OrbitProjection> {
    check_pair(x, x_prime)?;
    let r = procrustes(x_prime.matrix(), x.matrix(), false);
    Ok(OrbitProjection {
        residual: frob(&(x_prime.matrix() * r.transpose() - x.matrix())),
        transform: Transform::Linear(to_rows(&r)),
        exact: true,
        iterations: None,
    })
}

/// Kabsch alignment of `a` onto `b`: rotation, translation and residual.
fn kabsch(a: &DMatrix<f64>, b: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, f64) {
    let ac = center_matrix(a);
    let bc = center_matrix(b);
    let r = procrustes(&ac, &bc, true);
    let residual = frob(&(&ac * r.transpose() - &bc));
    let shift = b.row_mean() - a.row_mean() * r.transpose();
    (r, shift.iter().copied().collect(), residual)
}

pub fn project_roto_translation(x: &PointCloud, x_prime: &PointCloud) -> Result<OrbitProjection> {
    check_pair(x, x_prime)?;
    let (r, b, residual) = kabsch(x_prime.matrix(), x.matrix());
    Ok(OrbitProjection {
        residual,
        transform: Transform::RotoTranslation {
            rotation: to_rows(&r),
            translation: b,
        },
        exact: true,
        iterations: None,
    })
}

fn squared_distances(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), b.nrows(), |i, j| {
        (a.row(i) - b.row(j)).norm_squared()
    })
}

/// Permutation of the rows of `moving` best matching `target`, in the
/// `permute_rows` convention, plus the squared cost.
fn best_permutation(target: &DMatrix<f64>, moving: &DMatrix<f64>) -> (Vec<usize>, f64) {
    let (assign, total) = assignment::solve(&squared_distances(moving, target));
    let mut perm = vec![0; assign.len()];
    for (n, &m) in assign.iter().enumerate() {
        perm[m] = n;
    }
    (perm, total.max(0.0))
}

fn permute(m: &DMatrix<f64>, perm: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(perm[i], j)])
}

pub fn project_permutation(x: &PointCloud, x_prime: &PointCloud) -> Result<OrbitProjection> {
    check_pair(x, x_prime)?;
    let (perm, _) = best_permutation(x.matrix(), x_prime.matrix());
    let residual = frob(&(permute(x_prime.matrix(), &perm) - x.matrix()));
    Ok(OrbitProjection {
        residual,
        transform: Transform::Permutation(perm),
        exact: true,
        iterations: None,
    })
}

/// Principal axes as columns, ordered by decreasing variance.
fn principal_axes(centered: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(centered.transpose() * centered);
    let d = centered.ncols();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    DMatrix::from_fn(d, d, |i, k| eig.eigenvectors[(i, order[k])])
}

/// Initial rotations for the alternation: identity plus every proper
/// sign pattern mapping the principal axes of `moving` onto those of `target`.
fn registration_starts(target: &DMatrix<f64>, moving: &DMatrix<f64>) -> Vec<DMatrix<f64>> {
    let d = target.ncols();
    let mut starts = vec![DMatrix::identity(d, d)];
    if target.nrows() < 2 {
        return starts;
    }
    let pt = principal_axes(&center_matrix(target));
    let pm = principal_axes(&center_matrix(moving));
    for mask in 0..(1u32 << d) {
        let signs = DMatrix::from_fn(d, d, |i, j| {
            if i != j {
                0.0
            } else if mask >> i & 1 == 1 {
                -1.0
            } else {
                1.0
            }
        });
        let r = &pt * signs * pm.transpose();
        if r.determinant() > 0.0 {
            starts.push(r);
        }
    }
    starts
}

/// Upper bound on the `S(N) x SE(D)` orbit distance by alternating optimal
/// matching and Kabsch alignment from several starts. Every round is
/// monotone nonincreasing; the best start is kept.
pub fn project_registration_upper(
    x: &PointCloud,
    x_prime: &PointCloud,
    max_iters: usize,
) -> Result<OrbitProjection> {
    check_pair(x, x_prime)?;
    if max_iters == 0 {
        return Err(CertError::domain("max_iters must be >= 1"));
    }
    let target = x.matrix();
    let moving = x_prime.matrix();
    let d = x.dim();

    let identity = OrbitProjection {
        residual: frob(&(moving - target)),
        transform: Transform::PermutationRotoTranslation {
            permutation: (0..x.n_points()).collect(),
            rotation: to_rows(&DMatrix::identity(d, d)),
            translation: vec![0.0; d],
        },
        exact: false,
        iterations: Some(0),
    };
    let mut best = identity;

    for r0 in registration_starts(target, moving) {
        let mut r = r0;
        let mut b = (target.row_mean() - moving.row_mean() * r.transpose())
            .iter()
            .copied()
            .collect::<Vec<_>>();
        let mut prev = f64::INFINITY;
        let mut state = None;
        for it in 1..=max_iters {
            let mut placed = moving * r.transpose();
            for mut row in placed.row_iter_mut() {
                for (v, t) in row.iter_mut().zip(&b) {
                    *v += t;
                }
            }
            let (perm, _) = best_permutation(target, &placed);
            let (r_new, b_new, residual) = kabsch(&permute(moving, &perm), target);
            r = r_new;
            b = b_new;
            let improved = prev - residual;
            if residual <= prev {
                state = Some((perm, r.clone(), b.clone(), residual, it));
                prev = residual;
            }
            if improved < REGISTRATION_TOL {
                break;
            }
        }
        if let Some((perm, r, b, residual, it)) = state {
            if residual < best.residual {
                best = OrbitProjection {
                    residual,
                    transform: Transform::PermutationRotoTranslation {
                        permutation: perm,
                        rotation: to_rows(&r),
                        translation: b,
                    },
                    exact: false,
                    iterations: Some(it),
                };
            }
        }
    }
    Ok(best)
}

/// Dispatch to the projection for `group`. The registration bound uses the
/// default iteration cap.
pub fn project(group: GroupKind, x: &PointCloud, x_prime: &PointCloud) -> Result<OrbitProjection> {
    match group {
        GroupKind::Trivial => {
            check_pair(x, x_prime)?;
            Ok(OrbitProjection {
                residual: frob(&(x_prime.matrix() - x.matrix())),
                transform: Transform::Identity,
                exact: true,
                iterations: None,
            })
        }
        GroupKind::Translation => project_translation(x, x_prime),
        GroupKind::Rotation => project_rotation(x, x_prime),
        GroupKind::Orthogonal => project_orthogonal(x, x_prime),
        GroupKind::RotoTranslation => project_roto_translation(x, x_prime),
        GroupKind::Permutation => project_permutation(x, x_prime),
        GroupKind::PermutationRotoTranslation => {
            project_registration_upper(x, x_prime, REGISTRATION_MAX_ITERS)
        }
    }
}

/// Clamp into the invertible range, recording the clamp.
pub(crate) fn prepare_probability(p: f64, notes: &mut Vec<Note>) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(CertError::domain(format!("probability {p} outside [0,1]")));
    }
    let (q, clamped) = clamp_probability(p);
    if clamped {
        notes.push(Note::ProbabilityClamped);
    }
    if q == 0.5 {
        notes.push(Note::BoundaryProbability);
    }
    Ok(q)
}

pub(crate) fn check_group_dim(group: &GroupSpec, x: &PointCloud) -> Result<()> {
    if group.dim != x.dim() {
        return Err(CertError::domain(format!(
            "group dimension {} does not match point dimension {}",
            group.dim,
            x.dim()
        )));
    }
    Ok(())
}

/// Certified iff the orbit residual is strictly below the black-box radius.
/// `bound_value` is the orbit-based probability `Phi(Phi^-1(p) - res/sigma)`.
pub fn certify_orbit(
    group: GroupSpec,
    x: &PointCloud,
    x_prime: &PointCloud,
    p_lower: f64,
    sigma: f64,
) -> Result<CertificateOutcome> {
    check_sigma(sigma)?;
    check_group_dim(&group, x)?;
    let projection = project(group.kind, x, x_prime)?;
    certify_projection(group.kind, &projection, p_lower, sigma)
}

/// The orbit certificate for a projection computed elsewhere, e.g. a
/// registration bound with a custom iteration cap.
pub fn certify_projection(
    group: GroupKind,
    projection: &OrbitProjection,
    p_lower: f64,
    sigma: f64,
) -> Result<CertificateOutcome> {
    check_sigma(sigma)?;
    let method = if group == GroupKind::Trivial {
        Method::BlackBox
    } else {
        Method::Orbit
    };
    let mut out = CertificateOutcome::new(group, method, p_lower);
    let p = prepare_probability(p_lower, &mut out.notes)?;
    let z = std_normal_quantile(p)?;
    let radius = sigma * z;
    out.radius = Some(radius);
    out.residual = Some(projection.residual);
    out.margin = Some(radius - projection.residual);
    out.bound_value = std_normal_cdf(z - projection.residual / sigma)?;
    out.certified = projection.residual < radius;
    if !projection.exact && !out.certified {
        out.note(Note::Inconclusive);
    }
    Ok(out)
}

/// Multi-class radius `(sigma/2) (Phi^-1(p_a) - Phi^-1(p_b))`.
pub fn multiclass_radius(p_a_lower: f64, p_b_upper: f64, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    Ok(0.5 * sigma * (std_normal_quantile(p_a_lower)? - std_normal_quantile(p_b_upper)?))
}

/// Orbit residual compared to the multi-class radius.
pub fn certify_orbit_multiclass(
    group: GroupSpec,
    x: &PointCloud,
    x_prime: &PointCloud,
    p_a_lower: f64,
    p_b_upper: f64,
    sigma: f64,
) -> Result<CertificateOutcome> {
    check_sigma(sigma)?;
    check_group_dim(&group, x)?;
    let projection = project(group.kind, x, x_prime)?;
    let method = if group.kind == GroupKind::Trivial {
        Method::BlackBox
    } else {
        Method::Orbit
    };
    let mut out = CertificateOutcome::new(group.kind, method, p_a_lower);
    let pa = prepare_probability(p_a_lower, &mut out.notes)?;
    let pb = prepare_probability(p_b_upper, &mut out.notes)?;
    out.notes.retain(|n| *n != Note::BoundaryProbability);
    out.residual = Some(projection.residual);
    out.runner_up_upper = Some(p_b_upper);
    if pa <= pb {
        out.note(Note::ClassesNotSeparated);
        return Ok(out);
    }
    let radius = multiclass_radius(pa, pb, sigma)?;
    out.radius = Some(radius);
    out.margin = Some(radius - projection.residual);
    out.bound_value = std_normal_cdf(std_normal_quantile(pa)? - projection.residual / sigma)?;
    out.certified = projection.residual < radius;
    if !projection.exact && !out.certified {
        out.note(Note::Inconclusive);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{center, rot2, rot3_zyx};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_cloud(rng: &mut ChaCha8Rng, n: usize, d: usize) -> PointCloud {
        PointCloud::new(DMatrix::from_fn(n, d, |_, _| rng.random_range(-1.0..1.0))).unwrap()
    }

    fn rot2_dyn(theta: f64) -> DMatrix<f64> {
        DMatrix::from_column_slice(2, 2, rot2(theta).as_slice())
    }

    fn rot3_dyn(w: [f64; 3]) -> DMatrix<f64> {
        DMatrix::from_column_slice(3, 3, rot3_zyx(w).as_slice())
    }

    #[test]
    fn radius_examples() {
        assert_eq!(blackbox_radius(0.5, 0.3).unwrap(), 0.0);
        assert!((blackbox_radius(0.8, 0.5).unwrap() - 0.42081).abs() < 1e-4);
        assert!((blackbox_radius(0.999, 1.0).unwrap() - 3.0902).abs() < 1e-3);
        assert!(blackbox_radius(0.4, 1.0).unwrap() < 0.0);
        assert!(blackbox_radius(1.0, 1.0).is_err());
        assert!(blackbox_radius(0.8, 0.0).is_err());
    }

    #[test]
    fn translation_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_cloud(&mut rng, 6, 3);
        let moved = x.translate(&[0.3, -2.0, 1.0]).unwrap();
        let p = project_translation(&x, &moved).unwrap();
        assert!(p.residual < 1e-12);
        assert!((p.transform.apply(&moved).unwrap().matrix() - x.matrix()).amax() < 1e-12);

        let delta = center(&random_cloud(&mut rng, 6, 3));
        let xp = PointCloud::new(x.matrix() + delta.matrix()).unwrap();
        let p = project_translation(&x, &xp).unwrap();
        assert!((p.residual - delta.norm()).abs() < 1e-12);
    }

    #[test]
    fn rotation_recovers_orbit_members() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let x = random_cloud(&mut rng, 7, 2);
            let xp = x.transform(&rot2_dyn(rng.random_range(0.0..2.0 * PI))).unwrap();
            let p = project_rotation(&x, &xp).unwrap();
            assert!(p.residual < 1e-10);
            let back = p.transform.apply(&xp).unwrap();
            assert!((back.matrix() - x.matrix()).amax() < 1e-10);

            let x3 = random_cloud(&mut rng, 7, 3);
            let w = [rng.random_range(0.0..6.0), rng.random_range(-1.5..1.5), rng.random_range(0.0..6.0)];
            let xp3 = x3.transform(&rot3_dyn(w)).unwrap();
            let p3 = project_rotation(&x3, &xp3).unwrap();
            assert!(p3.residual < 1e-10);
            if let Transform::Linear(r) = &p3.transform {
                assert!((from_rows(r).determinant() - 1.0).abs() < 1e-10);
            } else {
                panic!("expected a matrix");
            }
        }
    }

    #[test]
    fn reflection_separates_so_and_o() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_cloud(&mut rng, 6, 2);
        let flip = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let xp = x.transform(&flip).unwrap();
        assert!(project_rotation(&x, &xp).unwrap().residual > 1e-3);
        assert!(project_orthogonal(&x, &xp).unwrap().residual < 1e-10);
    }

    #[test]
    fn roto_translation_is_kabsch() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for d in [2, 3] {
            let x = random_cloud(&mut rng, 8, d);
            let r = if d == 2 { rot2_dyn(0.7) } else { rot3_dyn([0.3, -0.4, 2.0]) };
            let b: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
            let xp = x.transform(&r).unwrap().translate(&b).unwrap();
            let p = project_roto_translation(&x, &xp).unwrap();
            assert!(p.residual < 1e-10);
            assert!((p.transform.apply(&xp).unwrap().matrix() - x.matrix()).amax() < 1e-10);

            let y = random_cloud(&mut rng, 8, d);
            let se = project_roto_translation(&x, &y).unwrap().residual;
            let so = project_rotation(&center(&x), &center(&y)).unwrap().residual;
            assert!((se - so).abs() < 1e-10);
        }
    }

    #[test]
    fn permutation_recovery() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = random_cloud(&mut rng, 9, 3);
        let xp = x.permute_rows(&[3, 1, 8, 0, 2, 7, 6, 5, 4]).unwrap();
        let p = project_permutation(&x, &xp).unwrap();
        assert!(p.residual < 1e-12);
        assert_eq!(p.transform.apply(&xp).unwrap(), x);
    }

    #[test]
    fn registration_recovers_rigid_permuted_copies() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for d in [2, 3] {
            let x = random_cloud(&mut rng, 10, d);
            let r = if d == 2 { rot2_dyn(2.5) } else { rot3_dyn([1.0, 0.6, 4.0]) };
            let b: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
            let mut perm: Vec<usize> = (0..10).collect();
            perm.reverse();
            perm.swap(2, 7);
            let xp = x.permute_rows(&perm).unwrap().transform(&r).unwrap().translate(&b).unwrap();
            let p = project_registration_upper(&x, &xp, 50).unwrap();
            assert!(!p.exact);
            assert!(p.residual < 1e-8, "residual {}", p.residual);
            let back = p.transform.apply(&xp).unwrap();
            assert!(((back.matrix() - x.matrix()).norm() - p.residual).abs() < 1e-9);
        }
    }

    #[test]
    fn registration_is_monotone_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let x = random_cloud(&mut rng, 8, 2);
            let y = random_cloud(&mut rng, 8, 2);
            let one = project_registration_upper(&x, &y, 1).unwrap().residual;
            let two = project_registration_upper(&x, &y, 2).unwrap().residual;
            let many = project_registration_upper(&x, &y, 50).unwrap().residual;
            assert!(two <= one && many <= two);
            assert!(one <= (y.matrix() - x.matrix()).norm() + 1e-12);
        }
        assert!(project_registration_upper(&random_cloud(&mut rng, 3, 2), &random_cloud(&mut rng, 3, 2), 0).is_err());
    }

    #[test]
    fn certify_orbit_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = random_cloud(&mut rng, 5, 2);
        let xp = x.transform(&rot2_dyn(1.1)).unwrap();
        let g = GroupSpec::new(GroupKind::Rotation, 2).unwrap();
        let out = certify_orbit(g, &x, &xp, 0.6, 0.1).unwrap();
        assert!(out.certified);
        assert!(out.residual.unwrap() < 1e-10);

        let out = certify_orbit(g, &x, &xp, 0.4, 1.0).unwrap();
        assert!(!out.certified && out.radius.unwrap() < 0.0);

        let out = certify_orbit(g, &x, &xp, 0.5, 1.0).unwrap();
        assert!(!out.certified && out.has_note(Note::BoundaryProbability));

        // residual 0.41 against r = 0.4208
        let mut delta = DMatrix::zeros(5, 2);
        delta[(0, 0)] = 0.41;
        let xp = PointCloud::new(x.matrix() + delta).unwrap();
        let t = GroupSpec::new(GroupKind::Trivial, 2).unwrap();
        let out = certify_orbit(t, &x, &xp, 0.8, 0.5).unwrap();
        assert!(out.certified);
        assert!((out.margin.unwrap() - (0.42081 - 0.41)).abs() < 1e-4);
    }

    #[test]
    fn group_nesting() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let d = if rng.random_bool(0.5) { 2 } else { 3 };
            let x = random_cloud(&mut rng, 6, d);
            let y = random_cloud(&mut rng, 6, d);
            let trivial = project(GroupKind::Trivial, &x, &y).unwrap().residual;
            let so = project(GroupKind::Rotation, &x, &y).unwrap().residual;
            let o = project(GroupKind::Orthogonal, &x, &y).unwrap().residual;
            let se = project(GroupKind::RotoTranslation, &x, &y).unwrap().residual;
            let t = project(GroupKind::Translation, &x, &y).unwrap().residual;
            assert!(so <= trivial + 1e-12);
            assert!(o <= so + 1e-12);
            assert!(se <= so + 1e-12 && se <= t + 1e-12);
            assert!(t <= trivial + 1e-12);
        }
    }

    #[test]
    fn multiclass_radius_collapses() {
        let r = multiclass_radius(0.8, 0.2, 0.5).unwrap();
        assert!((r - blackbox_radius(0.8, 0.5).unwrap()).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let x = random_cloud(&mut rng, 4, 2);
        let g = GroupSpec::new(GroupKind::Trivial, 2).unwrap();
        let out = certify_orbit_multiclass(g, &x, &x, 0.3, 0.4, 1.0).unwrap();
        assert!(!out.certified && out.has_note(Note::ClassesNotSeparated));
    }
}
