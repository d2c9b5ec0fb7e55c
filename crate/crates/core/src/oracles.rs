//! Brute-force references and synthetic invariant classifiers. Everything
//! here is deliberately slow and simple; the test suites compare the real
//! implementations against it.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{CertError, Result};
use crate::geometry::{center, check_shapes, quarter_turn_cw, rot2, GroupKind, PointCloud};
use crate::mc::{noisy_labels, BaseClassifier};
use crate::numerics::log_sum_exp;
use crate::orbit::check_sigma;

/// Label 1 when `||X|| <= tau`, else 0. Invariant under `O(D)` and `S(N)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormThreshold {
    pub tau: f64,
}

impl BaseClassifier for NormThreshold {
    fn classify(&self, x: &PointCloud) -> usize {
        usize::from(x.norm() <= self.tau)
    }

    fn invariance(&self) -> GroupKind {
        GroupKind::Orthogonal
    }
}

/// Label 1 when `||X - 1 mean(X)|| <= tau`, else 0. Invariant under
/// translations, rotations, reflections and permutations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenteredNormThreshold {
    pub tau: f64,
}

impl BaseClassifier for CenteredNormThreshold {
    fn classify(&self, x: &PointCloud) -> usize {
        usize::from(center(x).norm() <= self.tau)
    }

    fn invariance(&self) -> GroupKind {
        GroupKind::PermutationRotoTranslation
    }
}

/// Sorted pairwise distances: a complete invariant of `S(N) x E(D)` for
/// generic clouds, and exactly invariant for all.
pub fn pairwise_signature(x: &PointCloud) -> Vec<f64> {
    let m = x.matrix();
    let n = m.nrows();
    let mut d = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            d.push((m.row(i) - m.row(j)).norm());
        }
    }
    d.sort_by(f64::total_cmp);
    d
}

/// Nearest reference signature, label = index of the reference.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseCentroid {
    pub references: Vec<Vec<f64>>,
}

impl PairwiseCentroid {
    pub fn from_clouds(clouds: &[PointCloud]) -> Result<Self> {
        let references: Vec<Vec<f64>> = clouds.iter().map(pairwise_signature).collect();
        if references.is_empty() || references.iter().any(|r| r.len() != references[0].len()) {
            return Err(CertError::domain(
                "references must be non-empty clouds with equal point counts",
            ));
        }
        Ok(PairwiseCentroid { references })
    }
}

impl BaseClassifier for PairwiseCentroid {
    fn classify(&self, x: &PointCloud) -> usize {
        let sig = pairwise_signature(x);
        let dist = |r: &Vec<f64>| -> f64 { r.iter().zip(&sig).map(|(a, b)| (a - b) * (a - b)).sum() };
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (k, r) in self.references.iter().enumerate() {
            let d = dist(r);
            if d < best_d {
                best = k;
                best_d = d;
            }
        }
        best
    }

    fn invariance(&self) -> GroupKind {
        GroupKind::PermutationRotoTranslation
    }
}

/// A uniformly random element of `O(D)` (`proper` restricts to `SO(D)`),
/// from the QR decomposition of a Gaussian matrix.
pub fn random_orthogonal(d: usize, proper: bool, rng: &mut impl Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(d, d, |_, _| StandardNormal.sample(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..d {
        if r[(k, k)] < 0.0 {
            q.column_mut(k).scale_mut(-1.0);
        }
    }
    if proper && q.determinant() < 0.0 {
        q.column_mut(0).scale_mut(-1.0);
    }
    q
}

/// Apply a random element of `group` to `x`.
pub fn random_group_action(group: GroupKind, x: &PointCloud, rng: &mut impl Rng) -> PointCloud {
    let d = x.dim();
    let n = x.n_points();
    let rotation = |rng: &mut _, proper| random_orthogonal(d, proper, rng);
    let translation = |rng: &mut ChaCha8Rng| (0..d).map(|_| rng.random_range(-5.0..5.0)).collect::<Vec<_>>();
    let mut local = ChaCha8Rng::seed_from_u64(rng.random());
    let permutation = |rng: &mut ChaCha8Rng| {
        let mut p: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            p.swap(i, rng.random_range(0..=i));
        }
        p
    };
    let out = match group {
        GroupKind::Trivial => Ok(x.clone()),
        GroupKind::Translation => x.translate(&translation(&mut local)),
        GroupKind::Rotation => x.transform(&rotation(&mut local, true)),
        GroupKind::Orthogonal => x.transform(&rotation(&mut local, false)),
        GroupKind::RotoTranslation => x
            .transform(&rotation(&mut local, true))
            .and_then(|y| y.translate(&translation(&mut local))),
        GroupKind::Permutation => x.permute_rows(&permutation(&mut local)),
        GroupKind::PermutationRotoTranslation => x
            .permute_rows(&permutation(&mut local))
            .and_then(|y| y.transform(&rotation(&mut local, false)))
            .and_then(|y| y.translate(&translation(&mut local))),
    };
    out.expect("group action preserves shape")
}

/// Number of label changes over `trials` random elements of `group`.
pub fn invariance_audit(
    g: &dyn BaseClassifier,
    x: &PointCloud,
    group: GroupKind,
    trials: usize,
    seed: u64,
) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = g.classify(x);
    (0..trials)
        .filter(|_| g.classify(&random_group_action(group, x, &mut rng)) != base)
        .count()
}

/// `log int_0^{2 pi} exp(<Z R(w)^T, X> / sigma^2) dw` by the periodic
/// trapezoid rule with `grid` nodes.
pub fn haar_oracle_so2(x: &PointCloud, z: &PointCloud, sigma: f64, grid: usize) -> Result<f64> {
    if x.dim() != 2 {
        return Err(CertError::domain("the SO(2) oracle needs D = 2"));
    }
    check_shapes(x.shape(), z.shape())?;
    check_sigma(sigma)?;
    if grid < 1000 {
        return Err(CertError::domain("oracle grid must be >= 1000"));
    }
    let s2 = sigma * sigma;
    let h = 2.0 * PI / grid as f64;
    let terms: Vec<f64> = (0..grid)
        .map(|k| {
            let r = rot2(k as f64 * h);
            let r = DMatrix::from_column_slice(2, 2, r.as_slice());
            (z.matrix() * r.transpose()).dot(x.matrix()) / s2
        })
        .collect();
    Ok(log_sum_exp(&terms) + h.ln())
}

/// The closed form `log(2 pi) + log I0(sqrt(<Z,X>^2 + <Z, X R(-pi/2)^T>^2) / sigma^2)`
/// that [`haar_oracle_so2`] validates.
pub fn haar_closed_form_so2(x: &PointCloud, z: &PointCloud, sigma: f64) -> Result<f64> {
    check_shapes(x.shape(), z.shape())?;
    let a = z.matrix().dot(x.matrix());
    let b = z.matrix().dot(&quarter_turn_cw(x.matrix()));
    Ok((2.0 * PI).ln() + crate::numerics::log_bessel_i0(a.hypot(b) / (sigma * sigma))?)
}

/// `log int_{SO(3)} exp(<R, m> / sigma^2) cos(w2) dw` over the z-y-x Euler
/// box: periodic trapezoid in `w1` and `w3`, composite Simpson in `w2`.
/// `grid` is the node count per axis (rounded up to even for Simpson).
pub fn haar_oracle_so3(m: &Matrix3<f64>, sigma: f64, grid: usize) -> Result<f64> {
    check_sigma(sigma)?;
    if grid < 50 {
        return Err(CertError::domain("oracle grid must be >= 50 per axis"));
    }
    let ms = m / (sigma * sigma);
    let h_per = 2.0 * PI / grid as f64;
    let intervals = grid + grid % 2;
    let h2 = PI / intervals as f64;
    let trig: Vec<(f64, f64)> = (0..grid).map(|k| (k as f64 * h_per).sin_cos()).collect();

    let slices: Vec<f64> = (1..intervals)
        .map(|j| {
            let w2 = -PI / 2.0 + j as f64 * h2;
            let simpson = if j % 2 == 1 { 4.0 } else { 2.0 };
            let mut terms = Vec::with_capacity(grid * grid);
            for &(s1, c1) in &trig {
                for &(s3, c3) in &trig {
                    let r = rot3_from_trig(s1, c1, w2, s3, c3);
                    terms.push(r.component_mul(&ms).sum());
                }
            }
            log_sum_exp(&terms) + (simpson * w2.cos()).ln()
        })
        .collect();
    // endpoints carry weight cos(+-pi/2) = 0
    Ok(log_sum_exp(&slices) + (h2 / 3.0).ln() + 2.0 * h_per.ln())
}

fn rot3_from_trig(s1: f64, c1: f64, w2: f64, s3: f64, c3: f64) -> Matrix3<f64> {
    let (s2, c2) = w2.sin_cos();
    Matrix3::new(
        c1 * c2,
        c1 * s2 * s3 - s1 * c3,
        c1 * s2 * c3 + s1 * s3,
        s1 * c2,
        s1 * s2 * s3 + c1 * c3,
        s1 * s2 * c3 - c1 * s3,
        -s2,
        c2 * s3,
        c2 * c3,
    )
}

/// `min_theta ||X' R(theta)^T - X||` over `grid` equally spaced angles.
pub fn brute_force_procrustes_2d(x: &PointCloud, x_prime: &PointCloud, grid: usize) -> Result<f64> {
    angle_grid_min(x, x_prime, grid, false)
}

/// As [`brute_force_procrustes_2d`] over both components of `O(2)`.
pub fn brute_force_orthogonal_2d(x: &PointCloud, x_prime: &PointCloud, grid: usize) -> Result<f64> {
    angle_grid_min(x, x_prime, grid, true)
}

fn angle_grid_min(x: &PointCloud, x_prime: &PointCloud, grid: usize, reflect: bool) -> Result<f64> {
    if x.dim() != 2 {
        return Err(CertError::domain("the angle-grid oracle needs D = 2"));
    }
    check_shapes(x.shape(), x_prime.shape())?;
    if grid < 10_000 {
        return Err(CertError::domain("angle grid must be >= 10000"));
    }
    let flips: &[f64] = if reflect { &[1.0, -1.0] } else { &[1.0] };
    let mut best = f64::INFINITY;
    for &f in flips {
        for k in 0..grid {
            let (s, c) = (2.0 * PI * k as f64 / grid as f64).sin_cos();
            let mut sum = 0.0;
            for (p, q) in x_prime.matrix().row_iter().zip(x.matrix().row_iter()) {
                let (a, b) = (p[0], f * p[1]);
                let u = c * a - s * b - q[0];
                let v = s * a + c * b - q[1];
                sum += u * u + v * v;
            }
            best = best.min(sum);
        }
    }
    Ok(best.sqrt())
}

/// Exhaustive minimum of `||P X' - X||` over all `N!` row permutations.
pub fn brute_force_permutation(x: &PointCloud, x_prime: &PointCloud) -> Result<f64> {
    check_shapes(x.shape(), x_prime.shape())?;
    let n = x.n_points();
    if n > 8 {
        return Err(CertError::domain(format!("exhaustive search refused for N = {n} > 8")));
    }
    let cost = DMatrix::from_fn(n, n, |i, j| (x_prime.matrix().row(j) - x.matrix().row(i)).norm_squared());
    let mut perm: Vec<usize> = (0..n).collect();
    let total = |p: &[usize]| p.iter().enumerate().map(|(i, &j)| cost[(i, j)]).sum::<f64>();
    let mut best = total(&perm);
    // Heap's algorithm
    let mut c = vec![0; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            best = best.min(total(&perm));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(best.sqrt())
}

/// Frequency of `label` among `n >= 10^6` noisy evaluations, with its
/// binomial standard error.
pub fn reference_probability(
    g: &dyn BaseClassifier,
    x: &PointCloud,
    label: usize,
    sigma: f64,
    n: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    check_sigma(sigma)?;
    if n < 1_000_000 {
        return Err(CertError::domain("reference runs need n >= 10^6"));
    }
    let hits = noisy_labels(g, x, sigma, n, seed)
        .into_iter()
        .filter(|&l| l == label)
        .count();
    let p = hits as f64 / n as f64;
    Ok((p, (p * (1.0 - p) / n as f64).sqrt()))
}
