//! Point clouds, Frobenius algebra and rotation parameterizations.
//!
//! A [`PointCloud`] is an `N x D` matrix with one point per row. Group
//! elements act from the right: a rotation `R` maps `X` to `X R^T`, a
//! translation `b` maps `X` to `X + 1_N b^T`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::{DMatrix, Matrix2, Matrix3, RowDVector};
use serde::{Deserialize, Serialize};

use crate::error::{CertError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    data: DMatrix<f64>,
}

impl PointCloud {
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        if data.nrows() == 0 {
            return Err(CertError::domain("point cloud needs at least one point"));
        }
        if !(2..=3).contains(&data.ncols()) {
            return Err(CertError::domain(format!(
                "point dimension must be 2 or 3, got {}",
                data.ncols()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(CertError::domain("point cloud has non-finite entries"));
        }
        Ok(PointCloud { data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(CertError::domain("ragged point rows"));
        }
        Self::new(DMatrix::from_fn(n, d, |i, j| rows[i][j]))
    }

    pub fn n_points(&self) -> usize {
        self.data.nrows()
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.data.shape()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }

    /// Sum of squared entries, `||X||_2^2`.
    pub fn norm_squared(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    /// Frobenius norm `||X||_2`.
    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn scaled(&self, c: f64) -> PointCloud {
        PointCloud {
            data: &self.data * c,
        }
    }

    /// `X R^T` for a `D x D` matrix `R`.
    pub fn transform(&self, r: &DMatrix<f64>) -> Result<PointCloud> {
        if r.shape() != (self.dim(), self.dim()) {
            return Err(CertError::ShapeMismatch {
                expected: (self.dim(), self.dim()),
                actual: r.shape(),
            });
        }
        Ok(PointCloud {
            data: &self.data * r.transpose(),
        })
    }

    /// `X + 1_N b^T`.
    pub fn translate(&self, b: &[f64]) -> Result<PointCloud> {
        if b.len() != self.dim() {
            return Err(CertError::domain(format!(
                "translation has {} components for dimension {}",
                b.len(),
                self.dim()
            )));
        }
        let mut data = self.data.clone();
        for mut row in data.row_iter_mut() {
            for (v, t) in row.iter_mut().zip(b) {
                *v += t;
            }
        }
        Ok(PointCloud { data })
    }

    /// Row `n` of the output is row `perm[n]` of the input.
    pub fn permute_rows(&self, perm: &[usize]) -> Result<PointCloud> {
        let n = self.n_points();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(CertError::domain("not a permutation of the rows"));
        }
        Ok(PointCloud {
            data: DMatrix::from_fn(n, self.dim(), |i, j| self.data[(perm[i], j)]),
        })
    }

    pub fn add(&self, delta: &Perturbation) -> Result<PointCloud> {
        check_shapes(self.shape(), delta.delta.shape())?;
        PointCloud::new(&self.data + &delta.delta)
    }

    pub fn column_means(&self) -> RowDVector<f64> {
        self.data.row_mean()
    }
}

pub(crate) fn check_shapes(expected: (usize, usize), actual: (usize, usize)) -> Result<()> {
    if expected != actual {
        return Err(CertError::ShapeMismatch { expected, actual });
    }
    Ok(())
}

/// `Delta = X' - X`.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    pub delta: DMatrix<f64>,
}

impl Perturbation {
    pub fn between(x: &PointCloud, x_prime: &PointCloud) -> Result<Self> {
        check_shapes(x.shape(), x_prime.shape())?;
        Ok(Perturbation {
            delta: x_prime.matrix() - x.matrix(),
        })
    }

    pub fn norm_squared(&self) -> f64 {
        self.delta.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }
}

/// The invariance groups a certificate can target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupKind {
    /// No invariance: plain black-box smoothing.
    Trivial,
    /// `T(D)`
    Translation,
    /// `SO(D)`
    Rotation,
    /// `O(D)`
    Orthogonal,
    /// `SE(D)`
    RotoTranslation,
    /// `S(N)`
    Permutation,
    /// `S(N) x SE(D)`
    PermutationRotoTranslation,
}

impl GroupKind {
    pub fn symbol(self) -> &'static str {
        match self {
            GroupKind::Trivial => "none",
            GroupKind::Translation => "T",
            GroupKind::Rotation => "SO",
            GroupKind::Orthogonal => "O",
            GroupKind::RotoTranslation => "SE",
            GroupKind::Permutation => "S",
            GroupKind::PermutationRotoTranslation => "SxSE",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        Some(match s {
            "none" | "blackbox" => GroupKind::Trivial,
            "T" => GroupKind::Translation,
            "SO" => GroupKind::Rotation,
            "O" => GroupKind::Orthogonal,
            "SE" => GroupKind::RotoTranslation,
            "S" => GroupKind::Permutation,
            "SxSE" => GroupKind::PermutationRotoTranslation,
            _ => return None,
        })
    }

    /// Groups with a tight (worst-case invariant classifier) certificate.
    pub fn has_tight_certificate(self) -> bool {
        matches!(
            self,
            GroupKind::Trivial
                | GroupKind::Translation
                | GroupKind::Rotation
                | GroupKind::RotoTranslation
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub kind: GroupKind,
    pub dim: usize,
}

impl GroupSpec {
    pub fn new(kind: GroupKind, dim: usize) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(CertError::domain(format!("unsupported dimension {dim}")));
        }
        Ok(GroupSpec { kind, dim })
    }
}

pub fn frobenius_inner(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    check_shapes(a.shape(), b.shape())?;
    Ok(a.matrix().dot(b.matrix()))
}

/// `X - 1_N Xbar` with `Xbar` the column-wise averages.
pub fn center(x: &PointCloud) -> PointCloud {
    let means = x.column_means();
    let mut data = x.matrix().clone();
    for mut row in data.row_iter_mut() {
        row -= &means;
    }
    PointCloud { data }
}

pub(crate) fn center_matrix(m: &DMatrix<f64>) -> DMatrix<f64> {
    let means = m.row_mean();
    let mut data = m.clone();
    for mut row in data.row_iter_mut() {
        row -= &means;
    }
    data
}

/// Counter-clockwise rotation by `theta`.
pub fn rot2(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// Intrinsic z-y-x Euler rotation `R_z(w1) R_y(w2) R_x(w3)`.
pub fn rot3_zyx(omega: [f64; 3]) -> Matrix3<f64> {
    let (s1, c1) = omega[0].sin_cos();
    let (s2, c2) = omega[1].sin_cos();
    let (s3, c3) = omega[2].sin_cos();
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

/// Inverse of [`rot3_zyx`] away from gimbal lock; `w1, w3` in `[0, 2 pi)`,
/// `w2` in `[-pi/2, pi/2]`.
pub fn euler_zyx_from_matrix(r: &Matrix3<f64>) -> [f64; 3] {
    let wrap = |a: f64| if a < 0.0 { a + 2.0 * PI } else { a };
    let w2 = (-r[(2, 0)]).clamp(-1.0, 1.0).asin();
    let w1 = wrap(r[(1, 0)].atan2(r[(0, 0)]));
    let w3 = wrap(r[(2, 1)].atan2(r[(2, 2)]));
    [w1, w2, w3]
}

/// `X R(-pi/2)^T`, i.e. every row `(x, y)` mapped to `(y, -x)`, computed
/// without trigonometric round-off.
pub fn quarter_turn_cw(x: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(x.nrows(), 2, |i, j| {
        if j == 0 {
            x[(i, 1)]
        } else {
            -x[(i, 0)]
        }
    })
}

/// Orientation parameters of a 2D perturbation relative to the clean cloud.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonParams {
    /// `<X, Delta>_F`
    pub eps1: f64,
    /// `<X R(-pi/2)^T, Delta>_F`
    pub eps2: f64,
    pub norm_x: f64,
    pub norm_delta: f64,
}

impl EpsilonParams {
    /// Build from the normalized coordinates `eps_k / (||X|| ||Delta||)`.
    pub fn from_normalized(norm_x: f64, norm_delta: f64, e1: f64, e2: f64) -> Result<Self> {
        if !(norm_x >= 0.0 && norm_delta >= 0.0) {
            return Err(CertError::domain("norms must be non-negative"));
        }
        if e1 * e1 + e2 * e2 > 1.0 + 1e-12 {
            return Err(CertError::domain(format!(
                "normalized parameters ({e1}, {e2}) lie outside the unit disc"
            )));
        }
        let scale = norm_x * norm_delta;
        Ok(EpsilonParams {
            eps1: e1 * scale,
            eps2: e2 * scale,
            norm_x,
            norm_delta,
        })
    }

    /// `(eps1, eps2) / (||X|| ||Delta||)`; zero when either norm vanishes.
    pub fn normalized(&self) -> (f64, f64) {
        let scale = self.norm_x * self.norm_delta;
        if scale == 0.0 {
            (0.0, 0.0)
        } else {
            (self.eps1 / scale, self.eps2 / scale)
        }
    }

    /// The Cauchy-Schwarz feasibility bound.
    pub fn is_feasible(&self) -> bool {
        self.eps1.hypot(self.eps2) <= self.norm_x * self.norm_delta + 1e-9
    }
}

pub fn epsilon_params(x: &PointCloud, delta: &Perturbation) -> Result<EpsilonParams> {
    if x.dim() != 2 {
        return Err(CertError::domain(format!(
            "orientation parameters are defined for D = 2, got D = {}",
            x.dim()
        )));
    }
    check_shapes(x.shape(), delta.delta.shape())?;
    let xm = x.matrix();
    Ok(EpsilonParams {
        eps1: xm.dot(&delta.delta),
        eps2: quarter_turn_cw(xm).dot(&delta.delta),
        norm_x: x.norm(),
        norm_delta: delta.norm(),
    })
}

/// The `(eps1, eps2)` points at which a perturbation of norm `norm_delta`
/// is a pure rotation of a cloud of norm `norm_x`: none when
/// `norm_delta > 2 norm_x`, one for the half turn, two otherwise.
pub fn adversarial_rotation_locus(norm_x: f64, norm_delta: f64) -> Result<Vec<EpsilonParams>> {
    if !(norm_x >= 0.0 && norm_delta >= 0.0) {
        return Err(CertError::domain("norms must be non-negative"));
    }
    if norm_delta > 2.0 * norm_x {
        return Ok(Vec::new());
    }
    let d2 = norm_delta * norm_delta;
    let eps1 = -0.5 * d2;
    let eps2 = 0.5 * (d2 * (4.0 * norm_x * norm_x - d2)).max(0.0).sqrt();
    let point = |e2| EpsilonParams {
        eps1,
        eps2: e2,
        norm_x,
        norm_delta,
    };
    Ok(if eps2 == 0.0 {
        vec![point(0.0)]
    } else {
        vec![point(eps2), point(-eps2)]
    })
}

/// Parse the point-cloud text format: UTF-8 CSV, one point per row, no
/// header. Blank lines are ignored; ragged rows are rejected.
pub fn parse_csv(text: &str) -> Result<PointCloud> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| {
                f.trim().parse::<f64>().map_err(|e| CertError::Parse {
                    line: i + 1,
                    message: format!("{f:?}: {e}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(CertError::Parse {
                    line: i + 1,
                    message: format!("expected {} fields, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CertError::Parse {
            line: 0,
            message: "no points".into(),
        });
    }
    PointCloud::from_rows(&rows)
}

/// Inverse of [`parse_csv`]; numbers use the shortest representation that
/// parses back to the same `f64`.
pub fn to_csv(x: &PointCloud) -> String {
    let mut out = String::new();
    for row in x.matrix().row_iter() {
        let fields: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        let _ = writeln!(out, "{}", fields.join(","));
    }
    out
}
