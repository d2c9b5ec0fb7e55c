use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{CertError, Result};
use crate::seed;

/// Samples are generated in fixed-size chunks, each with its own derived
/// generator, so output is identical regardless of how many worker threads
/// process the chunks.
pub const SAMPLE_CHUNK: usize = 4096;

const SYMMETRY_TOL: f64 = 1e-10;
const EIGEN_REL_TOL: f64 = 1e-9;

/// A (possibly rank-deficient) multivariate normal law.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSpec {
    mean: Vec<f64>,
    covariance: DMatrix<f64>,
}

impl GaussianSpec {
    pub fn new(mean: Vec<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        if d == 0 {
            return Err(CertError::domain("gaussian of dimension 0"));
        }
        if covariance.nrows() != d || covariance.ncols() != d {
            return Err(CertError::domain(format!(
                "mean has dimension {d} but covariance is {}x{}",
                covariance.nrows(),
                covariance.ncols()
            )));
        }
        if mean.iter().chain(covariance.iter()).any(|v| !v.is_finite()) {
            return Err(CertError::domain("non-finite gaussian parameter"));
        }
        for i in 0..d {
            for j in 0..i {
                if (covariance[(i, j)] - covariance[(j, i)]).abs() > SYMMETRY_TOL {
                    return Err(CertError::domain(format!(
                        "covariance not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(GaussianSpec { mean, covariance })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }
}

/// Precomputed square-root factor `V diag(sqrt(lambda))` of the
/// covariance, with eigenvalues below a relative floor set to zero.
/// Eigendecomposition rather than Cholesky, because singular covariances are
/// routine here.
#[derive(Debug, Clone)]
pub struct GaussianSampler {
    dim: usize,
    mean: Vec<f64>,
    // row-major dim x dim
    factor: Vec<f64>,
    rank: usize,
}

impl GaussianSampler {
    pub fn new(spec: &GaussianSpec) -> Result<Self> {
        let d = spec.dim();
        let eig = SymmetricEigen::new(spec.covariance.clone());
        let largest = eig.eigenvalues.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let floor = -EIGEN_REL_TOL * largest;
        if let Some(bad) = eig.eigenvalues.iter().find(|&&v| v < floor) {
            return Err(CertError::domain(format!(
                "covariance is not PSD: eigenvalue {bad} below {floor}"
            )));
        }
        let mut factor = vec![0.0; d * d];
        let mut rank = 0;
        for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
            let s = if lambda > EIGEN_REL_TOL * largest {
                rank += 1;
                lambda.sqrt()
            } else {
                0.0
            };
            for i in 0..d {
                factor[i * d + k] = eig.eigenvectors[(i, k)] * s;
            }
        }
        Ok(GaussianSampler {
            dim: d,
            mean: spec.mean.clone(),
            factor,
            rank,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Numerical rank of the covariance after clipping.
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Draw `count` samples and map each through `f`, in sample order.
    pub fn map_samples<T, F>(&self, count: usize, seed: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&[f64]) -> T + Sync,
    {
        let chunks = count.div_ceil(SAMPLE_CHUNK);
        let per_chunk: Vec<Vec<T>> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let len = SAMPLE_CHUNK.min(count - c * SAMPLE_CHUNK);
                let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(seed, &[c as u64]));
                let d = self.dim;
                let mut xi = vec![0.0; d];
                let mut v = vec![0.0; d];
                let mut out = Vec::with_capacity(len);
                for _ in 0..len {
                    for z in xi.iter_mut() {
                        *z = StandardNormal.sample(&mut rng);
                    }
                    for (i, vi) in v.iter_mut().enumerate() {
                        let row = &self.factor[i * d..(i + 1) * d];
                        *vi = self.mean[i] + row.iter().zip(&xi).map(|(a, b)| a * b).sum::<f64>();
                    }
                    out.push(f(&v));
                }
                out
            })
            .collect();
        per_chunk.into_iter().flatten().collect()
    }
}

/// Draw `count` samples of `N(mean, clip(cov))`, reproducibly from `seed`.
pub fn sample_gaussian(spec: &GaussianSpec, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if count == 0 {
        return Err(CertError::domain("sample count must be >= 1"));
    }
    let sampler = GaussianSampler::new(spec)?;
    Ok(sampler.map_samples(count, seed, |v| v.to_vec()))
}
