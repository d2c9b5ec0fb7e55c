//! Robustness certificates for randomly smoothed classifiers on point clouds
//! whose base model is invariant under a group of spatial transformations.
//!
//! Two families of certificates are provided:
//!
//! * orbit-based certificates ([`orbit`]), which project the perturbed input
//!   onto the group orbit of the clean input and compare the residual to the
//!   black-box smoothing radius;
//! * tight certificates ([`tight`]), which solve the invariance-constrained
//!   worst-case problem exactly for translations and, via Monte-Carlo
//!   estimation ([`mc`]), for 2D/3D rotations and roto-translations.
//!
//! Point clouds are `N x D` matrices with one point per row, and every group
//! acts from the right (`X R^T + 1 b^T`).

pub mod error;
pub mod geometry;
pub mod mc;
pub mod numerics;
pub mod oracles;
pub mod orbit;
pub mod outcome;
pub mod reduced;
pub mod tight;

mod assignment;
mod seed;

pub use error::{CertError, Result};
pub use geometry::{EpsilonParams, GroupKind, GroupSpec, Perturbation, PointCloud};
pub use mc::{BaseClassifier, McConfig, PSource, SmoothPrediction};
pub use seed::derive_seed;
pub use orbit::{OrbitProjection, Transform};
pub use outcome::{CertificateOutcome, Method, Note, ProbabilityBound};
pub use reduced::{ReducedProblem, So3Reduction, Statistic};
pub use tight::TightOptions;
