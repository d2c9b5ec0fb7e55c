//! Parameter-space sweeps of the inverse certificate over the normalized
//! orientation coordinates `(e1, e2) = (eps1, eps2) / (||X|| ||Delta||)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CertError, Result};
use crate::geometry::{adversarial_rotation_locus, EpsilonParams};
use crate::mc::{inverse_certify_reduced, McConfig};
use crate::numerics::std_normal_cdf;
use crate::orbit::check_sigma;
use crate::seed::derive;

use super::so2::build_so2_problem_from_params;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridGroup {
    BlackBox,
    So2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GridDomain {
    /// `[0, 1] x [0, 1]`.
    #[default]
    UnitSquare,
    /// `[-1, 1] x [-1, 1]`, which also contains the adversarial-rotation loci
    /// (they always have `e1 < 0`).
    Full,
}

impl GridDomain {
    /// Node `i` of `resolution`, computed so that nodes shared between
    /// resolutions are bit-identical.
    pub fn node(self, i: usize, resolution: usize) -> f64 {
        let last = (resolution - 1) as f64;
        match self {
            GridDomain::UnitSquare => i as f64 / last,
            GridDomain::Full => (2.0 * i as f64 - last) / last,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridCell {
    Value(f64),
    /// Outside the unit disc: no perturbation has these coordinates.
    Infeasible,
}

impl GridCell {
    pub fn value(self) -> Option<f64> {
        match self {
            GridCell::Value(v) => Some(v),
            GridCell::Infeasible => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PminGrid {
    pub group: GridGroup,
    pub domain: GridDomain,
    pub resolution: usize,
    /// Node coordinates shared by both axes.
    pub axis: Vec<f64>,
    /// `cells[j][i]` is the cell at `(e1, e2) = (axis[i], axis[j])`.
    pub cells: Vec<Vec<GridCell>>,
    /// Normalized adversarial-rotation loci `(e1, e2)`.
    pub loci: Vec<(f64, f64)>,
}

impl PminGrid {
    /// Cell-wise `self - other`, e.g. black-box minus tight `p_min`.
    pub fn difference(&self, other: &PminGrid) -> Result<PminGrid> {
        if self.resolution != other.resolution || self.domain != other.domain {
            return Err(CertError::domain("grids have different layouts"));
        }
        let cells = self
            .cells
            .iter()
            .zip(&other.cells)
            .map(|(a, b)| {
                a.iter()
                    .zip(b)
                    .map(|(a, b)| match (a, b) {
                        (GridCell::Value(a), GridCell::Value(b)) => GridCell::Value(a - b),
                        _ => GridCell::Infeasible,
                    })
                    .collect()
            })
            .collect();
        Ok(PminGrid {
            cells,
            ..self.clone()
        })
    }

    /// Coordinates `(e1, e2)` of the largest feasible cell value.
    pub fn argmax(&self) -> Option<(f64, f64)> {
        let mut best: Option<(f64, f64, f64)> = None;
        for (j, row) in self.cells.iter().enumerate() {
            for (i, cell) in row.iter().enumerate() {
                if let GridCell::Value(v) = cell {
                    if best.is_none_or(|b| *v > b.2) {
                        best = Some((self.axis[i], self.axis[j], *v));
                    }
                }
            }
        }
        best.map(|(a, b, _)| (a, b))
    }
}

/// `p_min` over a `resolution x resolution` raster of the orientation
/// coordinates. Each cell draws from a seed keyed by its coordinates, so a
/// coarse grid reproduces the fine grid exactly at shared nodes.
#[allow(clippy::too_many_arguments)]
pub fn pmin_grid(
    group: GridGroup,
    norm_x: f64,
    norm_delta: f64,
    sigma: f64,
    resolution: usize,
    domain: GridDomain,
    mc: &McConfig,
    seed: u64,
) -> Result<PminGrid> {
    check_sigma(sigma)?;
    if !(norm_x >= 0.0 && norm_delta >= 0.0 && norm_x.is_finite() && norm_delta.is_finite()) {
        return Err(CertError::domain(format!(
            "norms must be finite and >= 0, got ({norm_x}, {norm_delta})"
        )));
    }
    if resolution < 2 {
        return Err(CertError::domain("grid resolution must be >= 2"));
    }
    mc.validate()?;

    let axis: Vec<f64> = (0..resolution).map(|i| domain.node(i, resolution)).collect();
    let blackbox = std_normal_cdf(norm_delta / sigma)?;
    let coords: Vec<(f64, f64)> = axis
        .iter()
        .flat_map(|&e2| axis.iter().map(move |&e1| (e1, e2)))
        .collect();

    let values = coords
        .par_iter()
        .map(|&(e1, e2)| -> Result<GridCell> {
            if e1 * e1 + e2 * e2 > 1.0 + 1e-12 {
                return Ok(GridCell::Infeasible);
            }
            match group {
                GridGroup::BlackBox => Ok(GridCell::Value(blackbox)),
                GridGroup::So2 => {
                    let eps = EpsilonParams::from_normalized(norm_x, norm_delta, e1, e2)?;
                    let problem = build_so2_problem_from_params(&eps, sigma)?;
                    let cell_seed = derive(seed, &[e1.to_bits(), e2.to_bits()]);
                    Ok(GridCell::Value(inverse_certify_reduced(&problem, mc, cell_seed)?.value))
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let cells = values.chunks(resolution).map(<[GridCell]>::to_vec).collect();
    let scale = norm_x * norm_delta;
    let loci = adversarial_rotation_locus(norm_x, norm_delta)?
        .into_iter()
        .filter(|_| scale > 0.0)
        .map(|p| (p.eps1 / scale, p.eps2 / scale))
        .collect();
    Ok(PminGrid {
        group,
        domain,
        resolution,
        axis,
        cells,
        loci,
    })
}
