//! Primal recovery from a dual field and level-set thresholding.

use crate::error::Result;
use crate::grid::{div, same_grid, ScalarField, VectorField};
use crate::params::SolverParams;

/// Optimal primal value for a dual slack `w = div q - g`.
///
/// Piecewise linear and nondecreasing in `w`, with knots at `-eps - 2c`,
/// `-eps`, `eps` and `eps + 2c`. Knots belong to the flat branches.
pub fn primal_from_slack(w: f64, eps: f64, c: f64) -> f64 {
    if w < -eps - 2.0 * c {
        (w + eps + 2.0 * c) / (2.0 * eps)
    } else if w <= -eps {
        0.0
    } else if w < eps {
        (w + eps) / (2.0 * eps)
    } else if w <= eps + 2.0 * c {
        1.0
    } else {
        (w + eps - 2.0 * c) / (2.0 * eps)
    }
}

/// Cell-wise slack `div q - g`.
pub fn slack(q: &VectorField, g: &ScalarField) -> Result<ScalarField> {
    same_grid(q.grid(), g.grid())?;
    let d = div(q);
    let values = d
        .values()
        .iter()
        .zip(g.values())
        .map(|(a, b)| a - b)
        .collect();
    Ok(ScalarField::from_raw(*g.grid(), values))
}

/// Primal field `u` paired with the dual field `q`.
pub fn recover_u(q: &VectorField, g: &ScalarField, p: &SolverParams) -> Result<ScalarField> {
    Ok(slack(q, g)?.map(|w| primal_from_slack(w, p.eps, p.c)))
}

/// Indicator of the strict superlevel set `{u > t}`.
pub fn threshold(u: &ScalarField, t: f64) -> ScalarField {
    u.map(|v| if v > t { 1.0 } else { 0.0 })
}

/// Share of cells whose value lies within `tol` of 0 or 1.
pub fn binary_fraction(u: &ScalarField, tol: f64) -> f64 {
    let hits = u
        .values()
        .iter()
        .filter(|&&v| v.abs().min((v - 1.0).abs()) <= tol)
        .count();
    hits as f64 / u.len() as f64
}
