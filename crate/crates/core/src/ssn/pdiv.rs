use crate::error::{Error, Result};
use crate::grid::{div_into, dot, grad_into, VectorField};

use super::pcg::{pcg, identity};

const POISSON_TOL: f64 = 1e-13;
const POISSON_ACCEPT: f64 = 1e-9;
const ROUNDOFF: f64 = 1e-13;

/// Orthogonal projection onto discretely divergence-free fields.
///
/// Returns `q - grad phi` where `phi` solves `div grad phi = div q`. The
/// operator `div grad` is the Laplacian with the boundary behaviour induced
/// by the forward-difference gradient, so the result satisfies
/// `div(P q) = 0` up to the Poisson tolerance and `P` is symmetric.
pub fn p_div_apply(q: &VectorField) -> Result<VectorField> {
    let grid = *q.grid();
    let n = grid.len();
    let mut d = vec![0.0; n];
    div_into(&grid, q.as_slice(), &mut d);
    // -div grad is positive semidefinite with the constants as kernel; the
    // right-hand side -div q is orthogonal to them.
    let rhs: Vec<f64> = d.iter().map(|v| -v).collect();
    // a divergence at round-off level of `div q` means q is already in range
    let inv_h = grid.spacing().iter().fold(0.0f64, |m, h| m.max(1.0 / h));
    if dot(&rhs, &rhs).sqrt() <= ROUNDOFF * q.norm() * inv_h {
        return Ok(q.clone());
    }
    let mut gbuf = vec![0.0; grid.vector_len()];
    let apply = |x: &[f64], out: &mut [f64]| {
        grad_into(&grid, x, &mut gbuf);
        div_into(&grid, &gbuf, out);
        for v in out.iter_mut() {
            *v = -*v;
        }
        Ok(())
    };
    let sol = pcg(apply, &rhs, identity, POISSON_TOL, 50 * n + 100)?;
    if sol.relative_residual > POISSON_ACCEPT {
        return Err(Error::PoissonFailed(sol.relative_residual));
    }
    let mut gphi = vec![0.0; grid.vector_len()];
    grad_into(&grid, &sol.x, &mut gphi);
    let out = q
        .as_slice()
        .iter()
        .zip(&gphi)
        .map(|(a, b)| a - b)
        .collect();
    Ok(VectorField::from_raw(grid, out))
}

pub(crate) fn p_div_into(q: &VectorField, out: &mut [f64]) -> Result<()> {
    let pq = p_div_apply(q)?;
    out.copy_from_slice(pq.as_slice());
    Ok(())
}
