use crate::error::{Error, Result};
use crate::grid::dot;

/// Result of a preconditioned CG run.
#[derive(Debug, Clone, PartialEq)]
pub struct PcgOutcome {
    pub x: Vec<f64>,
    pub iters: usize,
    /// `|rhs - A x| / |rhs|` as tracked by the recurrence.
    pub relative_residual: f64,
    pub converged: bool,
}

/// Preconditioned conjugate gradients from a zero initial guess.
///
/// `apply` and `precond` write `A x` and `M^{-1} r` into their second
/// argument. Stops once `|r| <= tol |rhs|` or after `max_iters` iterations.
/// A non-positive curvature `p^T A p` (or `r^T M^{-1} r`) is reported as
/// [`Error::PcgBreakdown`].
pub fn pcg<A, M>(
    mut apply: A,
    rhs: &[f64],
    mut precond: M,
    tol: f64,
    max_iters: usize,
) -> Result<PcgOutcome>
where
    A: FnMut(&[f64], &mut [f64]) -> Result<()>,
    M: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    let n = rhs.len();
    let mut x = vec![0.0; n];
    let rhs_norm = dot(rhs, rhs).sqrt();
    if rhs_norm == 0.0 {
        return Ok(PcgOutcome {
            x,
            iters: 0,
            relative_residual: 0.0,
            converged: true,
        });
    }

    let mut r = rhs.to_vec();
    let mut z = vec![0.0; n];
    precond(&r, &mut z)?;
    let mut rz = dot(&r, &z);
    if !(rz > 0.0) {
        return Err(Error::PcgBreakdown {
            iteration: 0,
            curvature: rz,
        });
    }
    let mut dir = z.clone();
    let mut ad = vec![0.0; n];
    let mut rel = 1.0;

    for iter in 1..=max_iters {
        apply(&dir, &mut ad)?;
        let curvature = dot(&dir, &ad);
        if !(curvature > 0.0) || !curvature.is_finite() {
            return Err(Error::PcgBreakdown {
                iteration: iter,
                curvature,
            });
        }
        let step = rz / curvature;
        for i in 0..n {
            x[i] += step * dir[i];
            r[i] -= step * ad[i];
        }
        rel = dot(&r, &r).sqrt() / rhs_norm;
        if rel <= tol {
            return Ok(PcgOutcome {
                x,
                iters: iter,
                relative_residual: rel,
                converged: true,
            });
        }
        precond(&r, &mut z)?;
        let rz_next = dot(&r, &z);
        if !(rz_next > 0.0) {
            return Err(Error::PcgBreakdown {
                iteration: iter,
                curvature: rz_next,
            });
        }
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            dir[i] = z[i] + beta * dir[i];
        }
    }

    Ok(PcgOutcome {
        x,
        iters: max_iters,
        relative_residual: rel,
        converged: false,
    })
}

/// `M^{-1} = I`.
pub fn identity(r: &[f64], z: &mut [f64]) -> Result<()> {
    z.copy_from_slice(r);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_apply(a: &[Vec<f64>]) -> impl FnMut(&[f64], &mut [f64]) -> Result<()> + '_ {
        move |x, out| {
            for (row, o) in a.iter().zip(out.iter_mut()) {
                *o = dot(row, x);
            }
            Ok(())
        }
    }

    #[test]
    fn identity_converges_in_one_step() {
        let rhs = [1.0, -2.0, 3.5, 0.25];
        let out = pcg(identity, &rhs, identity, 1e-14, 10).unwrap();
        assert_eq!(out.iters, 1);
        assert_eq!(out.x, rhs.to_vec());
    }

    #[test]
    fn exact_preconditioner_converges_in_one_step() {
        let diag = [2.0, 5.0, 0.5, 7.0];
        let rhs = [1.0, 1.0, -1.0, 3.0];
        let apply = |x: &[f64], out: &mut [f64]| {
            for i in 0..4 {
                out[i] = diag[i] * x[i];
            }
            Ok(())
        };
        let precond = |r: &[f64], z: &mut [f64]| {
            for i in 0..4 {
                z[i] = r[i] / diag[i];
            }
            Ok(())
        };
        let out = pcg(apply, &rhs, precond, 1e-14, 10).unwrap();
        assert_eq!(out.iters, 1);
        for i in 0..4 {
            assert!((out.x[i] - rhs[i] / diag[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_rhs() {
        let out = pcg(identity, &[0.0; 3], identity, 1e-10, 5).unwrap();
        assert_eq!(out.iters, 0);
        assert_eq!(out.x, vec![0.0; 3]);
    }

    #[test]
    fn indefinite_operator_breaks_down() {
        let a = vec![vec![1.0, 0.0], vec![0.0, -1.0]];
        let err = pcg(dense_apply(&a), &[0.0, 1.0], identity, 1e-12, 10).unwrap_err();
        assert!(matches!(err, Error::PcgBreakdown { .. }));
    }

    #[test]
    fn iteration_cap_is_reported() {
        let a: Vec<Vec<f64>> = (0..6)
            .map(|i| (0..6).map(|j| if i == j { (i + 1) as f64 } else { 0.0 }).collect())
            .collect();
        let out = pcg(dense_apply(&a), &[1.0; 6], identity, 1e-14, 2).unwrap();
        assert!(!out.converged);
        assert_eq!(out.iters, 2);
    }
}
