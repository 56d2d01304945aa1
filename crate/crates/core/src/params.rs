use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the PCG preconditioner `(1/alpha)(-Lap) + alpha * chi_box` is inverted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preconditioner {
    /// Banded Cholesky factorization, refreshed when the box masks change.
    #[default]
    Cholesky,
    /// Diagonal of the preconditioning operator.
    Jacobi,
}

/// Every scalar knob of the relaxation, the dual solver and the recovery.
///
/// `gamma` and `div_weight` are used as-is in the smoothed dual objective the
/// Newton solver minimizes (the form whose clamp terms carry a factor `1/2`).
/// `alpha` weighs both the box penalty and, inversely, the `H^1` smoothing of
/// the dual variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverParams {
    /// TV weight.
    pub beta: f64,
    /// Exact-penalty weight for the box `[0, 1]`.
    pub c: f64,
    /// Weight of the quadratic terms favouring `{0, 1}`.
    pub eps: f64,
    /// Dual regularization.
    pub gamma: f64,
    /// Box-penalty / smoothing weight.
    pub alpha: f64,
    /// When set above `alpha`, continue with `alpha` raised tenfold per
    /// stage (warm started) until this value; tightens the soft box.
    pub alpha_max: Option<f64>,
    /// Weight of the projection onto divergence-free fields; 0 disables it.
    pub div_weight: f64,
    /// Level used to threshold the relaxed solution.
    pub threshold_t: f64,
    pub newton_reduction: f64,
    pub newton_stall: f64,
    pub newton_max_iters: usize,
    pub pcg_base_tol: f64,
    pub pcg_max_iters: usize,
    pub preconditioner: Preconditioner,
    /// Backtrack along the Newton direction until the smoothed dual
    /// objective decreases (Armijo). Full steps are taken whenever they
    /// already decrease it, so the local behaviour is unchanged.
    pub line_search: bool,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            beta: 1e-3,
            c: 100.0,
            eps: 1e-7,
            gamma: 0.1,
            alpha: 1e3,
            alpha_max: None,
            div_weight: 0.0,
            threshold_t: 0.5,
            newton_reduction: 1e-8,
            newton_stall: 1e-8,
            newton_max_iters: 100,
            pcg_base_tol: 1e-3,
            pcg_max_iters: 2000,
            preconditioner: Preconditioner::Cholesky,
            line_search: true,
        }
    }
}

impl SolverParams {
    pub fn with_beta(beta: f64) -> Self {
        SolverParams {
            beta,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn check(ok: bool, name: &'static str, reason: &str) -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidParam {
                    name,
                    reason: reason.to_string(),
                })
            }
        }
        let pos = |v: f64| v > 0.0 && v.is_finite();
        let nonneg = |v: f64| v >= 0.0 && v.is_finite();
        check(pos(self.beta), "beta", "must be > 0")?;
        check(pos(self.c), "c", "must be > 0")?;
        check(pos(self.eps), "eps", "must be > 0")?;
        check(pos(self.alpha), "alpha", "must be > 0")?;
        if let Some(a) = self.alpha_max {
            check(pos(a), "alpha_max", "must be > 0")?;
        }
        check(nonneg(self.gamma), "gamma", "must be >= 0")?;
        check(nonneg(self.div_weight), "div_weight", "must be >= 0")?;
        check(
            self.threshold_t > 0.0 && self.threshold_t < 1.0,
            "threshold_t",
            "must lie in (0, 1)",
        )?;
        check(pos(self.newton_reduction), "newton_reduction", "must be > 0")?;
        check(nonneg(self.newton_stall), "newton_stall", "must be >= 0")?;
        check(self.newton_max_iters > 0, "newton_max_iters", "must be >= 1")?;
        check(pos(self.pcg_base_tol), "pcg_base_tol", "must be > 0")?;
        check(self.pcg_max_iters > 0, "pcg_max_iters", "must be >= 1")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let p = SolverParams::default();
        p.validate().unwrap();
        assert_eq!((p.c, p.eps, p.gamma, p.alpha, p.threshold_t), (100.0, 1e-7, 0.1, 1e3, 0.5));
    }

    #[test]
    fn rejects_bad_values() {
        let bad = [
            SolverParams { beta: 0.0, ..Default::default() },
            SolverParams { eps: -1.0, ..Default::default() },
            SolverParams { gamma: -0.1, ..Default::default() },
            SolverParams { threshold_t: 1.0, ..Default::default() },
            SolverParams { alpha: f64::NAN, ..Default::default() },
        ];
        for p in bad {
            assert!(matches!(p.validate(), Err(Error::InvalidParam { .. })), "{p:?}");
        }
    }
}
