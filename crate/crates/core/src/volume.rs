//! Volume-constrained problems `min int g u + beta J(u)` s.t. `int u = V`.
//!
//! The constraint is handled by a scalar multiplier `lambda`: the shifted
//! problem with data `g + lambda` is solved and the volume `W(lambda)` of its
//! thresholded solution is driven to `V`. `W` is nonincreasing, so a bracket
//! found by doubling is refined by bisection. On a finite grid `W` is a step
//! function; when it jumps across `V` the search ends on a plateau and
//! reports the tightest bracket.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ScalarField, VectorField};
use crate::params::SolverParams;
use crate::recovery::{recover_u, threshold};
use crate::ssn::solve;

/// Largest multiplier magnitude tried before giving up.
pub const LAMBDA_MAX: f64 = 1e6;
/// Bisection stops once the bracket is this narrow.
pub const BRACKET_WIDTH: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeResult {
    /// Binary minimizer of the shifted problem.
    pub u: ScalarField,
    pub multiplier: f64,
    pub achieved_volume: f64,
    /// `(lambda_lo, lambda_hi)` with `W(lambda_lo) >= V >= W(lambda_hi)`.
    pub bracket: (f64, f64),
    /// Number of inner solves.
    pub evaluations: usize,
    /// `W` jumps across `V` inside the final bracket, so no multiplier meets
    /// the tolerance; `u` is the bracket end whose volume is closest to `V`.
    pub plateau: bool,
}

/// `sum u h^d`.
pub fn volume_of(u: &ScalarField) -> f64 {
    u.values().iter().sum::<f64>() * u.grid().cell_volume()
}

struct Search<'a> {
    g: &'a ScalarField,
    p: &'a SolverParams,
    warm: Option<VectorField>,
    evaluations: usize,
}

struct Sample {
    lambda: f64,
    u: ScalarField,
    volume: f64,
}

impl Search<'_> {
    fn eval(&mut self, lambda: f64) -> Result<Sample> {
        let shifted = self.g.map(|v| v + lambda);
        let (q, _) = solve(&shifted, self.p, self.warm.as_ref())?;
        let u = threshold(&recover_u(&q, &shifted, self.p)?, self.p.threshold_t);
        self.warm = Some(q);
        self.evaluations += 1;
        let volume = volume_of(&u);
        Ok(Sample { lambda, u, volume })
    }
}

/// Thresholded solution of the problem with data `g + lambda`.
pub fn solve_shifted(g: &ScalarField, p: &SolverParams, lambda: f64) -> Result<ScalarField> {
    let shifted = g.map(|v| v + lambda);
    let (q, _) = solve(&shifted, p, None)?;
    Ok(threshold(&recover_u(&q, &shifted, p)?, p.threshold_t))
}

/// Finds `lambda` with `|W(lambda) - V| <= vol_tol`, or the plateau bracket.
pub fn solve_with_volume(
    g: &ScalarField,
    p: &SolverParams,
    volume: f64,
    vol_tol: f64,
) -> Result<VolumeResult> {
    p.validate()?;
    let total = g.grid().domain_volume();
    if !(volume > 0.0 && volume < total) {
        return Err(Error::InvalidParam {
            name: "volume",
            reason: format!("must lie in (0, {total})"),
        });
    }
    if !(vol_tol >= 0.0) {
        return Err(Error::InvalidParam {
            name: "vol_tol",
            reason: "must be >= 0".into(),
        });
    }
    let mut search = Search {
        g,
        p,
        warm: None,
        evaluations: 0,
    };
    let done = |s: Sample, bracket: (f64, f64), evaluations: usize, plateau: bool| VolumeResult {
        multiplier: s.lambda,
        achieved_volume: s.volume,
        u: s.u,
        bracket,
        evaluations,
        plateau,
    };

    let start = search.eval(0.0)?;
    if (start.volume - volume).abs() <= vol_tol {
        return Ok(done(start, (0.0, 0.0), search.evaluations, false));
    }
    // W is nonincreasing: too much volume calls for a larger lambda
    let dir = if start.volume > volume { 1.0 } else { -1.0 };
    let mut inner = start;
    let mut step: f64 = 1.0;
    let outer = loop {
        let lambda = dir * step;
        if lambda.abs() > LAMBDA_MAX {
            return Err(Error::BracketExceeded(LAMBDA_MAX));
        }
        let s = search.eval(lambda)?;
        if (s.volume - volume).abs() <= vol_tol {
            let bracket = (inner.lambda.min(lambda), inner.lambda.max(lambda));
            return Ok(done(s, bracket, search.evaluations, false));
        }
        if (s.volume > volume) != (dir > 0.0) {
            break s;
        }
        inner = s;
        step *= 2.0;
    };

    // lo: smaller lambda, larger volume
    let (mut lo, mut hi) = if dir > 0.0 {
        (inner, outer)
    } else {
        (outer, inner)
    };
    while hi.lambda - lo.lambda > BRACKET_WIDTH {
        let mid = 0.5 * (lo.lambda + hi.lambda);
        let s = search.eval(mid)?;
        if (s.volume - volume).abs() <= vol_tol {
            return Ok(done(s, (lo.lambda, hi.lambda), search.evaluations, false));
        }
        if s.volume > volume {
            lo = s;
        } else {
            hi = s;
        }
    }
    let bracket = (lo.lambda, hi.lambda);
    let pick = if (lo.volume - volume).abs() < (hi.volume - volume).abs() {
        lo
    } else {
        hi
    };
    Ok(done(pick, bracket, search.evaluations, true))
}
