//! Inexact semismooth Newton method for the smoothed, box-penalized dual.
//!
//! The unknown is the dual field `q`. With `w = div q - g` the optimality
//! residual is
//!
//! ```text
//! Q(q) = -grad[gamma w + min(w+eps+2c,0) + max(w+eps,0) + max(w-eps-2c,0) - max(w-eps,0)]
//!        + lambda P_div q - (1/alpha) Lap q + alpha max(0, q-beta) + alpha min(0, q+beta)
//! ```
//!
//! and each Newton step solves `A dq = -Q(q)` with the generalized Jacobian
//! `A` built from the active sets, using PCG with a tolerance that tightens
//! as the residual drops. Steps are damped by an Armijo backtracking search
//! on the smoothed dual objective unless `line_search` is off.

mod pcg;
mod pdiv;
mod precond;

use serde::{Deserialize, Serialize};

pub use self::pcg::{identity, pcg, PcgOutcome};
pub use self::pdiv::p_div_apply;
pub use self::precond::{BandedCholesky, BoxPreconditioner};

use crate::clock::Stopwatch;
use crate::energy::{clamp_force, duality_gap, smoothed_dual_objective};
use crate::error::Result;
use crate::grid::{div_into, dot, grad_into, same_grid, vector_laplacian_into, GridSpec};
use crate::grid::{ScalarField, VectorField};
use crate::params::SolverParams;
use crate::recovery::{binary_fraction, recover_u};

/// Cell-wise and entry-wise masks of the generalized derivative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActiveSets {
    /// `w < -eps - 2c`
    pub a1: Vec<bool>,
    /// `w > -eps`
    pub a2: Vec<bool>,
    /// `w > eps + 2c`
    pub a3: Vec<bool>,
    /// `w > eps`
    pub a4: Vec<bool>,
    /// `q > beta`, one entry per component and cell
    pub a5: Vec<bool>,
    /// `q < -beta`
    pub a6: Vec<bool>,
}

impl ActiveSets {
    /// `gamma + chi_1 + chi_2 + chi_3 - chi_4`, cell by cell. Never below `gamma`.
    pub fn diffusion(&self, gamma: f64) -> Vec<f64> {
        (0..self.a1.len())
            .map(|i| {
                gamma
                    + f64::from(u8::from(self.a1[i]))
                    + f64::from(u8::from(self.a2[i]))
                    + f64::from(u8::from(self.a3[i]))
                    - f64::from(u8::from(self.a4[i]))
            })
            .collect()
    }

    /// Entries of `q` outside the box.
    pub fn box_mask(&self) -> Vec<bool> {
        self.a5.iter().zip(&self.a6).map(|(a, b)| *a || *b).collect()
    }
}

/// Why the Newton loop stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Residual reduced by `newton_reduction` relative to the start.
    Reduction,
    /// Two successive residuals differ by less than `newton_stall`.
    Stall,
    MaxIters,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    /// `|Q(q_k)|_2` for `k = 0..=newton_iters`. Under `alpha` continuation
    /// each value is measured with the `alpha` of the stage that produced
    /// the iterate.
    pub residual_history: Vec<f64>,
    pub newton_iters: usize,
    /// PCG iterations of each Newton step.
    pub pcg_iters: Vec<usize>,
    pub converged: bool,
    pub stop_reason: StopReason,
    /// One entry per `alpha` value; a single stage without continuation.
    pub stages: Vec<AlphaStage>,
    /// Primal-dual gap of the recovered pair against the unregularized dual.
    pub final_gap: f64,
    /// Share of recovered cells within `1e-6` of `{0, 1}` before thresholding.
    pub binary_fraction: f64,
    pub wall_time_s: f64,
}

/// Summary of the Newton iteration for one value of `alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaStage {
    pub alpha: f64,
    /// Residual of the warm start under this stage's `alpha`.
    pub initial_residual: f64,
    pub newton_iters: usize,
}

impl SolveReport {
    /// Last residual relative to the initial residual of the final stage.
    pub fn relative_residual(&self) -> f64 {
        let first = self.stages.last().map_or(self.residual_history[0], |s| s.initial_residual);
        let last = *self.residual_history.last().unwrap();
        if first == 0.0 {
            0.0
        } else {
            last / first
        }
    }
}

/// Tolerance of the inner solve at Newton step `k + 1`.
pub fn pcg_tolerance(base: f64, res_k: f64, res_0: f64) -> f64 {
    let ratio = res_k / res_0;
    base * ratio.powf(1.5).min(ratio)
}

fn check_inputs(q: &VectorField, g: &ScalarField) -> Result<()> {
    same_grid(q.grid(), g.grid())
}

fn slack_into(grid: &GridSpec, q: &[f64], g: &[f64], w: &mut [f64]) {
    div_into(grid, q, w);
    for (wi, gi) in w.iter_mut().zip(g) {
        *wi -= gi;
    }
}

fn uniform_bounds(grid: &GridSpec, beta: f64) -> Vec<f64> {
    vec![beta; grid.ndim()]
}

fn residual_into(
    grid: &GridSpec,
    q: &VectorField,
    g: &[f64],
    p: &SolverParams,
    bounds: &[f64],
    w: &mut [f64],
    out: &mut [f64],
) -> Result<()> {
    slack_into(grid, q.as_slice(), g, w);
    for wi in w.iter_mut() {
        *wi = p.gamma * *wi + clamp_force(*wi, p.eps, p.c);
    }
    grad_into(grid, w, out);
    let mut lap = vec![0.0; grid.vector_len()];
    vector_laplacian_into(grid, q.as_slice(), &mut lap);
    let inv_alpha = 1.0 / p.alpha;
    let n = grid.len();
    for (a, &bound) in bounds.iter().enumerate() {
        let range = a * n..(a + 1) * n;
        for ((o, &l), &qi) in out[range.clone()]
            .iter_mut()
            .zip(&lap[range.clone()])
            .zip(&q.as_slice()[range])
        {
            *o = -*o - inv_alpha * l
                + p.alpha * (qi - bound).max(0.0)
                + p.alpha * (qi + bound).min(0.0);
        }
    }
    if p.div_weight > 0.0 {
        let mut pq = vec![0.0; grid.vector_len()];
        pdiv::p_div_into(q, &mut pq)?;
        for (o, v) in out.iter_mut().zip(&pq) {
            *o += p.div_weight * v;
        }
    }
    Ok(())
}

/// Optimality residual `Q(q)`; the gradient of
/// [`crate::energy::smoothed_dual_objective`].
pub fn residual(q: &VectorField, g: &ScalarField, p: &SolverParams) -> Result<VectorField> {
    check_inputs(q, g)?;
    let grid = *g.grid();
    let mut w = vec![0.0; grid.len()];
    let mut out = vec![0.0; grid.vector_len()];
    let bounds = uniform_bounds(&grid, p.beta);
    residual_into(&grid, q, g.values(), p, &bounds, &mut w, &mut out)?;
    Ok(VectorField::from_raw(grid, out))
}

/// Active sets at `q`. Strict inequalities throughout.
pub fn active_sets(q: &VectorField, g: &ScalarField, p: &SolverParams) -> Result<ActiveSets> {
    check_inputs(q, g)?;
    let grid = *g.grid();
    let mut w = vec![0.0; grid.len()];
    slack_into(&grid, q.as_slice(), g.values(), &mut w);
    Ok(sets_from_slack(&w, q.as_slice(), p, &uniform_bounds(&grid, p.beta)))
}

fn sets_from_slack(w: &[f64], q: &[f64], p: &SolverParams, bounds: &[f64]) -> ActiveSets {
    let (eps, c) = (p.eps, p.c);
    let n = w.len();
    let bound = |i: usize| bounds[i / n];
    ActiveSets {
        a1: w.iter().map(|&v| v < -eps - 2.0 * c).collect(),
        a2: w.iter().map(|&v| v > -eps).collect(),
        a3: w.iter().map(|&v| v > eps + 2.0 * c).collect(),
        a4: w.iter().map(|&v| v > eps).collect(),
        a5: q.iter().enumerate().map(|(i, &v)| v > bound(i)).collect(),
        a6: q.iter().enumerate().map(|(i, &v)| v < -bound(i)).collect(),
    }
}

/// Matrix-free generalized Jacobian with reusable scratch space.
struct NewtonOperator<'a> {
    grid: GridSpec,
    diffusion: Vec<f64>,
    box_mask: Vec<bool>,
    params: &'a SolverParams,
    cell: Vec<f64>,
    lap: Vec<f64>,
    proj: Vec<f64>,
}

impl<'a> NewtonOperator<'a> {
    fn new(grid: GridSpec, sets: &ActiveSets, params: &'a SolverParams) -> Self {
        NewtonOperator {
            grid,
            diffusion: sets.diffusion(params.gamma),
            box_mask: sets.box_mask(),
            params,
            cell: vec![0.0; grid.len()],
            lap: vec![0.0; grid.vector_len()],
            proj: if params.div_weight > 0.0 {
                vec![0.0; grid.vector_len()]
            } else {
                Vec::new()
            },
        }
    }

    fn apply(&mut self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let p = self.params;
        div_into(&self.grid, x, &mut self.cell);
        for (c, k) in self.cell.iter_mut().zip(&self.diffusion) {
            *c *= k;
        }
        grad_into(&self.grid, &self.cell, out);
        vector_laplacian_into(&self.grid, x, &mut self.lap);
        let inv_alpha = 1.0 / p.alpha;
        for i in 0..out.len() {
            let boxed = if self.box_mask[i] { p.alpha * x[i] } else { 0.0 };
            out[i] = -out[i] - inv_alpha * self.lap[i] + boxed;
        }
        if p.div_weight > 0.0 {
            let xf = VectorField::from_raw(self.grid, x.to_vec());
            pdiv::p_div_into(&xf, &mut self.proj)?;
            for (o, v) in out.iter_mut().zip(&self.proj) {
                *o += p.div_weight * v;
            }
        }
        Ok(())
    }
}

/// Applies the generalized Jacobian defined by `sets` to `dq`.
pub fn newton_apply(sets: &ActiveSets, dq: &VectorField, p: &SolverParams) -> Result<VectorField> {
    let grid = *dq.grid();
    let mut op = NewtonOperator::new(grid, sets, p);
    let mut out = vec![0.0; grid.vector_len()];
    op.apply(dq.as_slice(), &mut out)?;
    Ok(VectorField::from_raw(grid, out))
}

const ARMIJO_SLOPE: f64 = 1e-4;
const MAX_HALVINGS: usize = 40;

/// Largest `t = 2^-k` with `Phi(q + t d) <= Phi(q) + 1e-4 t <Q(q), d>`.
///
/// `d` comes from CG on an SPD system started at zero, so it is a descent
/// direction. Near the solution the decrease drops below the round-off of
/// `Phi`; a relative slack of a few ulps keeps full steps acceptable there.
fn armijo_step(
    q: &VectorField,
    d: &[f64],
    res: &[f64],
    g: &ScalarField,
    p: &SolverParams,
) -> Result<f64> {
    let phi0 = smoothed_dual_objective(q, g, p)?;
    let slope = dot(res, d);
    let slack = 1e-14 * phi0.abs().max(1.0);
    let mut t = 1.0;
    for _ in 0..MAX_HALVINGS {
        let trial: Vec<f64> = q.as_slice().iter().zip(d).map(|(a, b)| a + t * b).collect();
        let phi = smoothed_dual_objective(&VectorField::from_raw(*q.grid(), trial), g, p)?;
        if phi <= phi0 + ARMIJO_SLOPE * t * slope + slack {
            return Ok(t);
        }
        t *= 0.5;
    }
    Ok(t)
}

struct Stage {
    history: Vec<f64>,
    pcg_iters: Vec<usize>,
    reason: StopReason,
}

/// Newton iteration for one value of `alpha`, starting from `q`.
fn newton(g: &ScalarField, p: &SolverParams, mut q: VectorField) -> Result<(VectorField, Stage)> {
    let grid = *g.grid();
    let bounds = uniform_bounds(&grid, p.beta);
    let gv = g.values();

    let mut w = vec![0.0; grid.len()];
    let mut res = vec![0.0; grid.vector_len()];
    residual_into(&grid, &q, gv, p, &bounds, &mut w, &mut res)?;
    let res0 = dot(&res, &res).sqrt();
    let mut stage = Stage {
        history: vec![res0],
        pcg_iters: Vec::new(),
        reason: StopReason::MaxIters,
    };
    if res0 == 0.0 {
        stage.reason = StopReason::Reduction;
        return Ok((q, stage));
    }

    let mut pre = BoxPreconditioner::new(p.preconditioner, grid, p.alpha);
    let mut rhs = vec![0.0; grid.vector_len()];
    for _ in 0..p.newton_max_iters {
        let res_k = *stage.history.last().unwrap();
        let tol = pcg_tolerance(p.pcg_base_tol, res_k, res0);

        slack_into(&grid, q.as_slice(), gv, &mut w);
        let sets = sets_from_slack(&w, q.as_slice(), p, &bounds);
        pre.update(&sets.box_mask())?;
        let mut op = NewtonOperator::new(grid, &sets, p);
        for (r, v) in rhs.iter_mut().zip(&res) {
            *r = -v;
        }
        let step = pcg(
            |x, out| op.apply(x, out),
            &rhs,
            |r, z| pre.apply(r, z),
            tol,
            p.pcg_max_iters,
        )?;
        stage.pcg_iters.push(step.iters);

        let t = if p.line_search {
            armijo_step(&q, &step.x, &res, g, p)?
        } else {
            1.0
        };
        let mut next = q.into_vec();
        for (qi, di) in next.iter_mut().zip(&step.x) {
            *qi += t * di;
        }
        q = VectorField::from_raw(grid, next);
        residual_into(&grid, &q, gv, p, &bounds, &mut w, &mut res)?;
        let res_next = dot(&res, &res).sqrt();
        stage.history.push(res_next);

        if res_next <= p.newton_reduction * res0 {
            stage.reason = StopReason::Reduction;
            break;
        }
        if (res_next - res_k).abs() < p.newton_stall {
            stage.reason = StopReason::Stall;
            break;
        }
    }
    Ok((q, stage))
}

/// Runs the semismooth Newton iteration from `q0` (zero when `None`).
///
/// With `alpha_max` set above `alpha`, the converged field is used to warm
/// start further solves with `alpha` multiplied by 10 each time until
/// `alpha_max` is reached; residuals and PCG counts of all stages are
/// concatenated in the report. Non-convergence within
/// `newton_max_iters` is not an error: the report carries
/// `converged = false` and `StopReason::MaxIters`.
pub fn solve(
    g: &ScalarField,
    p: &SolverParams,
    q0: Option<&VectorField>,
) -> Result<(VectorField, SolveReport)> {
    p.validate()?;
    let clock = Stopwatch::start();
    let mut q = match q0 {
        Some(q0) => {
            check_inputs(q0, g)?;
            q0.clone()
        }
        None => VectorField::zeros(*g.grid()),
    };

    let mut stage_params = *p;
    let mut history = Vec::new();
    let mut pcg_iters = Vec::new();
    let mut newton_iters = 0;
    let mut stages = Vec::new();
    let reason = loop {
        let (next, stage) = newton(g, &stage_params, q)?;
        q = next;
        let iters = stage.history.len() - 1;
        newton_iters += iters;
        stages.push(AlphaStage {
            alpha: stage_params.alpha,
            initial_residual: stage.history[0],
            newton_iters: iters,
        });
        let skip = usize::from(!history.is_empty());
        history.extend(&stage.history[skip..]);
        pcg_iters.extend(stage.pcg_iters);
        let target = p.alpha_max.unwrap_or(p.alpha);
        if stage.reason == StopReason::MaxIters || stage_params.alpha >= target {
            break stage.reason;
        }
        stage_params.alpha = (stage_params.alpha * 10.0).min(target);
    };

    let u = recover_u(&q, g, p)?;
    let report = SolveReport {
        residual_history: history,
        newton_iters,
        pcg_iters,
        converged: reason != StopReason::MaxIters,
        stop_reason: reason,
        stages,
        final_gap: duality_gap(&u, &q, g, p)?,
        binary_fraction: binary_fraction(&u, 1e-6),
        wall_time_s: clock.elapsed_s(),
    };
    Ok((q, report))
}
