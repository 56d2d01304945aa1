use serde::{Deserialize, Serialize};

use super::{check_binary, check_nonconstant, is_nonincreasing, l1_distance, phase_mean, OuterOptions};
use crate::energy::tv;
use crate::error::{Error, Result};
use crate::grid::{ScalarField, VectorField};
use crate::params::SolverParams;
use crate::recovery::{recover_u, threshold};
use crate::ssn::{solve, SolveReport};

/// Largest number of indicator fields accepted by [`multilabel`].
pub const MAX_LABEL_BITS: usize = 8;

/// `M` binary indicators encoding up to `2^M` phases. Phase `b` is the set
/// where indicator `i` equals bit `i` of `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelState {
    pub m: usize,
    pub indicators: Vec<ScalarField>,
    /// Mean of `f` on phase `b`, indexed by `b`.
    pub constants: Vec<f64>,
    /// `sum_b c_b Z_b`.
    pub piecewise_image: ScalarField,
    pub sweeps: usize,
    /// Objective of the initial state and after each sweep.
    pub objective: Vec<f64>,
    pub converged: bool,
    pub monotone: bool,
    /// Phases that were empty at some averaging step and kept their constant.
    pub empty_phases: Vec<bool>,
    /// Inner solves in execution order, `m` per sweep.
    pub solves: Vec<SolveReport>,
}

/// Product of `u_j` (bit set) or `1 - u_j` (bit clear) over `j != skip`.
fn phase_weight(indicators: &[ScalarField], b: usize, x: usize, skip: Option<usize>) -> f64 {
    let mut w = 1.0;
    for (j, u) in indicators.iter().enumerate() {
        if Some(j) == skip {
            continue;
        }
        let v = u.values()[x];
        w *= if (b >> j) & 1 == 1 { v } else { 1.0 - v };
    }
    w
}

impl LabelState {
    fn new(m: usize, indicators: Vec<ScalarField>, constants: Vec<f64>) -> Self {
        let mut s = LabelState {
            m,
            piecewise_image: ScalarField::zeros(*indicators[0].grid()),
            indicators,
            constants,
            sweeps: 0,
            objective: Vec::new(),
            converged: false,
            monotone: true,
            empty_phases: vec![false; 1 << m],
            solves: Vec::new(),
        };
        s.assemble();
        s
    }

    fn assemble(&mut self) {
        self.piecewise_image = ScalarField::from_fn(*self.piecewise_image.grid(), |x| {
            (0..self.constants.len())
                .map(|b| self.constants[b] * phase_weight(&self.indicators, b, x, None))
                .sum()
        });
    }

    fn update_constants(&mut self, f: &ScalarField) {
        for b in 0..self.constants.len() {
            match phase_mean(f, |x| phase_weight(&self.indicators, b, x, None)) {
                Some(c) => self.constants[b] = c,
                None => self.empty_phases[b] = true,
            }
        }
    }
}

/// `sum_b int Z_b (c_b - f)^2 + beta sum_i J(u_i)`.
pub fn label_objective(state: &LabelState, f: &ScalarField, beta: f64) -> f64 {
    let fit: f64 = f
        .values()
        .iter()
        .enumerate()
        .map(|(x, &fx)| {
            let mut s = 0.0;
            for (b, c) in state.constants.iter().enumerate() {
                s += phase_weight(&state.indicators, b, x, None) * (c - fx).powi(2);
            }
            s
        })
        .sum();
    fit * f.grid().cell_volume() + beta * state.indicators.iter().map(tv).sum::<f64>()
}

/// Data of the binary subproblem for indicator `i` (0-based) with the other
/// indicators fixed.
pub fn label_gradient(state: &LabelState, f: &ScalarField, i: usize) -> Result<ScalarField> {
    if i >= state.m {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: state.m,
        });
    }
    if f.grid() != state.indicators[0].grid() {
        return Err(Error::GridMismatch);
    }
    Ok(ScalarField::from_fn(*f.grid(), |x| {
        let fx = f.values()[x];
        let (mut pos, mut neg) = (0.0, 0.0);
        for (b, c) in state.constants.iter().enumerate() {
            let term = phase_weight(&state.indicators, b, x, Some(i)) * (c - fx).powi(2);
            if (b >> i) & 1 == 1 {
                pos += term;
            } else {
                neg += term;
            }
        }
        pos - neg
    }))
}

/// Multiphase segmentation with the default outer stopping rule.
pub fn multilabel(f: &ScalarField, p: &SolverParams, m: usize, u0: Option<&[ScalarField]>) -> Result<LabelState> {
    multilabel_with(f, p, m, u0, &OuterOptions::MULTILABEL)
}

/// Gauss-Seidel sweeps over the indicators, each a warm-started binary
/// solve; the phase means are refreshed after every sweep. Without `u0`
/// the start quantizes `f` into `2^m` equal levels on `[0, 1]`. If the
/// sweep cap is hit, the state with the lowest objective is returned.
pub fn multilabel_with(
    f: &ScalarField,
    p: &SolverParams,
    m: usize,
    u0: Option<&[ScalarField]>,
    opts: &OuterOptions,
) -> Result<LabelState> {
    p.validate()?;
    opts.validate()?;
    if !(1..=MAX_LABEL_BITS).contains(&m) {
        return Err(Error::InvalidParam {
            name: "m",
            reason: format!("must lie in 1..={MAX_LABEL_BITS}"),
        });
    }
    check_nonconstant(f)?;
    let phases = 1usize << m;
    let indicators = match u0 {
        Some(u0) => {
            if u0.len() != m {
                return Err(Error::LengthMismatch {
                    expected: m,
                    actual: u0.len(),
                });
            }
            for u in u0 {
                check_binary(u, f)?;
            }
            u0.to_vec()
        }
        None => {
            let level = |v: f64| (1..phases).filter(|&j| v > j as f64 / phases as f64).count();
            (0..m)
                .map(|i| f.map(|v| ((level(v) >> i) & 1) as f64))
                .collect()
        }
    };
    // empty starting phases fall back to their level centres
    let centres = (0..phases).map(|b| (b as f64 + 0.5) / phases as f64).collect();
    let mut state = LabelState::new(m, indicators, centres);
    state.update_constants(f);
    state.assemble();
    state.objective.push(label_objective(&state, f, p.beta));

    let mut best = state.clone();
    let mut duals: Vec<Option<VectorField>> = vec![None; m];
    let limit = opts.tol_fraction * f.grid().domain_volume();
    while state.sweeps < opts.max_iters {
        let mut change = 0.0;
        for i in 0..m {
            let g = label_gradient(&state, f, i)?;
            let (q, report) = solve(&g, p, duals[i].as_ref())?;
            let u = threshold(&recover_u(&q, &g, p)?, p.threshold_t);
            change += l1_distance(&u, &state.indicators[i]);
            state.indicators[i] = u;
            duals[i] = Some(q);
            state.solves.push(report);
        }
        state.sweeps += 1;
        state.update_constants(f);
        state.assemble();
        let e = label_objective(&state, f, p.beta);
        state.objective.push(e);
        if change <= limit {
            state.converged = true;
            break;
        }
        if e < *best.objective.last().unwrap() {
            best.indicators.clone_from(&state.indicators);
            best.constants.clone_from(&state.constants);
            best.piecewise_image = state.piecewise_image.clone();
            best.objective.push(e);
        }
    }
    state.monotone = is_nonincreasing(&state.objective);
    if !state.converged {
        // keep the run's history and flags, but the lowest-energy fields
        state.indicators = best.indicators;
        state.constants = best.constants;
        state.piecewise_image = best.piecewise_image;
    }
    Ok(state)
}
