use serde::{Deserialize, Serialize};

use super::{check_binary, check_nonconstant, is_nonincreasing, l1_distance, phase_mean, OuterOptions};
use crate::energy::tv;
use crate::error::{Error, Result};
use crate::grid::{ScalarField, VectorField};
use crate::params::SolverParams;
use crate::recovery::{recover_u, threshold};
use crate::ssn::{solve, SolveReport};

/// Outcome of the two-phase alternation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationState {
    /// Binary indicator of the phase with mean `c1`.
    pub u: ScalarField,
    pub c1: f64,
    pub c2: f64,
    pub outer_iters: usize,
    /// Two-phase objective of the initial pair and after each outer iteration.
    pub objective: Vec<f64>,
    pub converged: bool,
    /// `objective` never grew.
    pub monotone: bool,
    /// Some phase was empty at an averaging step and kept its old constant.
    pub empty_phase: bool,
    /// Inner solve of each outer iteration.
    pub solves: Vec<SolveReport>,
}

/// `int u (c1 - f)^2 + (1 - u)(c2 - f)^2 + beta J(u)`.
pub fn two_phase_objective(u: &ScalarField, c1: f64, c2: f64, f: &ScalarField, beta: f64) -> f64 {
    let fit: f64 = u
        .values()
        .iter()
        .zip(f.values())
        .map(|(&ux, &fx)| (1.0 - ux) * (c2 - fx).powi(2) + ux * (c1 - fx).powi(2))
        .sum();
    fit * f.grid().cell_volume() + beta * tv(u)
}

/// Chan-Vese segmentation with the default outer stopping rule.
pub fn chan_vese(f: &ScalarField, p: &SolverParams, u0: Option<&ScalarField>) -> Result<SegmentationState> {
    chan_vese_with(f, p, u0, &OuterOptions::CHAN_VESE)
}

/// Alternates the phase means and a binary solve with data
/// `(c1 - f)^2 - (c2 - f)^2`, warm-starting each solve from the last dual.
/// Without `u0` the start is `{f > 1/2}`.
pub fn chan_vese_with(
    f: &ScalarField,
    p: &SolverParams,
    u0: Option<&ScalarField>,
    opts: &OuterOptions,
) -> Result<SegmentationState> {
    p.validate()?;
    opts.validate()?;
    check_nonconstant(f)?;
    let mut u = match u0 {
        Some(u0) => {
            check_binary(u0, f)?;
            u0.clone()
        }
        None => f.map(|v| if v > 0.5 { 1.0 } else { 0.0 }),
    };
    let mut empty_phase = false;
    let mut means = |u: &ScalarField, old: (f64, f64)| {
        let c1 = phase_mean(f, |i| u.values()[i]);
        let c2 = phase_mean(f, |i| 1.0 - u.values()[i]);
        empty_phase |= c1.is_none() || c2.is_none();
        (c1.unwrap_or(old.0), c2.unwrap_or(old.1))
    };
    // an empty starting phase falls back to its level centre
    let (mut c1, mut c2) = means(&u, (0.75, 0.25));
    let mut objective = vec![two_phase_objective(&u, c1, c2, f, p.beta)];
    let mut solves = Vec::new();
    let mut q: Option<VectorField> = None;
    let mut converged = false;
    let limit = opts.tol_fraction * f.grid().domain_volume();

    while solves.len() < opts.max_iters {
        if c1 == c2 {
            return Err(Error::Degenerate(format!("both phase means equal {c1}")));
        }
        let g = f.map(|fx| (c1 - fx).powi(2) - (c2 - fx).powi(2));
        let (q_new, report) = solve(&g, p, q.as_ref())?;
        let u_new = threshold(&recover_u(&q_new, &g, p)?, p.threshold_t);
        let change = l1_distance(&u_new, &u);
        u = u_new;
        q = Some(q_new);
        solves.push(report);
        (c1, c2) = means(&u, (c1, c2));
        objective.push(two_phase_objective(&u, c1, c2, f, p.beta));
        if change <= limit {
            converged = true;
            break;
        }
    }
    let monotone = is_nonincreasing(&objective);
    Ok(SegmentationState {
        u,
        c1,
        c2,
        outer_iters: solves.len(),
        objective,
        converged,
        monotone,
        empty_phase,
        solves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::noise::add_gaussian_noise;
    use crate::synth::disk;

    #[test]
    fn clean_two_level_image_is_a_fixed_point() {
        let f = disk(32, 32, 9.0, 0.2, 0.9);
        let p = SolverParams::with_beta(1e-3);
        let s = chan_vese(&f, &p, None).unwrap();
        let mask = f.map(|v| if v > 0.5 { 1.0 } else { 0.0 });
        assert_eq!(s.u, mask);
        assert_eq!((s.c1, s.c2), (0.9, 0.2));
        assert!(s.converged && s.outer_iters <= 2);
        assert!(s.monotone && !s.empty_phase);
    }

    #[test]
    fn orientation_follows_the_start() {
        let f = disk(16, 16, 5.0, 0.2, 0.9);
        let p = SolverParams::with_beta(1e-3);
        let flipped = f.map(|v| if v > 0.5 { 0.0 } else { 1.0 });
        let s = chan_vese(&f, &p, Some(&flipped)).unwrap();
        assert_eq!(s.u, flipped);
        assert_eq!((s.c1, s.c2), (0.2, 0.9));
    }

    #[test]
    fn constant_image_is_degenerate() {
        let f = ScalarField::constant(GridSpec::plane(8, 8, 0.125).unwrap(), 0.3);
        let p = SolverParams::default();
        assert!(matches!(chan_vese(&f, &p, None), Err(Error::Degenerate(_))));
    }

    #[test]
    fn rejects_bad_starts() {
        let f = disk(8, 8, 2.0, 0.0, 1.0);
        let p = SolverParams::default();
        let soft = f.map(|v| 0.5 * v);
        assert!(matches!(chan_vese(&f, &p, Some(&soft)), Err(Error::InvalidParam { name: "u0", .. })));
        let other = ScalarField::zeros(GridSpec::plane(4, 4, 0.25).unwrap());
        assert_eq!(chan_vese(&f, &p, Some(&other)).unwrap_err(), Error::GridMismatch);
    }

    #[test]
    fn empty_start_phase_is_flagged() {
        // everything below 1/2: the u = 1 phase starts empty
        let f = disk(16, 16, 5.0, 0.0, 0.4);
        let p = SolverParams::with_beta(1e-3);
        let s = chan_vese(&f, &p, None).unwrap();
        assert!(s.empty_phase);
        assert!(s.c1.is_finite() && s.c2.is_finite());
    }

    #[test]
    fn noisy_disk_objective_decreases() {
        let clean = disk(32, 32, 10.0, 0.0, 1.0);
        let (f, _) = add_gaussian_noise(&clean, 0.3, 5).unwrap();
        let p = SolverParams::with_beta(8e-3);
        let s = chan_vese(&f, &p, None).unwrap();
        assert!(s.converged);
        assert!(s.monotone, "{:?}", s.objective);
        assert!(s.c1 > s.c2);
        let agree = s.u.values().iter().zip(clean.values()).filter(|(a, b)| a == b).count();
        assert!(agree as f64 / 1024.0 > 0.97, "{agree}");
    }
}
