//! Objective functionals: discrete TV, the binary/relaxed primal energy, the
//! penalized primal, the dual objectives and the primal-dual gap.
//!
//! Integrals are sums weighted by the cell volume `h^d`. The smoothed dual
//! objective minimized by the Newton solver is the exception: it is a plain
//! sum, so that [`crate::ssn::residual`] is exactly its Euclidean gradient.

use crate::error::Result;
use crate::grid::{dot, grad, same_grid, vector_laplacian_into, ScalarField, VectorField};
use crate::params::SolverParams;
use crate::recovery::slack;
use crate::ssn::p_div_apply;

/// Anisotropic total variation `sum |grad u|_1 h^d`.
pub fn tv(u: &ScalarField) -> f64 {
    let g = grad(u);
    g.as_slice().iter().map(|v| v.abs()).sum::<f64>() * u.grid().cell_volume()
}

/// `int g u + beta J(u)`.
pub fn primal_energy(u: &ScalarField, g: &ScalarField, beta: f64) -> Result<f64> {
    same_grid(u.grid(), g.grid())?;
    let linear = dot(u.values(), g.values()) * u.grid().cell_volume();
    Ok(linear + beta * tv(u))
}

/// Exact box penalty `max(0, 2|u - 1/2| - 1)`.
pub fn box_penalty(u: f64) -> f64 {
    (2.0 * (u - 0.5).abs() - 1.0).max(0.0)
}

/// Primal energy plus the exact box penalty and the two `eps`-quadratics.
pub fn penalized_energy(u: &ScalarField, g: &ScalarField, p: &SolverParams) -> Result<f64> {
    let base = primal_energy(u, g, p.beta)?;
    let extra: f64 = u
        .values()
        .iter()
        .map(|&v| p.c * box_penalty(v) + 0.5 * p.eps * ((v - 1.0).powi(2) + v * v))
        .sum();
    Ok(base + extra * u.grid().cell_volume())
}

/// `min(w+eps+2c,0)^2 + max(w+eps,0)^2 + max(w-eps-2c,0)^2 - max(w-eps,0)^2`.
pub fn clamp_energy(w: f64, eps: f64, c: f64) -> f64 {
    let a = (w + eps + 2.0 * c).min(0.0);
    let b = (w + eps).max(0.0);
    let d = (w - eps - 2.0 * c).max(0.0);
    let e = (w - eps).max(0.0);
    a * a + b * b + d * d - e * e
}

/// Derivative of `clamp_energy / 2`; equals `2 eps u(w)` with `u` the
/// recovered primal value.
pub fn clamp_force(w: f64, eps: f64, c: f64) -> f64 {
    (w + eps + 2.0 * c).min(0.0) + (w + eps).max(0.0) + (w - eps - 2.0 * c).max(0.0)
        - (w - eps).max(0.0)
}

/// Regularized dual objective in its unscaled form:
/// `(gamma/2)|w|^2 + (1/4eps) sum clamp_energy(w) - (eps/2)|Omega|`
/// (plus `(lambda/2)|P_div q|^2` when `div_weight > 0`), with `w = div q - g`.
///
/// With `gamma = 0` and `div_weight = 0` this is the Fenchel dual of the
/// penalized primal. The box `|q|_inf <= beta` is not checked.
pub fn dual_energy(q: &VectorField, g: &ScalarField, p: &SolverParams) -> Result<f64> {
    let w = slack(q, g)?;
    let hd = g.grid().cell_volume();
    let mut sum = 0.0;
    for &wi in w.values() {
        sum += 0.5 * p.gamma * wi * wi + clamp_energy(wi, p.eps, p.c) / (4.0 * p.eps);
    }
    let mut value = sum * hd - 0.5 * p.eps * g.grid().domain_volume();
    if p.div_weight > 0.0 {
        let pq = p_div_apply(q)?;
        value += 0.5 * p.div_weight * pq.norm().powi(2) * hd;
    }
    Ok(value)
}

/// Objective of the smoothed, unconstrained dual solved by the Newton method:
///
/// `(gamma/2)|w|^2 + (1/2) sum clamp_energy(w) + (lambda/2)|P_div q|^2
///  + (1/2alpha)|grad q|^2 + (alpha/2)|max(0, q - beta)|^2 + (alpha/2)|min(0, q + beta)|^2`
///
/// Plain sums; `|grad q|^2` is `-<Lap q, q>` with the Dirichlet Laplacian.
pub fn smoothed_dual_objective(q: &VectorField, g: &ScalarField, p: &SolverParams) -> Result<f64> {
    let w = slack(q, g)?;
    let mut value: f64 = w
        .values()
        .iter()
        .map(|&wi| 0.5 * p.gamma * wi * wi + 0.5 * clamp_energy(wi, p.eps, p.c))
        .sum();
    if p.div_weight > 0.0 {
        let pq = p_div_apply(q)?;
        value += 0.5 * p.div_weight * pq.norm().powi(2);
    }
    let grid = q.grid();
    let mut lap = vec![0.0; grid.vector_len()];
    vector_laplacian_into(grid, q.as_slice(), &mut lap);
    value -= 0.5 / p.alpha * dot(&lap, q.as_slice());
    for &qi in q.as_slice() {
        let over = (qi - p.beta).max(0.0);
        let under = (qi + p.beta).min(0.0);
        value += 0.5 * p.alpha * (over * over + under * under);
    }
    Ok(value)
}

/// `penalized_energy(u) + dual_energy(q)` against the unregularized dual
/// (`gamma = 0`, no divergence-kernel term). Nonnegative up to round-off for
/// `|q|_inf <= beta`; slightly negative values come from the soft box.
pub fn duality_gap(
    u: &ScalarField,
    q: &VectorField,
    g: &ScalarField,
    p: &SolverParams,
) -> Result<f64> {
    let plain = SolverParams {
        gamma: 0.0,
        div_weight: 0.0,
        ..*p
    };
    Ok(penalized_energy(u, g, p)? + dual_energy(q, g, &plain)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use proptest::prelude::*;

    fn line(values: &[f64]) -> ScalarField {
        ScalarField::new(GridSpec::line(values.len(), 1.0).unwrap(), values.to_vec()).unwrap()
    }

    #[test]
    fn tv_single_jump() {
        assert_eq!(tv(&line(&[1.0, 1.0, 0.0, 0.0])), 1.0);
        assert_eq!(tv(&line(&[0.3; 6])), 0.0);
    }

    #[test]
    fn tv_left_half_indicator() {
        let grid = GridSpec::plane(4, 4, 1.0).unwrap();
        let u = ScalarField::from_fn(grid, |i| if i % 4 < 2 { 1.0 } else { 0.0 });
        assert_eq!(tv(&u), 4.0);
    }

    #[test]
    fn tv_is_scale_consistent() {
        // perimeter of an indicator does not depend on resolution in 1D
        let grid = GridSpec::line(8, 0.25).unwrap();
        let u = ScalarField::from_fn(grid, |i| if i < 3 { 1.0 } else { 0.0 });
        assert!((tv(&u) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn primal_energy_zero_field() {
        let g = line(&[0.3, -2.0, 1.0]);
        assert_eq!(primal_energy(&ScalarField::zeros(*g.grid()), &g, 0.7).unwrap(), 0.0);
    }

    #[test]
    fn primal_energy_grid_mismatch() {
        let g = line(&[0.3, -2.0, 1.0]);
        let u = line(&[0.0, 1.0]);
        assert!(primal_energy(&u, &g, 1.0).is_err());
    }

    #[test]
    fn penalized_energy_examples() {
        let grid = GridSpec::plane(3, 2, 1.0).unwrap();
        let zero = ScalarField::zeros(grid);
        let p = SolverParams { eps: 1e-3, ..Default::default() };
        let e = penalized_energy(&zero, &zero, &p).unwrap();
        assert!((e - 0.5 * p.eps * 6.0).abs() < 1e-15);

        let two = ScalarField::constant(grid, 2.0);
        let p = SolverParams { c: 1.0, eps: 1e-12, ..Default::default() };
        let e = penalized_energy(&two, &zero, &p).unwrap();
        assert!((e - 12.0).abs() < 1e-9);
    }

    #[test]
    fn dual_energy_at_zero() {
        let grid = GridSpec::plane(2, 3, 1.0).unwrap();
        let g = ScalarField::zeros(grid);
        let q = VectorField::zeros(grid);
        let p = SolverParams { gamma: 0.0, eps: 1e-2, ..Default::default() };
        let e = dual_energy(&q, &g, &p).unwrap();
        assert!((e + 0.25 * p.eps * 6.0).abs() < 1e-15);
    }

    #[test]
    fn dual_energy_mid_plateau() {
        let p = SolverParams { gamma: 0.3, eps: 1e-2, c: 5.0, ..Default::default() };
        let g = line(&[p.eps + p.c; 4]);
        let q = VectorField::zeros(*g.grid());
        let e = dual_energy(&q, &g, &p).unwrap();
        let expected = 0.5 * p.gamma * (p.eps + p.c).powi(2) * 4.0 - 0.5 * p.eps * 4.0;
        assert!((e - expected).abs() < 1e-12 * expected.abs());
    }

    #[test]
    fn dual_energy_is_coercive() {
        let p = SolverParams { gamma: 0.0, ..Default::default() };
        let g = line(&[0.0; 3]);
        let mut last = f64::NEG_INFINITY;
        for s in [1e2, 1e3, 1e4] {
            let q = VectorField::new(*g.grid(), vec![s, 0.0, 0.0]).unwrap();
            let e = dual_energy(&q, &g, &p).unwrap();
            assert!(e > last);
            last = e;
        }
        assert!(last > 1e6);
    }

    #[test]
    fn trivial_gap() {
        let grid = GridSpec::plane(4, 4, 1.0).unwrap();
        let g = ScalarField::zeros(grid);
        let p = SolverParams { eps: 1e-2, ..Default::default() };
        let gap = duality_gap(&g, &VectorField::zeros(grid), &g, &p).unwrap();
        assert!((gap - 0.25 * p.eps * 16.0).abs() < 1e-14);
    }

    #[test]
    fn clamp_force_is_two_eps_u() {
        let (eps, c) = (0.01, 1.5);
        for k in -400..=400 {
            let w = k as f64 * 0.01;
            let u = crate::recovery::primal_from_slack(w, eps, c);
            assert!((clamp_force(w, eps, c) - 2.0 * eps * u).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn binary_penalized_identity(bits in prop::collection::vec(any::<bool>(), 4..30),
                                     gs in prop::collection::vec(-2.0f64..2.0, 30),
                                     eps in 1e-8f64..1.0) {
            let n = bits.len();
            let u = line(&bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect::<Vec<_>>());
            let g = line(&gs[..n]);
            let p = SolverParams { eps, ..Default::default() };
            let diff = penalized_energy(&u, &g, &p).unwrap() - primal_energy(&u, &g, p.beta).unwrap();
            prop_assert!((diff - 0.5 * eps * n as f64).abs() < 1e-12 * (1.0 + diff.abs()) + 1e-12);
        }

        #[test]
        fn discrete_coarea(vals in prop::collection::vec(0.0f64..1.0, 12)) {
            // 3x4 grid, thresholds at the midpoints of 1000 uniform bins
            let grid = GridSpec::plane(3, 4, 1.0).unwrap();
            let u = ScalarField::new(grid, vals).unwrap();
            let k = 1000;
            let mut total = 0.0;
            for j in 0..k {
                let t = (j as f64 + 0.5) / k as f64;
                total += tv(&crate::recovery::threshold(&u, t)) / k as f64;
            }
            // midpoint rule: each of the 17 edges is off by at most one bin width
            prop_assert!((total - tv(&u)).abs() <= 1e-3 * 17.0);
        }

        #[test]
        fn dual_energy_midpoint_convex(a in prop::collection::vec(-1.0f64..1.0, 10),
                                       b in prop::collection::vec(-1.0f64..1.0, 10),
                                       gs in prop::collection::vec(-1.0f64..1.0, 5)) {
            let grid = GridSpec::line(5, 1.0).unwrap();
            let g = ScalarField::new(grid, gs).unwrap();
            let p = SolverParams { eps: 0.05, c: 0.3, gamma: 0.1, ..Default::default() };
            let qa = VectorField::new(grid, a[..5].to_vec()).unwrap();
            let qb = VectorField::new(grid, b[..5].to_vec()).unwrap();
            let mid = VectorField::new(grid, qa.as_slice().iter().zip(qb.as_slice()).map(|(x, y)| 0.5 * (x + y)).collect()).unwrap();
            let ea = dual_energy(&qa, &g, &p).unwrap();
            let eb = dual_energy(&qb, &g, &p).unwrap();
            let em = dual_energy(&mid, &g, &p).unwrap();
            prop_assert!(em <= 0.5 * (ea + eb) + 1e-12);
        }
    }
}
