//! Thresholded relaxed solutions against exhaustive enumeration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tvrelax::apps::denoise_binary;
use tvrelax::energy::primal_energy;
use tvrelax::noise::add_gaussian_noise;
use tvrelax::oracle::brute_force_min;
use tvrelax::recovery::{recover_u, threshold};
use tvrelax::synth::disk;
use tvrelax::{solve, GridSpec, ScalarField, SolverParams};

fn small_grids() -> [GridSpec; 3] {
    [
        GridSpec::line(12, 1.0 / 12.0).unwrap(),
        GridSpec::plane(4, 4, 0.25).unwrap(),
        GridSpec::plane(3, 5, 0.2).unwrap(),
    ]
}

fn misses(alpha_max: Option<f64>, seed: u64, count: usize) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for k in 0..count {
        let grid = small_grids()[k % 3];
        let f = ScalarField::from_fn(grid, |_| rng.random_range(0.0..1.0));
        let beta = [1e-3, 1e-2, 5e-2, 0.1][k % 4];
        let p = SolverParams {
            alpha_max,
            ..SolverParams::with_beta(beta)
        };
        let g = f.map(|v| 0.5 - v);
        let u = denoise_binary(&f, &p).unwrap();
        assert!(u.values().iter().all(|&v| v == 0.0 || v == 1.0));
        let (_, e_min) = brute_force_min(&g, beta).unwrap();
        let e = primal_energy(&u, &g, beta).unwrap();
        if (e - e_min).abs() > 1e-6 {
            out.push(format!("#{k}: {e} vs {e_min}"));
        }
    }
    out
}

#[test]
fn continuation_reaches_the_binary_minimum() {
    let m = misses(Some(1e7), 23, 120);
    assert!(m.is_empty(), "{m:?}");
}

#[test]
fn default_alpha_is_exact_on_most_instances() {
    // the box is only enforced up to O(1/alpha); near-ties can flip
    let m = misses(None, 23, 120);
    assert!(m.len() <= 12, "{} misses: {m:?}", m.len());
}

#[test]
fn almost_every_threshold_is_optimal() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let grid = GridSpec::plane(4, 4, 0.25).unwrap();
    for _ in 0..20 {
        let g = ScalarField::from_fn(grid, |_| rng.random_range(-0.5..0.5));
        let p = SolverParams {
            alpha_max: Some(1e7),
            ..SolverParams::with_beta(0.02)
        };
        let (q, _) = solve(&g, &p, None).unwrap();
        let u = recover_u(&q, &g, &p).unwrap();
        let (_, e_min) = brute_force_min(&g, p.beta).unwrap();
        let hits = (1..100)
            .filter(|&t| {
                let e = primal_energy(&threshold(&u, t as f64 / 100.0), &g, p.beta).unwrap();
                (e - e_min).abs() <= 1e-6
            })
            .count();
        assert!(hits >= 95, "{hits}/99");
    }
}

#[test]
fn gap_shrinks_with_alpha() {
    let clean = disk(32, 32, 10.0, 0.0, 1.0);
    let (f, _) = add_gaussian_noise(&clean, 0.3, 42).unwrap();
    let g = f.map(|v| 0.5 - v);
    let gaps: Vec<f64> = [None, Some(1e4), Some(1e5)]
        .into_iter()
        .map(|alpha_max| {
            let p = SolverParams {
                alpha_max,
                ..SolverParams::with_beta(1e-3)
            };
            solve(&g, &p, None).unwrap().1.final_gap
        })
        .collect();
    // the dual iterate sits slightly outside the box, so the gap is negative
    assert!(gaps.iter().all(|&d| d < 0.0), "{gaps:?}");
    for w in gaps.windows(2) {
        assert!(w[1].abs() < 0.25 * w[0].abs(), "{gaps:?}");
    }
}
