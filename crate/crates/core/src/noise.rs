//! Seeded Gaussian corruption of images in `[0, 1]`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::ScalarField;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseStats {
    /// `level * (max - min)` of the clean data.
    pub sigma: f64,
    /// Standard deviation of the drawn samples, before clamping.
    pub empirical_sigma: f64,
    /// Share of values clamped to 0 or 1.
    pub clamped_fraction: f64,
}

/// Adds `N(0, sigma^2)` noise with `sigma = level * (max f - min f)` and
/// clamps to `[0, 1]`. The same seed always gives the same field.
pub fn add_gaussian_noise(f: &ScalarField, level: f64, seed: u64) -> Result<(ScalarField, NoiseStats)> {
    if !(level >= 0.0 && level.is_finite()) {
        return Err(Error::InvalidParam {
            name: "level",
            reason: "must be finite and >= 0".into(),
        });
    }
    let (lo, hi) = f.min_max();
    let sigma = level * (hi - lo);
    if sigma == 0.0 {
        let stats = NoiseStats {
            sigma,
            empirical_sigma: 0.0,
            clamped_fraction: 0.0,
        };
        return Ok((f.clone(), stats));
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::InvalidParam {
        name: "level",
        reason: e.to_string(),
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<f64> = (0..f.len()).map(|_| normal.sample(&mut rng)).collect();
    let mut clamped = 0usize;
    let noisy = ScalarField::from_fn(*f.grid(), |i| {
        let v = f.values()[i] + draws[i];
        if !(0.0..=1.0).contains(&v) {
            clamped += 1;
        }
        v.clamp(0.0, 1.0)
    });
    let n = draws.len() as f64;
    let mean = draws.iter().sum::<f64>() / n;
    let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n;
    let stats = NoiseStats {
        sigma,
        empirical_sigma: var.sqrt(),
        clamped_fraction: clamped as f64 / n,
    };
    Ok((noisy, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::synth::disk;

    #[test]
    fn zero_level_is_identity() {
        let f = disk(16, 16, 5.0, 0.0, 1.0);
        let (g, stats) = add_gaussian_noise(&f, 0.0, 1).unwrap();
        assert_eq!(g, f);
        assert_eq!(stats.empirical_sigma, 0.0);
    }

    #[test]
    fn seeded_and_reproducible() {
        let f = disk(16, 16, 5.0, 0.0, 1.0);
        let a = add_gaussian_noise(&f, 0.3, 9).unwrap();
        let b = add_gaussian_noise(&f, 0.3, 9).unwrap();
        let c = add_gaussian_noise(&f, 0.3, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn empirical_sigma_near_target() {
        let f = disk(64, 64, 20.0, 0.0, 1.0);
        let (g, stats) = add_gaussian_noise(&f, 0.3, 2024).unwrap();
        assert_eq!(stats.sigma, 0.3);
        assert!((stats.empirical_sigma / stats.sigma - 1.0).abs() < 0.05);
        let (lo, hi) = g.min_max();
        assert!(lo >= 0.0 && hi <= 1.0);
        assert!(stats.clamped_fraction > 0.3 && stats.clamped_fraction < 0.7);
    }

    #[test]
    fn constant_image_is_unchanged() {
        let f = ScalarField::constant(GridSpec::plane(4, 4, 1.0).unwrap(), 0.4);
        assert_eq!(add_gaussian_noise(&f, 0.5, 3).unwrap().0, f);
        assert!(add_gaussian_noise(&f, -0.1, 3).is_err());
    }
}
