//! Drivers reducing image problems to the binary TV problem: binary
//! denoising, two-phase Chan-Vese segmentation and `2^M`-phase labelling.

mod chan_vese;
mod denoise;
mod multilabel;

pub use chan_vese::{chan_vese, chan_vese_with, two_phase_objective, SegmentationState};
pub use denoise::{denoise, denoise_binary, Denoised};
pub use multilabel::{label_gradient, label_objective, multilabel, multilabel_with, LabelState, MAX_LABEL_BITS};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::ScalarField;

/// Stopping rule of the outer alternation: stop once the summed `L1`
/// change of the indicators is at most `tol_fraction * |Omega|`, or after
/// `max_iters` outer iterations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuterOptions {
    pub max_iters: usize,
    pub tol_fraction: f64,
}

impl OuterOptions {
    pub const CHAN_VESE: OuterOptions = OuterOptions {
        max_iters: 50,
        tol_fraction: 1e-4,
    };
    pub const MULTILABEL: OuterOptions = OuterOptions {
        max_iters: 30,
        tol_fraction: 1e-4,
    };

    fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidParam {
                name: "max_iters",
                reason: "must be >= 1".into(),
            });
        }
        if !(self.tol_fraction >= 0.0 && self.tol_fraction.is_finite()) {
            return Err(Error::InvalidParam {
                name: "tol_fraction",
                reason: "must be finite and >= 0".into(),
            });
        }
        Ok(())
    }
}

fn l1_distance(a: &ScalarField, b: &ScalarField) -> f64 {
    let s: f64 = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).sum();
    s * a.grid().cell_volume()
}

/// Weighted mean `sum w f / sum w`, `None` for an empty phase. Values are
/// shifted by one member of the phase first, so a constant phase returns
/// its value exactly.
fn phase_mean(f: &ScalarField, weight: impl Fn(usize) -> f64) -> Option<f64> {
    let pivot = (0..f.len()).find(|&i| weight(i) > 0.0).map(|i| f.values()[i])?;
    let (mut num, mut den) = (0.0, 0.0);
    for (i, fx) in f.values().iter().enumerate() {
        let w = weight(i);
        num += w * (fx - pivot);
        den += w;
    }
    Some(pivot + num / den)
}

fn check_binary(u: &ScalarField, f: &ScalarField) -> Result<()> {
    if u.grid() != f.grid() {
        return Err(Error::GridMismatch);
    }
    if let Some(i) = u.values().iter().position(|&v| v != 0.0 && v != 1.0) {
        return Err(Error::InvalidParam {
            name: "u0",
            reason: format!("must be binary, found {} at cell {i}", u.values()[i]),
        });
    }
    Ok(())
}

fn check_nonconstant(f: &ScalarField) -> Result<()> {
    let (lo, hi) = f.min_max();
    if lo == hi {
        return Err(Error::Degenerate(format!("image is constant ({lo})")));
    }
    Ok(())
}

/// Relative slack allowed when checking that an objective does not grow.
const MONOTONE_SLACK: f64 = 1e-10;

fn is_nonincreasing(history: &[f64]) -> bool {
    history
        .windows(2)
        .all(|w| w[1] <= w[0] + MONOTONE_SLACK * w[0].abs().max(1.0))
}
