use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::{ScalarField, VectorField};
use crate::params::SolverParams;
use crate::recovery::{recover_u, threshold};
use crate::ssn::{solve, SolveReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Denoised {
    /// Thresholded binary image.
    pub u: ScalarField,
    /// Recovered primal field before thresholding.
    pub relaxed: ScalarField,
    pub q: VectorField,
    pub report: SolveReport,
}

/// Binary TV denoising: the binary problem with data `g = 1/2 - f`.
pub fn denoise(f: &ScalarField, p: &SolverParams) -> Result<Denoised> {
    let g = f.map(|v| 0.5 - v);
    let (q, report) = solve(&g, p, None)?;
    let relaxed = recover_u(&q, &g, p)?;
    let u = threshold(&relaxed, p.threshold_t);
    Ok(Denoised {
        u,
        relaxed,
        q,
        report,
    })
}

/// Binary image closest to `f` in the TV-regularized least-squares sense.
pub fn denoise_binary(f: &ScalarField, p: &SolverParams) -> Result<ScalarField> {
    Ok(denoise(f, p)?.u)
}
