//! Binary total-variation minimization through an exact convex relaxation.
//!
//! Problems of the form `min_{u in {0,1}} int g u + beta TV(u)` are relaxed
//! to `u in [0, 1]`, penalized, and solved through their Fenchel dual with a
//! semismooth Newton method ([`ssn::solve`]). The primal field is recovered
//! from the dual ([`recovery::recover_u`]) and thresholded; for almost every
//! level the result is a binary minimizer. Drivers in [`apps`] reduce binary
//! denoising, two-phase segmentation and `2^M`-phase labelling to this core
//! problem, [`volume`] adds a volume constraint through a scalar multiplier,
//! and [`oracle`] enumerates binary fields on tiny grids for verification.

pub mod apps;
mod clock;
pub mod energy;
pub mod error;
pub mod grid;
pub mod oracle;
pub mod noise;
pub mod params;
pub mod recovery;
pub mod ssn;
pub mod synth;
pub mod volume;

pub use error::{Error, Result};
pub use grid::{div, grad, laplacian_dirichlet, GridSpec, ScalarField, VectorField};
pub use params::{Preconditioner, SolverParams};
pub use ssn::{solve, AlphaStage, SolveReport, StopReason};
