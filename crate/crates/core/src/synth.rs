//! Synthetic test images and the one-dimensional model problems.
//!
//! Images live on the unit square: an `rows x cols` image gets spacing
//! `1 / max(rows, cols)`.

use crate::grid::{GridSpec, ScalarField};

/// Grid of an image with the longer side scaled to 1.
pub fn image_grid(rows: usize, cols: usize) -> GridSpec {
    GridSpec::plane(rows, cols, 1.0 / rows.max(cols) as f64).expect("image extents must be >= 2")
}

/// `inside` on the disk of `radius` pixels centred in the image, `outside`
/// elsewhere. Pixel centres are tested.
pub fn disk(rows: usize, cols: usize, radius: f64, outside: f64, inside: f64) -> ScalarField {
    let (cr, cc) = ((rows as f64 - 1.0) / 2.0, (cols as f64 - 1.0) / 2.0);
    ScalarField::from_fn(image_grid(rows, cols), |i| {
        let (r, c) = ((i / cols) as f64 - cr, (i % cols) as f64 - cc);
        if r * r + c * c <= radius * radius {
            inside
        } else {
            outside
        }
    })
}

/// Four quadrants with `values[0..4]` in reading order (top-left,
/// top-right, bottom-left, bottom-right).
pub fn quadrants(rows: usize, cols: usize, values: [f64; 4]) -> ScalarField {
    ScalarField::from_fn(image_grid(rows, cols), |i| {
        let (r, c) = (i / cols, i % cols);
        values[2 * usize::from(r >= rows / 2) + usize::from(c >= cols / 2)]
    })
}

/// Cell centres of `n` uniform cells on `(-1, 1)`.
pub fn interval_centres(n: usize) -> Vec<f64> {
    let h = 2.0 / n as f64;
    (0..n).map(|i| -1.0 + (i as f64 + 0.5) * h).collect()
}

/// Data `g = 1/2 - f` for a 1-D `f` sampled at cell centres of `(-1, 1)`.
pub fn interval_problem(n: usize, f: impl Fn(f64) -> f64) -> ScalarField {
    let grid = GridSpec::line(n, 2.0 / n as f64).expect("n must be >= 2");
    let x = interval_centres(n);
    ScalarField::from_fn(grid, |i| 0.5 - f(x[i]))
}

/// Step data: `f = 1` on `x <= 0`, `0` elsewhere. For `beta < 1/4` the
/// binary minimizer is the indicator of `{x <= 0}` with energy
/// `beta - 1/2`.
pub fn step_problem(n: usize) -> ScalarField {
    interval_problem(n, |x| if x <= 0.0 { 1.0 } else { 0.0 })
}

/// Step with a plateau: `f = 1` on `x <= -w`, `1/2` on `(-w, w]`, `0`
/// beyond. For `beta < (1 - w)/4` the minimum is `beta - (1 - w)/2`, and
/// the jump may sit anywhere in the plateau.
pub fn plateau_problem(n: usize, w: f64) -> ScalarField {
    interval_problem(n, |x| {
        if x <= -w {
            1.0
        } else if x <= w {
            0.5
        } else {
            0.0
        }
    })
}
