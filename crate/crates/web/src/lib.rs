//! Browser bindings: grayscale images travel as row-major `Float64Array`s
//! with values in `[0, 1]`.

use tvrelax::apps::{chan_vese, denoise};
use tvrelax::noise::add_gaussian_noise;
use tvrelax::synth::{disk, image_grid};
use tvrelax::{ScalarField, SolverParams};
use wasm_bindgen::prelude::*;

/// Output image plus a short summary for display.
#[wasm_bindgen]
pub struct Output {
    pixels: Vec<f64>,
    summary: String,
}

#[wasm_bindgen]
impl Output {
    #[wasm_bindgen(getter)]
    pub fn pixels(&self) -> Vec<f64> {
        self.pixels.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn summary(&self) -> String {
        self.summary.clone()
    }
}

fn field(pixels: &[f64], rows: usize, cols: usize) -> Result<ScalarField, JsError> {
    Ok(ScalarField::new(image_grid(rows, cols), pixels.to_vec())?)
}

fn params(beta: f64) -> Result<SolverParams, JsError> {
    let p = SolverParams::with_beta(beta);
    p.validate()?;
    Ok(p)
}

/// Disk of the given radius (in pixels), white on black.
#[wasm_bindgen]
pub fn disk_image(rows: usize, cols: usize, radius: f64) -> Vec<f64> {
    disk(rows, cols, radius, 0.0, 1.0).values().to_vec()
}

#[wasm_bindgen]
pub fn add_noise(pixels: &[f64], rows: usize, cols: usize, level: f64, seed: u32) -> Result<Output, JsError> {
    let (noisy, stats) = add_gaussian_noise(&field(pixels, rows, cols)?, level, u64::from(seed))?;
    Ok(Output {
        pixels: noisy.values().to_vec(),
        summary: format!(
            "sigma {:.3}, {:.1}% clamped",
            stats.sigma,
            100.0 * stats.clamped_fraction
        ),
    })
}

/// Binary TV denoising.
#[wasm_bindgen(js_name = denoise)]
pub fn denoise_image(pixels: &[f64], rows: usize, cols: usize, beta: f64) -> Result<Output, JsError> {
    let d = denoise(&field(pixels, rows, cols)?, &params(beta)?)?;
    Ok(Output {
        pixels: d.u.values().to_vec(),
        summary: format!(
            "{} Newton steps, {}, gap {:.2e}",
            d.report.newton_iters,
            if d.report.converged { "converged" } else { "not converged" },
            d.report.final_gap
        ),
    })
}

/// Two-phase segmentation; returns the piecewise-constant image.
#[wasm_bindgen]
pub fn segment(pixels: &[f64], rows: usize, cols: usize, beta: f64) -> Result<Output, JsError> {
    let s = chan_vese(&field(pixels, rows, cols)?, &params(beta)?, None)?;
    let image = s.u.map(|v| if v == 1.0 { s.c1 } else { s.c2 });
    Ok(Output {
        pixels: image.values().to_vec(),
        summary: format!(
            "c1 {:.3}, c2 {:.3}, {} outer iterations",
            s.c1, s.c2, s.outer_iters
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_round_trip() {
        let img = disk_image(24, 24, 7.0);
        let out = denoise_image(&img, 24, 24, 1e-3).unwrap();
        assert_eq!(out.pixels, img);
        let seg = segment(&img, 24, 24, 8e-3).unwrap();
        assert_eq!(seg.pixels, img);
    }

    #[test]
    fn noise_is_seeded() {
        let img = disk_image(16, 16, 5.0);
        let a = add_noise(&img, 16, 16, 0.2, 3).unwrap();
        let b = add_noise(&img, 16, 16, 0.2, 3).unwrap();
        assert_eq!(a.pixels, b.pixels);
        assert_ne!(a.pixels, img);
    }
}
