//! Writes the synthetic sample inputs into `fixtures/`.
//!
//! cargo run -p tvrelax-cli --example make_fixtures [-- <dir>]

use std::fs;
use std::io::Write;
use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::ExtendedColorType;
use tvrelax::noise::add_gaussian_noise;
use tvrelax::synth::{disk, plateau_problem, quadrants, step_problem};
use tvrelax::ScalarField;

fn pgm(dir: &Path, name: &str, f: &ScalarField) {
    let d = f.grid().dims();
    let bytes: Vec<u8> = f.values().iter().map(|v| (v * 255.0).round() as u8).collect();
    PnmEncoder::new(fs::File::create(dir.join(name)).unwrap())
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
        .encode(bytes.as_slice(), d[1] as u32, d[0] as u32, ExtendedColorType::L8)
        .unwrap();
}

fn column(dir: &Path, name: &str, values: &[f64]) {
    let mut out = fs::File::create(dir.join(name)).unwrap();
    for v in values {
        writeln!(out, "{v}").unwrap();
    }
}

fn main() {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "fixtures".into());
    let dir = Path::new(&dir);
    fs::create_dir_all(dir).unwrap();

    let clean = disk(64, 64, 20.0, 0.0, 1.0);
    pgm(dir, "disk64.pgm", &clean);
    pgm(dir, "disk64_noisy30.pgm", &add_gaussian_noise(&clean, 0.3, 42).unwrap().0);
    pgm(dir, "disk64_noisy50.pgm", &add_gaussian_noise(&clean, 0.5, 42).unwrap().0);
    pgm(dir, "two_level32.pgm", &disk(32, 32, 10.0, 0.2, 0.8));
    pgm(dir, "quadrants32.pgm", &quadrants(32, 32, [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]));

    column(dir, "step256.csv", step_problem(256).values());
    column(dir, "plateau256.csv", plateau_problem(256, 0.25).values());
    let ramp: Vec<f64> = (0..16).map(|i| -1.0 + 2.0 * (i as f64 + 0.5) / 16.0).collect();
    column(dir, "ramp16.csv", &ramp);
}
