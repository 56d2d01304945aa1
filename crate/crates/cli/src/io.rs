//! Field input and output: 8-bit PGM, grayscale PNG and plain CSV grids.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, ImageFormat};
use sha2::{Digest, Sha256};
use tvrelax::{GridSpec, ScalarField};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Pgm,
    Png,
    Csv,
}

impl Format {
    pub fn of(path: &Path) -> CliResult<Format> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        match ext.as_deref() {
            Some("pgm" | "pnm") => Ok(Format::Pgm),
            Some("png") => Ok(Format::Png),
            Some("csv") => Ok(Format::Csv),
            _ => Err(CliError::Validation(format!(
                "{}: unsupported file type (use .pgm, .png or .csv)",
                path.display()
            ))),
        }
    }
}

/// Values in row-major order with their shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
    pub sha256: String,
}

impl Raster {
    /// Field on a grid with spacing `h`, or `1 / max(rows, cols)` when not
    /// given. Single rows or columns become one-dimensional grids.
    pub fn field(&self, spacing: Option<f64>) -> CliResult<ScalarField> {
        let h = spacing.unwrap_or(1.0 / self.rows.max(self.cols) as f64);
        let grid = if self.rows == 1 || self.cols == 1 {
            GridSpec::line(self.rows * self.cols, h)
        } else {
            GridSpec::plane(self.rows, self.cols, h)
        }?;
        Ok(ScalarField::new(grid, self.values.clone())?)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Reads an image (normalized to `[0, 1]`) or a CSV grid of raw values.
pub fn read(path: &Path) -> CliResult<Raster> {
    let format = Format::of(path)?;
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    let sha256 = sha256_hex(&bytes);
    match format {
        Format::Csv => read_csv(path, &bytes, sha256),
        Format::Pgm | Format::Png => {
            let fmt = if format == Format::Pgm { ImageFormat::Pnm } else { ImageFormat::Png };
            let img = image::load_from_memory_with_format(&bytes, fmt)
                .map_err(|e| CliError::io(path, e))?;
            let (cols, rows) = (img.width() as usize, img.height() as usize);
            let values = match img {
                image::DynamicImage::ImageLuma8(buf) => {
                    buf.into_raw().into_iter().map(|v| f64::from(v) / 255.0).collect()
                }
                other => other
                    .into_luma16()
                    .into_raw()
                    .into_iter()
                    .map(|v| f64::from(v) / 65535.0)
                    .collect(),
            };
            Ok(Raster {
                rows,
                cols,
                values,
                sha256,
            })
        }
    }
}

fn read_csv(path: &Path, bytes: &[u8], sha256: String) -> CliResult<Raster> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(bytes);
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        if cols.is_some_and(|c| c != record.len()) {
            return Err(CliError::Validation(format!(
                "{}: row {} has {} values, expected {}",
                path.display(),
                rows + 1,
                record.len(),
                cols.unwrap_or(0)
            )));
        }
        cols = Some(record.len());
        for field in &record {
            let v: f64 = field.parse().map_err(|_| {
                CliError::Validation(format!("{}: not a number: {field:?}", path.display()))
            })?;
            values.push(v);
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| CliError::Validation(format!("{}: empty grid", path.display())))?;
    Ok(Raster {
        rows,
        cols,
        values,
        sha256,
    })
}

/// Writes a field; PGM output is binary (P5). Images store `round(255 v)` clamped to `[0, 255]`, so
/// binary fields become `{0, 255}`; CSV keeps full precision.
pub fn write(path: &Path, field: &ScalarField) -> CliResult<()> {
    let dims = field.grid().dims();
    let (rows, cols) = if dims.len() == 1 { (dims[0], 1) } else { (dims[0], dims[1]) };
    match Format::of(path)? {
        Format::Csv => {
            let mut w = csv::Writer::from_path(path).map_err(|e| CliError::io(path, e))?;
            for r in 0..rows {
                let row = &field.values()[r * cols..(r + 1) * cols];
                w.write_record(row.iter().map(|v| v.to_string()))
                    .map_err(|e| CliError::io(path, e))?;
            }
            w.flush().map_err(|e| CliError::io(path, e))
        }
        format => {
            let bytes: Vec<u8> = field
                .values()
                .iter()
                .map(|v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
                .collect();
            let (w, h) = if dims.len() == 1 { (rows as u32, 1) } else { (cols as u32, rows as u32) };
            if format == Format::Png {
                return image::save_buffer_with_format(path, &bytes, w, h, ExtendedColorType::L8, ImageFormat::Png)
                    .map_err(|e| CliError::io(path, e));
            }
            let mut out = BufWriter::new(File::create(path).map_err(|e| CliError::io(path, e))?);
            PnmEncoder::new(&mut out)
                .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
                .encode(bytes.as_slice(), w, h, ExtendedColorType::L8)
                .map_err(|e| CliError::io(path, e))?;
            out.flush().map_err(|e| CliError::io(path, e))
        }
    }
}
