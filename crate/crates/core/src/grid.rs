//! Regular grids, cell fields and the discrete differential operators.
//!
//! Cells are stored in row-major order: on a 2D grid with `dims = [rows, cols]`
//! the cell `(r, c)` lives at index `r * cols + c`. Axis 0 is the slow (row)
//! axis and axis 1 the fast (column) axis. Component `a` of a [`VectorField`]
//! holds the discrete derivative along axis `a`.
//!
//! The gradient uses forward differences with a zero difference on the far
//! face of every axis. The divergence is its exact negative adjoint with
//! respect to the plain Euclidean inner product, and the Laplacian is the
//! five-point (three-point in 1D) stencil with homogeneous Dirichlet ghosts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Extents and spacings of a 1D or 2D regular grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    ndim: usize,
    dims: [usize; 2],
    spacing: [f64; 2],
}

impl GridSpec {
    pub fn new(dims: &[usize], spacing: &[f64]) -> Result<Self> {
        if dims.is_empty() || dims.len() > 2 {
            return Err(Error::InvalidGrid(format!(
                "expected 1 or 2 axes, got {}",
                dims.len()
            )));
        }
        if spacing.len() != dims.len() {
            return Err(Error::InvalidGrid(format!(
                "{} spacings given for {} axes",
                spacing.len(),
                dims.len()
            )));
        }
        if let Some(&d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidGrid(format!("extent {d} is below 2")));
        }
        if let Some(&h) = spacing.iter().find(|&&h| !(h > 0.0 && h.is_finite())) {
            return Err(Error::InvalidGrid(format!("spacing {h} is not positive")));
        }
        let mut total: usize = 1;
        for &d in dims {
            total = total
                .checked_mul(d)
                .ok_or_else(|| Error::InvalidGrid("cell count overflows".into()))?;
        }
        let mut g = GridSpec {
            ndim: dims.len(),
            dims: [1, 1],
            spacing: [1.0, 1.0],
        };
        g.dims[..dims.len()].copy_from_slice(dims);
        g.spacing[..dims.len()].copy_from_slice(spacing);
        Ok(g)
    }

    pub fn line(n: usize, h: f64) -> Result<Self> {
        Self::new(&[n], &[h])
    }

    /// A `rows x cols` grid with the same spacing `h` along both axes.
    pub fn plane(rows: usize, cols: usize, h: f64) -> Result<Self> {
        Self::new(&[rows, cols], &[h, h])
    }

    pub fn ndim(&self) -> usize {
        self.ndim
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims[..self.ndim]
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing[..self.ndim]
    }

    /// Number of cells.
    pub fn len(&self) -> usize {
        self.dims().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Measure of one cell, the product of the spacings.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().iter().product()
    }

    /// Measure of the whole domain, `n * h^d`.
    pub fn domain_volume(&self) -> f64 {
        self.len() as f64 * self.cell_volume()
    }

    /// Index distance between neighbouring cells along `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        self.dims()[axis + 1..].iter().product()
    }

    /// Number of entries of a vector field on this grid, `d * n`.
    pub fn vector_len(&self) -> usize {
        self.ndim * self.len()
    }

    /// Iterates `(outer, extent, stride)` blocks so that the cells of `axis`
    /// are visited as `o * extent * stride + k * stride + i`.
    fn axis_blocks(&self, axis: usize) -> (usize, usize, usize) {
        let m = self.dims()[axis];
        let s = self.stride(axis);
        (self.len() / (m * s), m, s)
    }
}

/// Real values, one per grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                actual: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: GridSpec, value: f64) -> Self {
        ScalarField {
            grid,
            values: vec![value; grid.len()],
        }
    }

    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(usize) -> f64) -> Self {
        ScalarField {
            grid,
            values: (0..grid.len()).map(&mut f).collect(),
        }
    }

    pub(crate) fn from_raw(grid: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        ScalarField { grid, values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Plain Euclidean inner product (no cell-volume weighting).
    pub fn dot(&self, other: &ScalarField) -> Result<f64> {
        same_grid(&self.grid, &other.grid)?;
        Ok(dot(&self.values, &other.values))
    }

    pub fn norm(&self) -> f64 {
        dot(&self.values, &self.values).sqrt()
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// `d` real components per cell, stored as `d` contiguous blocks of `n` values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorField {
    grid: GridSpec,
    data: Vec<f64>,
}

impl VectorField {
    pub fn new(grid: GridSpec, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.vector_len() {
            return Err(Error::LengthMismatch {
                expected: grid.vector_len(),
                actual: data.len(),
            });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(VectorField { grid, data })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        VectorField {
            grid,
            data: vec![0.0; grid.vector_len()],
        }
    }

    pub fn from_components(grid: GridSpec, components: &[Vec<f64>]) -> Result<Self> {
        if components.len() != grid.ndim() {
            return Err(Error::InvalidGrid(format!(
                "{} components given for a {}-dimensional grid",
                components.len(),
                grid.ndim()
            )));
        }
        Self::new(grid, components.concat())
    }

    pub(crate) fn from_raw(grid: GridSpec, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), grid.vector_len());
        VectorField { grid, data }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// All components, back to back.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn component(&self, axis: usize) -> &[f64] {
        let n = self.grid.len();
        &self.data[axis * n..(axis + 1) * n]
    }

    pub fn dot(&self, other: &VectorField) -> Result<f64> {
        same_grid(&self.grid, &other.grid)?;
        Ok(dot(&self.data, &other.data))
    }

    pub fn norm(&self) -> f64 {
        dot(&self.data, &self.data).sqrt()
    }

    /// Largest `|q_a(x)|` over all cells and components.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub(crate) fn same_grid(a: &GridSpec, b: &GridSpec) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Forward-difference gradient.
pub fn grad(u: &ScalarField) -> VectorField {
    let mut out = vec![0.0; u.grid.vector_len()];
    grad_into(&u.grid, &u.values, &mut out);
    VectorField::from_raw(u.grid, out)
}

/// Discrete divergence, `div = -grad^T`.
pub fn div(p: &VectorField) -> ScalarField {
    let mut out = vec![0.0; p.grid.len()];
    div_into(&p.grid, &p.data, &mut out);
    ScalarField::from_raw(p.grid, out)
}

/// Five-point Laplacian with zero ghost values outside the grid.
pub fn laplacian_dirichlet(u: &ScalarField) -> ScalarField {
    let mut out = vec![0.0; u.grid.len()];
    laplacian_into(&u.grid, &u.values, &mut out);
    ScalarField::from_raw(u.grid, out)
}

pub(crate) fn grad_into(grid: &GridSpec, u: &[f64], out: &mut [f64]) {
    let n = grid.len();
    for axis in 0..grid.ndim() {
        let inv_h = 1.0 / grid.spacing()[axis];
        let (outer, m, s) = grid.axis_blocks(axis);
        let comp = &mut out[axis * n..(axis + 1) * n];
        for o in 0..outer {
            let base = o * m * s;
            for k in 0..m - 1 {
                let row = base + k * s;
                for i in row..row + s {
                    comp[i] = (u[i + s] - u[i]) * inv_h;
                }
            }
            let last = base + (m - 1) * s;
            comp[last..last + s].fill(0.0);
        }
    }
}

pub(crate) fn div_into(grid: &GridSpec, p: &[f64], out: &mut [f64]) {
    let n = grid.len();
    out.fill(0.0);
    for axis in 0..grid.ndim() {
        let inv_h = 1.0 / grid.spacing()[axis];
        let (outer, m, s) = grid.axis_blocks(axis);
        let comp = &p[axis * n..(axis + 1) * n];
        for o in 0..outer {
            let base = o * m * s;
            for k in 0..m {
                let row = base + k * s;
                for i in row..row + s {
                    let here = if k + 1 < m { comp[i] } else { 0.0 };
                    let before = if k > 0 { comp[i - s] } else { 0.0 };
                    out[i] += (here - before) * inv_h;
                }
            }
        }
    }
}

pub(crate) fn laplacian_into(grid: &GridSpec, u: &[f64], out: &mut [f64]) {
    out.fill(0.0);
    for axis in 0..grid.ndim() {
        let h = grid.spacing()[axis];
        let inv_h2 = 1.0 / (h * h);
        let (outer, m, s) = grid.axis_blocks(axis);
        for o in 0..outer {
            let base = o * m * s;
            for k in 0..m {
                let row = base + k * s;
                for i in row..row + s {
                    let next = if k + 1 < m { u[i + s] } else { 0.0 };
                    let prev = if k > 0 { u[i - s] } else { 0.0 };
                    out[i] += (next + prev - 2.0 * u[i]) * inv_h2;
                }
            }
        }
    }
}

/// Applies the Dirichlet Laplacian to every component of a vector field.
pub(crate) fn vector_laplacian_into(grid: &GridSpec, q: &[f64], out: &mut [f64]) {
    let n = grid.len();
    for a in 0..grid.ndim() {
        laplacian_into(grid, &q[a * n..(a + 1) * n], &mut out[a * n..(a + 1) * n]);
    }
}
