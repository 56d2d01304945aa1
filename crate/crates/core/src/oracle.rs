//! Exhaustive minimization over binary fields on tiny grids.
//!
//! Configuration `k` in `0..2^n` sets cell `i` to bit `i` of `k`. The energy
//! is evaluated from an explicit cell/edge list rather than through the grid
//! operators, so the oracle stays independent of the code it checks. Ties
//! keep the lowest `k`.

use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField};

/// Largest grid the oracle enumerates.
pub const MAX_CELLS: usize = 20;

struct Instance {
    n: usize,
    cell: Vec<f64>,
    edges: Vec<(usize, usize, f64)>,
}

impl Instance {
    fn new(g: &ScalarField, beta: f64) -> Result<Self> {
        let grid = g.grid();
        let n = grid.len();
        if n > MAX_CELLS {
            return Err(Error::TooLarge {
                cells: n,
                max: MAX_CELLS,
            });
        }
        let hd = grid.cell_volume();
        let cell = g.values().iter().map(|v| v * hd).collect();
        Ok(Instance {
            n,
            cell,
            edges: edges(grid, beta),
        })
    }

    fn energy(&self, k: u32) -> f64 {
        let bit = |i: usize| (k >> i) & 1 == 1;
        let mut e = 0.0;
        for i in 0..self.n {
            if bit(i) {
                e += self.cell[i];
            }
        }
        for &(i, j, w) in &self.edges {
            if bit(i) != bit(j) {
                e += w;
            }
        }
        e
    }

    fn field(&self, grid: GridSpec, k: u32) -> ScalarField {
        ScalarField::from_fn(grid, |i| f64::from((k >> i) & 1))
    }
}

/// Neighbour pairs with weight `beta h^d / h_axis`.
fn edges(grid: &GridSpec, beta: f64) -> Vec<(usize, usize, f64)> {
    let dims = grid.dims();
    let hd = grid.cell_volume();
    let mut out = Vec::new();
    match dims.len() {
        1 => {
            let w = beta * hd / grid.spacing()[0];
            out.extend((0..dims[0] - 1).map(|i| (i, i + 1, w)));
        }
        _ => {
            let (rows, cols) = (dims[0], dims[1]);
            let wr = beta * hd / grid.spacing()[0];
            let wc = beta * hd / grid.spacing()[1];
            for r in 0..rows {
                for c in 0..cols {
                    let i = r * cols + c;
                    if r + 1 < rows {
                        out.push((i, i + cols, wr));
                    }
                    if c + 1 < cols {
                        out.push((i, i + 1, wc));
                    }
                }
            }
        }
    }
    out
}

/// Binary energy `sum g u h^d + beta TV(u)`, evaluated from the edge list.
/// `u` is read as binary through `u > 0.5`.
pub fn binary_energy(u: &ScalarField, g: &ScalarField, beta: f64) -> Result<f64> {
    if u.grid() != g.grid() {
        return Err(Error::GridMismatch);
    }
    let hd = g.grid().cell_volume();
    let on: Vec<bool> = u.values().iter().map(|&v| v > 0.5).collect();
    let mut e: f64 = on
        .iter()
        .zip(g.values())
        .filter(|(b, _)| **b)
        .map(|(_, gi)| gi * hd)
        .sum();
    for (i, j, w) in edges(g.grid(), beta) {
        if on[i] != on[j] {
            e += w;
        }
    }
    Ok(e)
}

fn search(g: &ScalarField, beta: f64, admissible: impl Fn(u32) -> bool) -> Result<(ScalarField, f64)> {
    let inst = Instance::new(g, beta)?;
    let mut best: Option<(u32, f64)> = None;
    for k in 0..(1u32 << inst.n) {
        if !admissible(k) {
            continue;
        }
        let e = inst.energy(k);
        if best.is_none_or(|(_, b)| e < b) {
            best = Some((k, e));
        }
    }
    let (k, e) = best.ok_or(Error::Infeasible)?;
    Ok((inst.field(*g.grid(), k), e))
}

/// Global binary minimizer of `sum g u h^d + beta TV(u)` and its energy.
pub fn brute_force_min(g: &ScalarField, beta: f64) -> Result<(ScalarField, f64)> {
    search(g, beta, |_| true)
}

/// Minimizer among binary fields with `|sum u h^d - volume| <= vol_tol`.
pub fn brute_force_volume(
    g: &ScalarField,
    beta: f64,
    volume: f64,
    vol_tol: f64,
) -> Result<(ScalarField, f64)> {
    let hd = g.grid().cell_volume();
    search(g, beta, |k| {
        (f64::from(k.count_ones()) * hd - volume).abs() <= vol_tol
    })
}
