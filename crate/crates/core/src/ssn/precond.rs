//! Preconditioner for the Newton systems: `(1/alpha)(-Lap) + alpha * chi`,
//! applied component by component, where `chi` marks the entries of `q`
//! outside the box `[-beta, beta]`.

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::params::Preconditioner;

/// Cholesky factor of a symmetric positive definite band matrix.
///
/// Row `i` stores `L[i][j]` for `j` in `i - bw ..= i` at offset
/// `i * (bw + 1) + (j + bw - i)`.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    n: usize,
    bw: usize,
    l: Vec<f64>,
}

impl BandedCholesky {
    /// Factors the matrix whose lower band entries are `entry(i, j)`, `j <= i`.
    pub fn factor(n: usize, bw: usize, entry: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let w = bw + 1;
        let mut l = vec![0.0; n * w];
        for i in 0..n {
            let start = i.saturating_sub(bw);
            for j in start..=i {
                let mut s = entry(i, j);
                let (ri, rj) = (i * w + bw - i, j * w + bw - j);
                for k in start..j {
                    s -= l[ri + k] * l[rj + k];
                }
                if i == j {
                    if !(s > 0.0) {
                        return Err(Error::Factorization(i));
                    }
                    l[ri + i] = s.sqrt();
                } else {
                    l[ri + j] = s / l[rj + j];
                }
            }
        }
        Ok(BandedCholesky { n, bw, l })
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.l[i * (self.bw + 1) + self.bw + j - i]
    }

    /// Solves `L L^T x = b` in place.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let mut s = x[i];
            for k in i.saturating_sub(self.bw)..i {
                s -= self.at(i, k) * x[k];
            }
            x[i] = s / self.at(i, i);
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..(i + self.bw + 1).min(n) {
                s -= self.at(k, i) * x[k];
            }
            x[i] = s / self.at(i, i);
        }
    }
}

#[derive(Debug, Clone)]
enum ComponentInverse {
    Cholesky(BandedCholesky),
    Jacobi(Vec<f64>),
}

#[derive(Debug, Clone)]
struct Component {
    mask: Vec<bool>,
    inverse: ComponentInverse,
}

/// Per-component preconditioner cache; a component is refactored only when
/// its box mask changes.
#[derive(Debug, Clone)]
pub struct BoxPreconditioner {
    kind: Preconditioner,
    grid: GridSpec,
    alpha: f64,
    components: Vec<Option<Component>>,
    factorizations: usize,
}

impl BoxPreconditioner {
    pub fn new(kind: Preconditioner, grid: GridSpec, alpha: f64) -> Self {
        BoxPreconditioner {
            kind,
            grid,
            alpha,
            components: vec![None; grid.ndim()],
            factorizations: 0,
        }
    }

    /// Number of component factorizations performed so far.
    pub fn factorizations(&self) -> usize {
        self.factorizations
    }

    /// `mask` covers all `d * n` entries of `q`.
    pub fn update(&mut self, mask: &[bool]) -> Result<()> {
        let n = self.grid.len();
        for a in 0..self.grid.ndim() {
            let m = &mask[a * n..(a + 1) * n];
            let stale = match &self.components[a] {
                Some(c) => c.mask != m,
                None => true,
            };
            if stale {
                let inverse = self.build(m)?;
                self.components[a] = Some(Component {
                    mask: m.to_vec(),
                    inverse,
                });
                self.factorizations += 1;
            }
        }
        Ok(())
    }

    fn build(&self, mask: &[bool]) -> Result<ComponentInverse> {
        let grid = &self.grid;
        let inv_alpha = 1.0 / self.alpha;
        let weights: Vec<f64> = grid
            .spacing()
            .iter()
            .map(|h| inv_alpha / (h * h))
            .collect();
        let center: f64 = weights.iter().map(|w| 2.0 * w).sum();
        let diag = |i: usize| center + if mask[i] { self.alpha } else { 0.0 };
        match self.kind {
            Preconditioner::Jacobi => Ok(ComponentInverse::Jacobi(
                (0..grid.len()).map(|i| 1.0 / diag(i)).collect(),
            )),
            Preconditioner::Cholesky => {
                let strides: Vec<usize> = (0..grid.ndim()).map(|a| grid.stride(a)).collect();
                let dims = grid.dims();
                let bw = strides[0];
                let entry = |i: usize, j: usize| {
                    if i == j {
                        return diag(i);
                    }
                    let off = i - j;
                    for a in 0..grid.ndim() {
                        // j is the lower neighbour of i along axis a
                        if off == strides[a] && !(i / strides[a]).is_multiple_of(dims[a]) {
                            return -weights[a];
                        }
                    }
                    0.0
                };
                Ok(ComponentInverse::Cholesky(BandedCholesky::factor(
                    grid.len(),
                    bw,
                    entry,
                )?))
            }
        }
    }

    pub fn apply(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        let n = self.grid.len();
        for a in 0..self.grid.ndim() {
            let comp = self.components[a]
                .as_ref()
                .expect("preconditioner used before update");
            let (ra, za) = (&r[a * n..(a + 1) * n], &mut z[a * n..(a + 1) * n]);
            match &comp.inverse {
                ComponentInverse::Jacobi(inv) => {
                    for i in 0..n {
                        za[i] = ra[i] * inv[i];
                    }
                }
                ComponentInverse::Cholesky(f) => {
                    za.copy_from_slice(ra);
                    f.solve_in_place(za);
                }
            }
        }
        Ok(())
    }
}
