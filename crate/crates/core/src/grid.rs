//! Uniform grids on `[a, b]` and the grid functions that live on them.
//!
//! The discrete inner product is `(u, w)_h = h * sum_{j=0}^{n} u_j w_j`, with
//! the matching norm `|u|_h` and the max norm `|u|_inf`. Both sums run over
//! every node including the two endpoints.

use std::ops::{Index, Range};

use serde::Serialize;

use crate::error::{Error, Result};

/// A uniform grid `x_j = a + j h`, `j = 0..=n`, `h = (b - a) / n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    a: f64,
    b: f64,
    n: usize,
    h: f64,
}

impl Grid {
    /// Smallest admissible cell count. Three-point stencils need one interior node.
    pub const MIN_CELLS: usize = 2;

    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidGrid(format!("endpoints must be finite, got [{a}, {b}]")));
        }
        if b <= a {
            return Err(Error::InvalidGrid(format!("need b > a, got [{a}, {b}]")));
        }
        if n < Self::MIN_CELLS {
            return Err(Error::InvalidGrid(format!(
                "need at least {} cells, got {n}",
                Self::MIN_CELLS
            )));
        }
        Ok(Grid { a, b, n, h: (b - a) / n as f64 })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Number of cells; there are `n + 1` nodes.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.n + 1
    }

    /// Node `x_j`. The last node is pinned to `b` so that the endpoints are exact.
    pub fn x(&self, j: usize) -> f64 {
        debug_assert!(j <= self.n);
        if j == self.n {
            self.b
        } else {
            self.a + j as f64 * self.h
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n).map(|j| self.x(j)).collect()
    }

    /// Interior node indices `1..n`.
    pub fn interior(&self) -> Range<usize> {
        1..self.n
    }

    /// True when `fine` has the same interval and exactly twice the cells.
    pub fn is_refined_by(&self, fine: &Grid) -> bool {
        self.a == fine.a && self.b == fine.b && fine.n == 2 * self.n
    }
}

/// Which nodes a norm sums over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormSpan {
    /// `j = 0..=n`.
    Full,
    /// `j = 1..n`.
    Interior,
}

impl NormSpan {
    fn range(self, grid: &Grid) -> Range<usize> {
        match self {
            NormSpan::Full => 0..grid.n + 1,
            NormSpan::Interior => 1..grid.n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormReport {
    pub l2h: f64,
    pub sup: f64,
}

/// Values of a scalar function at the nodes of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), got: values.len() });
        }
        Ok(GridFunction { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        GridFunction { grid, values: vec![0.0; grid.len()] }
    }

    pub fn from_fn(grid: Grid, mut f: impl FnMut(usize) -> f64) -> Self {
        GridFunction { grid, values: (0..grid.len()).map(&mut f).collect() }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Member of the homogeneous subspace: both endpoint values vanish.
    pub fn is_homogeneous(&self) -> bool {
        self.values[0] == 0.0 && self.values[self.grid.n] == 0.0
    }

    pub fn check_same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn inner_product(&self, other: &GridFunction) -> Result<f64> {
        self.check_same_grid(other)?;
        let sum: f64 = self.values.iter().zip(&other.values).map(|(u, w)| u * w).sum();
        Ok(self.grid.h * sum)
    }

    pub fn norm_h(&self) -> f64 {
        self.norm_h_over(NormSpan::Full)
    }

    pub fn norm_sup(&self) -> f64 {
        self.norm_sup_over(NormSpan::Full)
    }

    pub fn norm_h_over(&self, span: NormSpan) -> f64 {
        let sum: f64 = self.values[span.range(&self.grid)].iter().map(|v| v * v).sum();
        (self.grid.h * sum).sqrt()
    }

    pub fn norm_sup_over(&self, span: NormSpan) -> f64 {
        self.values[span.range(&self.grid)].iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn norms(&self, span: NormSpan) -> NormReport {
        NormReport { l2h: self.norm_h_over(span), sup: self.norm_sup_over(span) }
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |u, w| u - w)
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |u, w| u + w)
    }

    pub fn scale(&self, s: f64) -> GridFunction {
        GridFunction { grid: self.grid, values: self.values.iter().map(|v| s * v).collect() }
    }

    pub fn abs(&self) -> GridFunction {
        GridFunction { grid: self.grid, values: self.values.iter().map(|v| v.abs()).collect() }
    }

    fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<GridFunction> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&u, &w)| f(u, w)).collect();
        Ok(GridFunction { grid: self.grid, values })
    }
}

impl Index<usize> for GridFunction {
    type Output = f64;

    fn index(&self, j: usize) -> &f64 {
        &self.values[j]
    }
}

/// Samples `f` at every node. A non-finite value is reported with its abscissa.
pub fn sample(f: impl Fn(f64) -> f64, grid: &Grid) -> Result<GridFunction> {
    let values = grid
        .nodes()
        .into_iter()
        .map(|x| {
            let v = f(x);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Evaluation { x })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GridFunction { grid: *grid, values })
}
