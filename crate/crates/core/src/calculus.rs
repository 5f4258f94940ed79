//! Discrete difference operators applied directly to grid functions.
//!
//! `sigma`, `delta1` and `delta2` are defined on interior nodes only: `sigma`
//! copies the endpoint values through, the two differences write zero there.
//! The compact operators (`tilde_delta2`, `delta3`, `delta4`) take their
//! endpoint values from the caller, normally from the boundary closure.

use serde::Serialize;

use crate::error::Result;
use crate::grid::GridFunction;
use crate::tridiag::solve_tridiagonal;

/// Prescribed values of a derived quantity at `j = 0` and `j = n`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct EndpointPair {
    pub left: f64,
    pub right: f64,
}

impl EndpointPair {
    pub fn new(left: f64, right: f64) -> Self {
        EndpointPair { left, right }
    }

    pub fn zero() -> Self {
        EndpointPair::default()
    }

    pub fn is_finite(&self) -> bool {
        self.left.is_finite() && self.right.is_finite()
    }
}

fn interior_map(u: &GridFunction, endpoints: EndpointPair, f: impl Fn(usize) -> f64) -> GridFunction {
    let n = u.grid().n();
    GridFunction::from_fn(*u.grid(), |j| match j {
        0 => endpoints.left,
        j if j == n => endpoints.right,
        j => f(j),
    })
}

/// Simpson average `(u_{j-1} + 4 u_j + u_{j+1}) / 6`.
pub fn sigma(u: &GridFunction) -> GridFunction {
    let n = u.grid().n();
    interior_map(u, EndpointPair::new(u[0], u[n]), |j| (u[j - 1] + 4.0 * u[j] + u[j + 1]) / 6.0)
}

/// Central first difference.
pub fn delta1(u: &GridFunction) -> GridFunction {
    let h = u.grid().h();
    interior_map(u, EndpointPair::zero(), |j| (u[j + 1] - u[j - 1]) / (2.0 * h))
}

/// Central second difference.
pub fn delta2(u: &GridFunction) -> GridFunction {
    let h = u.grid().h();
    interior_map(u, EndpointPair::zero(), |j| (u[j + 1] - 2.0 * u[j] + u[j - 1]) / (h * h))
}

/// Hermitian derivative `p`: `sigma(p) = delta1(u)` on the interior, `p_0, p_n` from `bc`.
pub fn hermitian_derivative(u: &GridFunction, bc: EndpointPair) -> Result<GridFunction> {
    let grid = *u.grid();
    let n = grid.n();
    let h = grid.h();
    let m = n - 1;

    let mut rhs: Vec<f64> = (1..n).map(|j| (u[j + 1] - u[j - 1]) / (2.0 * h)).collect();
    rhs[0] -= bc.left / 6.0;
    rhs[m - 1] -= bc.right / 6.0;

    let interior = solve_tridiagonal(&vec![1.0 / 6.0; m], &vec![2.0 / 3.0; m], &vec![1.0 / 6.0; m], &rhs)?;

    let mut values = Vec::with_capacity(n + 1);
    values.push(bc.left);
    values.extend(interior);
    values.push(bc.right);
    GridFunction::new(grid, values)
}

/// `2 delta2(u) - delta1(p)` on the interior; endpoints from `bc2`.
pub fn tilde_delta2(u: &GridFunction, p: &GridFunction, bc2: EndpointPair) -> Result<GridFunction> {
    u.check_same_grid(p)?;
    let h = u.grid().h();
    Ok(interior_map(u, bc2, |j| {
        2.0 * (u[j + 1] - 2.0 * u[j] + u[j - 1]) / (h * h) - (p[j + 1] - p[j - 1]) / (2.0 * h)
    }))
}

/// `2 delta2(p) - delta1(d2)` on the interior; endpoints from `bc3`.
///
/// The stencils at `j = 1` and `j = n - 1` read `d2` at the endpoints, so `d2`
/// must already carry its closed boundary values.
pub fn delta3(p: &GridFunction, d2: &GridFunction, bc3: EndpointPair) -> Result<GridFunction> {
    p.check_same_grid(d2)?;
    let h = p.grid().h();
    Ok(interior_map(p, bc3, |j| {
        2.0 * (p[j + 1] - 2.0 * p[j] + p[j - 1]) / (h * h) - (d2[j + 1] - d2[j - 1]) / (2.0 * h)
    }))
}

/// Discrete biharmonic `(12 / h^2) (delta1(p) - delta2(u))`; endpoints from `bc4`.
pub fn delta4(u: &GridFunction, p: &GridFunction, bc4: EndpointPair) -> Result<GridFunction> {
    u.check_same_grid(p)?;
    let h = u.grid().h();
    Ok(interior_map(u, bc4, |j| {
        let dp = (p[j + 1] - p[j - 1]) / (2.0 * h);
        let ddu = (u[j + 1] - 2.0 * u[j] + u[j - 1]) / (h * h);
        12.0 / (h * h) * (dp - ddu)
    }))
}
