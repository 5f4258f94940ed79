//! Endpoint closure: the 3x3 systems that supply `u''`, `u'''` and `u''''` at
//! `x = a` and `x = b` from interior difference values.
//!
//! With `U = (d2, d3, d4)` at the endpoint and `s = +1` on the left, `-1` on
//! the right (index reflection `j -> n - j` flips odd differences):
//!
//! ```text
//! A d2 + D d3 + d4                      = f - (A' + H) u' - B u      (the ODE)
//!        s/(2h) d3 + d4/6               = s d3_2/(2h) - (4 d4_1 + d4_2)/6
//! 2/h^2 d2 + s/(2h) d3                  = d4_1 - 2/h^2 (d2_2 - 2 d2_1) + s d3_2/(2h)
//! ```
//!
//! where subscripts `1, 2` mean the first and second nodes in from that end.

use std::fmt;

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::calculus::{delta3, delta4, tilde_delta2, EndpointPair};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::problem::CoefficientSet;
use crate::stencil::{BoundaryValues, ClosureSlot, LinearForm, StencilBuilder, StencilRow, Unknown, UnknownLayout};

/// Relative tolerance on the solvability quantity `12 -/+ 4Dh + Ah^2`.
pub const SOLVABILITY_TOL: f64 = 1e-8;

/// Minimum cell count for the closure stencils (needs nodes 1 and 2 from each end).
pub const MIN_CLOSURE_CELLS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Left, Side::Right];

    /// `+1` on the left, `-1` on the right.
    pub fn sign(self) -> f64 {
        match self {
            Side::Left => 1.0,
            Side::Right => -1.0,
        }
    }

    /// Endpoint node and the first two nodes in from it.
    pub fn nodes(self, n: usize) -> (usize, usize, usize) {
        match self {
            Side::Left => (0, 1, 2),
            Side::Right => (n, n - 1, n - 2),
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

/// Closed values `(u'', u''', u'''')` at one endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct BoundaryTriple {
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
}

impl BoundaryTriple {
    pub fn new(d2: f64, d3: f64, d4: f64) -> Self {
        BoundaryTriple { d2, d3, d4 }
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.d2, self.d3, self.d4]
    }

    pub fn get(&self, slot: ClosureSlot) -> f64 {
        match slot {
            ClosureSlot::D2 => self.d2,
            ClosureSlot::D3 => self.d3,
            ClosureSlot::D4 => self.d4,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.d2.is_finite() && self.d3.is_finite() && self.d4.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosureMatrix {
    alpha: Matrix3<f64>,
    a0: f64,
    d0: f64,
    h: f64,
    side: Side,
}

/// `12 - 4Dh + Ah^2` on the left, `12 + 4Dh + Ah^2` on the right.
pub fn solvability_quantity(a0: f64, d0: f64, h: f64, side: Side) -> f64 {
    12.0 - side.sign() * 4.0 * d0 * h + a0 * h * h
}

impl ClosureMatrix {
    pub fn new(a0: f64, d0: f64, h: f64, side: Side) -> Result<Self> {
        assert!(h > 0.0, "mesh width must be positive");
        let q = solvability_quantity(a0, d0, h, side);
        let scale = 12.0 + (4.0 * d0 * h).abs() + (a0 * h * h).abs();
        if !q.is_finite() || q.abs() < SOLVABILITY_TOL * scale {
            return Err(Error::SolvabilityViolation { side, quantity: q });
        }
        let s = side.sign();
        #[rustfmt::skip]
        let alpha = Matrix3::new(
            a0,              d0,             1.0,
            0.0,             s / (2.0 * h),  1.0 / 6.0,
            2.0 / (h * h),   s / (2.0 * h),  0.0,
        );
        Ok(ClosureMatrix { alpha, a0, d0, h, side })
    }

    pub fn alpha(&self) -> &Matrix3<f64> {
        &self.alpha
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn solvability_quantity(&self) -> f64 {
        solvability_quantity(self.a0, self.d0, self.h, self.side)
    }

    /// Closed-form inverse of `alpha`.
    pub fn inverse_closed_form(&self) -> Matrix3<f64> {
        let (a, d, h) = (self.a0, self.d0, self.h);
        let (h2, h3) = (h * h, h * h * h);
        let s = self.side.sign();
        let q = self.solvability_quantity();
        #[rustfmt::skip]
        let m = Matrix3::new(
            h2,        -6.0 * h2,                      6.0 * h2 - 2.0 * s * d * h3,
            -4.0 * s * h, 24.0 * s * h,                2.0 * s * a * h3,
            12.0,      -24.0 * s * d * h + 6.0 * a * h2, -6.0 * a * h2,
        );
        m / q
    }

    pub fn solve(&self, b: &Vector3<f64>) -> BoundaryTriple {
        let u = self.inverse_closed_form() * b;
        BoundaryTriple::new(u[0], u[1], u[2])
    }
}

/// `|M alpha - I|_max / (|M|_max |alpha|_max)` for the closed-form inverse `M`.
///
/// Normalized so that pure rounding stays near machine epsilon even when the
/// `2/h^2` entry is large.
pub fn inverse_residual(m: &ClosureMatrix) -> f64 {
    let inv = m.inverse_closed_form();
    let err = (inv * m.alpha() - Matrix3::identity()).abs().max();
    err / (inv.abs().max() * m.alpha().abs().max())
}

/// Closure matrix with coefficients sampled at the endpoint on `side`.
pub fn closure_matrix(coeffs: &CoefficientSet, grid: &Grid, side: Side) -> Result<ClosureMatrix> {
    let x = endpoint(grid, side);
    let c = coeffs.at(x)?;
    ClosureMatrix::new(c.a, c.d, grid.h(), side)
}

fn endpoint(grid: &Grid, side: Side) -> f64 {
    match side {
        Side::Left => grid.a(),
        Side::Right => grid.b(),
    }
}

fn check_closure_grid(grid: &Grid) -> Result<()> {
    if grid.n() < MIN_CLOSURE_CELLS {
        return Err(Error::InvalidGrid(format!(
            "boundary closure needs at least {MIN_CLOSURE_CELLS} cells, got {}",
            grid.n()
        )));
    }
    Ok(())
}

/// Solves the closure system at `side` for a known pair `(u, p)`.
///
/// The ODE row uses `f0` and the coefficients at the endpoint, with the known
/// `u` and `p` endpoint values moved to the right-hand side. The interior
/// values entering `b` never read the endpoint slots being solved for.
pub fn close_boundary(
    u: &GridFunction,
    p: &GridFunction,
    coeffs: &CoefficientSet,
    f0: f64,
    side: Side,
) -> Result<BoundaryTriple> {
    u.check_same_grid(p)?;
    let grid = *u.grid();
    check_closure_grid(&grid)?;
    let m = closure_matrix(coeffs, &grid, side)?;
    let c = coeffs.at(endpoint(&grid, side))?;
    let (e, i1, i2) = side.nodes(grid.n());
    let h = grid.h();
    let s = side.sign();

    let d2 = tilde_delta2(u, p, EndpointPair::zero())?;
    let d3 = delta3(p, &d2, EndpointPair::zero())?;
    let d4 = delta4(u, p, EndpointPair::zero())?;

    let b = Vector3::new(
        f0 - (c.a_prime + c.h) * p[e] - c.b * u[e],
        s * d3[i2] / (2.0 * h) - (4.0 * d4[i1] + d4[i2]) / 6.0,
        d4[i1] - 2.0 / (h * h) * (d2[i2] - 2.0 * d2[i1]) + s * d3[i2] / (2.0 * h),
    );
    let t = m.solve(&b);
    if !t.is_finite() {
        return Err(Error::SingularSystem { reason: format!("non-finite closure values at the {side} endpoint") });
    }
    Ok(t)
}

/// The three closure equations at `side` as affine forms, `alpha U - b`.
pub fn closure_forms(coeffs: &CoefficientSet, grid: &Grid, bc: &BoundaryValues, side: Side) -> Result<[LinearForm; 3]> {
    check_closure_grid(grid)?;
    let m = closure_matrix(coeffs, grid, side)?;
    let c = coeffs.at(endpoint(grid, side))?;
    let builder = StencilBuilder::new(*grid, *bc);
    let (e, i1, i2) = side.nodes(grid.n());
    let h = grid.h();
    let s = side.sign();
    let alpha = m.alpha();

    let slot = |k: ClosureSlot| LinearForm::var(Unknown::Closure(side, k));
    let alpha_row = |r: usize| {
        let mut f = LinearForm::default();
        for (col, k) in ClosureSlot::ALL.into_iter().enumerate() {
            if alpha[(r, col)] != 0.0 {
                f.add_scaled(&slot(k), alpha[(r, col)]);
            }
        }
        f
    };

    // alpha U + (A' + H) u'_e + B u_e - f_e
    let mut r1 = alpha_row(0);
    r1.add_scaled(&builder.p(e), c.a_prime + c.h);
    r1.add_scaled(&builder.u(e), c.b);
    r1.add_constant(-c.f);

    let d3_i2 = builder.d3(i2);
    let d4_i1 = builder.d4(i1);
    let d4_i2 = builder.d4(i2);

    let mut r2 = alpha_row(1);
    r2.add_scaled(&d3_i2, -s / (2.0 * h));
    r2.add_scaled(&d4_i1, 4.0 / 6.0);
    r2.add_scaled(&d4_i2, 1.0 / 6.0);

    let mut r3 = alpha_row(2);
    r3.add_scaled(&d4_i1, -1.0);
    r3.add_scaled(&builder.d2(i2), 2.0 / (h * h));
    r3.add_scaled(&builder.d2(i1), -4.0 / (h * h));
    r3.add_scaled(&d3_i2, -s / (2.0 * h));

    Ok([r1, r2, r3])
}

/// Closure equations over the global unknown layout.
pub fn emit_closure_rows(coeffs: &CoefficientSet, grid: &Grid, bc: &BoundaryValues, side: Side) -> Result<[StencilRow; 3]> {
    let layout = UnknownLayout::new(grid.n());
    let [r1, r2, r3] = closure_forms(coeffs, grid, bc, side)?;
    Ok([r1.to_row(&layout), r2.to_row(&layout), r3.to_row(&layout)])
}
