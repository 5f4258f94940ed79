//! Linear-form view of the difference operators.
//!
//! Every operator value at a node is an affine function of the global
//! unknowns: interior `u_j`, interior Hermitian derivative `p_j`, and the six
//! closed boundary values. [`StencilBuilder`] expands the same formulas used in
//! [`crate::calculus`] symbolically, so assembled rows reproduce direct
//! application exactly.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::closure::{BoundaryTriple, Side};
use crate::error::Result;
use crate::grid::{Grid, GridFunction};

/// Known Dirichlet data: `u` and `u'` at both endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct BoundaryValues {
    pub u_left: f64,
    pub du_left: f64,
    pub u_right: f64,
    pub du_right: f64,
}

impl BoundaryValues {
    pub fn homogeneous() -> Self {
        BoundaryValues::default()
    }

    pub fn is_finite(&self) -> bool {
        [self.u_left, self.du_left, self.u_right, self.du_right].iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ClosureSlot {
    D2,
    D3,
    D4,
}

impl ClosureSlot {
    pub const ALL: [ClosureSlot; 3] = [ClosureSlot::D2, ClosureSlot::D3, ClosureSlot::D4];

    fn offset(self) -> usize {
        match self {
            ClosureSlot::D2 => 0,
            ClosureSlot::D3 => 1,
            ClosureSlot::D4 => 2,
        }
    }
}

/// A scalar unknown of the coupled system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Unknown {
    U(usize),
    P(usize),
    Closure(Side, ClosureSlot),
}

/// Index map for the coupled unknowns.
///
/// `u_1..u_{n-1}` occupy `0..n-1`, `p_1..p_{n-1}` occupy `n-1..2n-2`, then the
/// left triple `(d2, d3, d4)` and the right triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnknownLayout {
    n: usize,
}

impl UnknownLayout {
    pub fn new(n: usize) -> Self {
        UnknownLayout { n }
    }

    pub fn len(&self) -> usize {
        2 * (self.n - 1) + 6
    }

    pub fn index(&self, unknown: Unknown) -> usize {
        let n = self.n;
        match unknown {
            Unknown::U(j) => {
                debug_assert!(j >= 1 && j < n);
                j - 1
            }
            Unknown::P(j) => {
                debug_assert!(j >= 1 && j < n);
                n - 1 + j - 1
            }
            Unknown::Closure(Side::Left, slot) => 2 * n - 2 + slot.offset(),
            Unknown::Closure(Side::Right, slot) => 2 * n + 1 + slot.offset(),
        }
    }

    pub fn unknown(&self, index: usize) -> Unknown {
        let n = self.n;
        assert!(index < self.len());
        if index < n - 1 {
            Unknown::U(index + 1)
        } else if index < 2 * n - 2 {
            Unknown::P(index - (n - 1) + 1)
        } else {
            let k = index - (2 * n - 2);
            let side = if k < 3 { Side::Left } else { Side::Right };
            Unknown::Closure(side, ClosureSlot::ALL[k % 3])
        }
    }

    /// Flattens interior values of `u`, `p` and the two triples into a vector.
    pub fn pack(&self, u: &GridFunction, p: &GridFunction, left: &BoundaryTriple, right: &BoundaryTriple) -> Vec<f64> {
        let n = self.n;
        let mut z = Vec::with_capacity(self.len());
        z.extend_from_slice(&u.values()[1..n]);
        z.extend_from_slice(&p.values()[1..n]);
        z.extend_from_slice(&left.to_array());
        z.extend_from_slice(&right.to_array());
        z
    }

    /// Inverse of [`pack`](Self::pack), filling endpoint values of `u` and `p` from `bc`.
    pub fn unpack(
        &self,
        grid: &Grid,
        z: &[f64],
        bc: &BoundaryValues,
    ) -> Result<(GridFunction, GridFunction, BoundaryTriple, BoundaryTriple)> {
        let n = self.n;
        assert_eq!(z.len(), self.len());
        let mut u = Vec::with_capacity(n + 1);
        u.push(bc.u_left);
        u.extend_from_slice(&z[..n - 1]);
        u.push(bc.u_right);
        let mut p = Vec::with_capacity(n + 1);
        p.push(bc.du_left);
        p.extend_from_slice(&z[n - 1..2 * n - 2]);
        p.push(bc.du_right);
        let c = &z[2 * n - 2..];
        Ok((
            GridFunction::new(*grid, u)?,
            GridFunction::new(*grid, p)?,
            BoundaryTriple::new(c[0], c[1], c[2]),
            BoundaryTriple::new(c[3], c[4], c[5]),
        ))
    }
}

/// Affine form `sum_k w_k z_k + constant` over [`Unknown`]s.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearForm {
    terms: BTreeMap<Unknown, f64>,
    constant: f64,
}

impl LinearForm {
    pub fn constant(c: f64) -> Self {
        LinearForm { terms: BTreeMap::new(), constant: c }
    }

    pub fn var(unknown: Unknown) -> Self {
        LinearForm { terms: BTreeMap::from([(unknown, 1.0)]), constant: 0.0 }
    }

    pub fn terms(&self) -> &BTreeMap<Unknown, f64> {
        &self.terms
    }

    pub fn constant_term(&self) -> f64 {
        self.constant
    }

    pub fn weight(&self, unknown: Unknown) -> f64 {
        self.terms.get(&unknown).copied().unwrap_or(0.0)
    }

    /// `self += s * other`
    pub fn add_scaled(&mut self, other: &LinearForm, s: f64) {
        for (&k, &w) in &other.terms {
            *self.terms.entry(k).or_insert(0.0) += s * w;
        }
        self.constant += s * other.constant;
    }

    pub fn add_constant(&mut self, c: f64) {
        self.constant += c;
    }

    /// `sum_i s_i * forms_i`
    pub fn combine(parts: &[(f64, &LinearForm)]) -> LinearForm {
        let mut out = LinearForm::default();
        for (s, f) in parts {
            out.add_scaled(f, *s);
        }
        out
    }

    pub fn eval(&self, value: impl Fn(Unknown) -> f64) -> f64 {
        self.terms.iter().map(|(&k, &w)| w * value(k)).sum::<f64>() + self.constant
    }

    pub fn to_row(&self, layout: &UnknownLayout) -> StencilRow {
        let coefficients = self
            .terms
            .iter()
            .filter(|(_, &w)| w != 0.0)
            .map(|(&k, &w)| (layout.index(k), w))
            .collect();
        StencilRow { coefficients, rhs_shift: self.constant }
    }
}

/// One row of the coupled system in affine form: value = `sum w_k z_k + rhs_shift`.
///
/// `rhs_shift` collects everything that does not depend on an unknown (known
/// boundary data, sampled right-hand sides). The equation imposed by a row is
/// `value = 0`, so the system right-hand side is `-rhs_shift`.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct StencilRow {
    pub coefficients: BTreeMap<usize, f64>,
    pub rhs_shift: f64,
}

impl StencilRow {
    pub fn eval(&self, z: &[f64]) -> f64 {
        self.coefficients.iter().map(|(&k, &w)| w * z[k]).sum::<f64>() + self.rhs_shift
    }

    pub fn weight(&self, index: usize) -> f64 {
        self.coefficients.get(&index).copied().unwrap_or(0.0)
    }
}

/// Which grid function an interior-only operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operand {
    U,
    P,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operator {
    Sigma(Operand),
    Delta1(Operand),
    Delta2(Operand),
    /// `sigma(p) - delta1(u)`, the row defining the Hermitian derivative.
    Simpson,
    TildeDelta2,
    Delta3,
    Delta4,
}

/// Builds operator values at a node as [`LinearForm`]s.
#[derive(Debug, Clone, Copy)]
pub struct StencilBuilder {
    grid: Grid,
    bc: BoundaryValues,
}

impl StencilBuilder {
    pub fn new(grid: Grid, bc: BoundaryValues) -> Self {
        StencilBuilder { grid, bc }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn u(&self, j: usize) -> LinearForm {
        match j {
            0 => LinearForm::constant(self.bc.u_left),
            j if j == self.grid.n() => LinearForm::constant(self.bc.u_right),
            j => LinearForm::var(Unknown::U(j)),
        }
    }

    pub fn p(&self, j: usize) -> LinearForm {
        match j {
            0 => LinearForm::constant(self.bc.du_left),
            j if j == self.grid.n() => LinearForm::constant(self.bc.du_right),
            j => LinearForm::var(Unknown::P(j)),
        }
    }

    fn operand(&self, which: Operand, j: usize) -> LinearForm {
        match which {
            Operand::U => self.u(j),
            Operand::P => self.p(j),
        }
    }

    fn sigma_of(&self, f: impl Fn(usize) -> LinearForm, j: usize) -> LinearForm {
        LinearForm::combine(&[(1.0 / 6.0, &f(j - 1)), (2.0 / 3.0, &f(j)), (1.0 / 6.0, &f(j + 1))])
    }

    fn delta1_of(&self, f: impl Fn(usize) -> LinearForm, j: usize) -> LinearForm {
        let s = 1.0 / (2.0 * self.grid.h());
        LinearForm::combine(&[(s, &f(j + 1)), (-s, &f(j - 1))])
    }

    fn delta2_of(&self, f: impl Fn(usize) -> LinearForm, j: usize) -> LinearForm {
        let s = 1.0 / (self.grid.h() * self.grid.h());
        LinearForm::combine(&[(s, &f(j + 1)), (-2.0 * s, &f(j)), (s, &f(j - 1))])
    }

    fn closure_or(&self, j: usize, slot: ClosureSlot, interior: impl Fn() -> LinearForm) -> LinearForm {
        match j {
            0 => LinearForm::var(Unknown::Closure(Side::Left, slot)),
            j if j == self.grid.n() => LinearForm::var(Unknown::Closure(Side::Right, slot)),
            _ => interior(),
        }
    }

    pub fn simpson(&self, j: usize) -> LinearForm {
        let sp = self.sigma_of(|k| self.p(k), j);
        let du = self.delta1_of(|k| self.u(k), j);
        LinearForm::combine(&[(1.0, &sp), (-1.0, &du)])
    }

    pub fn d2(&self, j: usize) -> LinearForm {
        self.closure_or(j, ClosureSlot::D2, || {
            let ddu = self.delta2_of(|k| self.u(k), j);
            let dp = self.delta1_of(|k| self.p(k), j);
            LinearForm::combine(&[(2.0, &ddu), (-1.0, &dp)])
        })
    }

    pub fn d3(&self, j: usize) -> LinearForm {
        self.closure_or(j, ClosureSlot::D3, || {
            let ddp = self.delta2_of(|k| self.p(k), j);
            let dd2 = self.delta1_of(|k| self.d2(k), j);
            LinearForm::combine(&[(2.0, &ddp), (-1.0, &dd2)])
        })
    }

    pub fn d4(&self, j: usize) -> LinearForm {
        self.closure_or(j, ClosureSlot::D4, || {
            let h2 = self.grid.h() * self.grid.h();
            let dp = self.delta1_of(|k| self.p(k), j);
            let ddu = self.delta2_of(|k| self.u(k), j);
            LinearForm::combine(&[(12.0 / h2, &dp), (-12.0 / h2, &ddu)])
        })
    }

    /// Value of `op` at interior node `j`.
    pub fn apply(&self, op: Operator, j: usize) -> LinearForm {
        match op {
            Operator::Sigma(w) => self.sigma_of(|k| self.operand(w, k), j),
            Operator::Delta1(w) => self.delta1_of(|k| self.operand(w, k), j),
            Operator::Delta2(w) => self.delta2_of(|k| self.operand(w, k), j),
            Operator::Simpson => self.simpson(j),
            Operator::TildeDelta2 => self.d2(j),
            Operator::Delta3 => self.d3(j),
            Operator::Delta4 => self.d4(j),
        }
    }
}

/// Rows of `op` at the interior nodes `j = 1..n`, over the layout of [`UnknownLayout`].
pub fn emit_stencils(grid: &Grid, op: Operator, bc: &BoundaryValues) -> Vec<StencilRow> {
    let builder = StencilBuilder::new(*grid, *bc);
    let layout = UnknownLayout::new(grid.n());
    grid.interior().map(|j| builder.apply(op, j).to_row(&layout)).collect()
}
