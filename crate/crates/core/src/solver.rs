//! Assembly and solution of the coupled system.
//!
//! Unknowns follow [`UnknownLayout`]: interior `u`, interior Hermitian
//! derivative `p`, then the six closure values. Rows are the scheme at each
//! interior node, the Simpson relation `sigma(p) = delta1(u)` at each interior
//! node, and the three closure equations at each end.
//!
//! Rows mix entries of order `1/h^4` with entries of order one, so the matrix
//! is row- and column-equilibrated before factorization; without this the
//! problem-1 system at `n = 128` is roundoff-limited.

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::calculus::{delta3, delta4, hermitian_derivative, tilde_delta2, EndpointPair};
use crate::closure::{close_boundary, closure_forms, BoundaryTriple, Side};
use crate::error::{Error, Result};
use crate::grid::{sample, GridFunction};
use crate::problem::ProblemSpec;
use crate::stencil::{StencilBuilder, StencilRow, UnknownLayout};

/// Reciprocal condition numbers below this are reported as singular.
pub const RCOND_MIN: f64 = 1e-14;

/// Relative tolerance of the post-solve self-consistency checks.
pub const CONSISTENCY_TOL: f64 = 1e-9;

/// Largest system size the dense backend accepts (`n <= 512`).
pub const DENSE_MAX_DIM: usize = 2 * 511 + 6;

/// Square sparse system `M z = rhs` in triplet form.
#[derive(Debug, Clone, Serialize)]
pub struct SparseSystem {
    pub dim: usize,
    pub entries: Vec<(usize, usize, f64)>,
    pub rhs: Vec<f64>,
}

impl SparseSystem {
    /// Builds the system `row.eval(z) = 0` for each row.
    pub fn from_rows(rows: &[StencilRow]) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::new();
        let mut rhs = Vec::with_capacity(dim);
        for (i, row) in rows.iter().enumerate() {
            if row.coefficients.is_empty() {
                return Err(Error::Assembly(format!("row {i} has no entries")));
            }
            for (&j, &w) in &row.coefficients {
                if j >= dim {
                    return Err(Error::Assembly(format!("row {i} references column {j} >= {dim}")));
                }
                if !w.is_finite() {
                    return Err(Error::Assembly(format!("row {i} has a non-finite weight")));
                }
                entries.push((i, j, w));
            }
            if !row.rhs_shift.is_finite() {
                return Err(Error::Assembly(format!("row {i} has a non-finite right-hand side")));
            }
            rhs.push(-row.rhs_shift);
        }
        Ok(SparseSystem { dim, entries, rhs })
    }

    pub fn matvec(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for &(i, j, w) in &self.entries {
            out[i] += w * z[j];
        }
        out
    }

    /// `rhs - M z`.
    pub fn residual(&self, z: &[f64]) -> Vec<f64> {
        let mz = self.matvec(z);
        self.rhs.iter().zip(mz).map(|(b, m)| b - m).collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for &(i, j, w) in &self.entries {
            m[(i, j)] += w;
        }
        m
    }

    /// Row scaling, then column scaling, each by the reciprocal max-abs entry.
    fn equilibration(&self) -> (Vec<f64>, Vec<f64>) {
        let mut r = vec![0.0f64; self.dim];
        for &(i, _, w) in &self.entries {
            r[i] = r[i].max(w.abs());
        }
        let r: Vec<f64> = r.into_iter().map(|m| if m > 0.0 { 1.0 / m } else { 1.0 }).collect();
        let mut c = vec![0.0f64; self.dim];
        for &(i, j, w) in &self.entries {
            c[j] = c[j].max((r[i] * w).abs());
        }
        let c = c.into_iter().map(|m| if m > 0.0 { 1.0 / m } else { 1.0 }).collect();
        (r, c)
    }
}

/// Linear-system backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    #[default]
    Sparse,
    /// Dense LU, kept as an independent cross-check for small systems.
    Dense,
}

/// Solution vector of a [`SparseSystem`].
#[derive(Debug, Clone, Serialize)]
pub struct LinearSolution {
    pub z: Vec<f64>,
    /// Estimated reciprocal 1-norm condition number of the equilibrated matrix.
    pub rcond: f64,
    /// `max |rhs - M z| / max |rhs|` after refinement.
    pub relative_residual: f64,
}

/// Assembles the coupled system for `spec`.
pub fn assemble(spec: &ProblemSpec) -> Result<SparseSystem> {
    let grid = spec.grid;
    let n = grid.n();
    if n < crate::closure::MIN_CLOSURE_CELLS {
        return Err(Error::InvalidGrid(format!("need at least {} cells, got {n}", crate::closure::MIN_CLOSURE_CELLS)));
    }
    if !spec.boundary.is_finite() {
        return Err(Error::Assembly("boundary data is not finite".into()));
    }
    let layout = UnknownLayout::new(n);
    let builder = StencilBuilder::new(grid, spec.boundary);
    let mut rows = Vec::with_capacity(layout.len());

    for j in grid.interior() {
        let x = grid.x(j);
        let c = spec.coeffs.at(x).map_err(|e| Error::Assembly(e.to_string()))?;
        let mut form = builder.d4(j);
        form.add_scaled(&builder.d3(j), c.d);
        form.add_scaled(&builder.d2(j), c.a);
        form.add_scaled(&builder.p(j), c.a_prime + c.h);
        form.add_scaled(&builder.u(j), c.b);
        form.add_constant(-c.f);
        rows.push(form.to_row(&layout));
    }
    for j in grid.interior() {
        rows.push(builder.simpson(j).to_row(&layout));
    }
    for side in Side::BOTH {
        let forms = closure_forms(&spec.coeffs, &grid, &spec.boundary, side).map_err(|e| match e {
            Error::Evaluation { x } => Error::Assembly(format!("coefficient evaluation failed at x = {x}")),
            e => e,
        })?;
        rows.extend(forms.iter().map(|f| f.to_row(&layout)));
    }
    SparseSystem::from_rows(&rows)
}

trait Factored {
    fn solve(&self, b: &mut [f64]);
    fn solve_transpose(&self, b: &mut [f64]);
}

struct SparseLu(faer::sparse::linalg::solvers::Lu<usize, f64>);

impl Factored for SparseLu {
    fn solve(&self, b: &mut [f64]) {
        let mut m = Mat::<f64>::from_fn(b.len(), 1, |i, _| b[i]);
        self.0.solve_in_place(m.as_mut());
        for (i, v) in b.iter_mut().enumerate() {
            *v = m[(i, 0)];
        }
    }

    fn solve_transpose(&self, b: &mut [f64]) {
        let mut m = Mat::<f64>::from_fn(b.len(), 1, |i, _| b[i]);
        self.0.solve_transpose_in_place(m.as_mut());
        for (i, v) in b.iter_mut().enumerate() {
            *v = m[(i, 0)];
        }
    }
}

struct DenseLu {
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    lu_t: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl Factored for DenseLu {
    fn solve(&self, b: &mut [f64]) {
        let mut v = nalgebra::DVector::from_column_slice(b);
        self.lu.solve_mut(&mut v);
        b.copy_from_slice(v.as_slice());
    }

    fn solve_transpose(&self, b: &mut [f64]) {
        let mut v = nalgebra::DVector::from_column_slice(b);
        self.lu_t.solve_mut(&mut v);
        b.copy_from_slice(v.as_slice());
    }
}

/// Hager/Higham estimate of `|B^{-1}|_1`.
fn inverse_norm1_estimate(f: &dyn Factored, dim: usize) -> f64 {
    let norm1 = |v: &[f64]| v.iter().map(|x| x.abs()).sum::<f64>();
    let mut x = vec![1.0 / dim as f64; dim];
    let mut est = 0.0;
    let mut last_j = usize::MAX;
    for _ in 0..5 {
        let mut y = x.clone();
        f.solve(&mut y);
        est = norm1(&y);
        let mut z: Vec<f64> = y.iter().map(|v| if *v >= 0.0 { 1.0 } else { -1.0 }).collect();
        f.solve_transpose(&mut z);
        let (j, zmax) = z.iter().enumerate().fold((0, 0.0f64), |(bj, bm), (i, v)| if v.abs() > bm { (i, v.abs()) } else { (bj, bm) });
        let ztx: f64 = z.iter().zip(&x).map(|(a, b)| a * b).sum();
        if zmax <= ztx || j == last_j {
            break;
        }
        last_j = j;
        x = vec![0.0; dim];
        x[j] = 1.0;
    }
    // alternating test vector guards against the estimator's known blind spots
    let mut v: Vec<f64> = (0..dim)
        .map(|i| {
            let s = if i % 2 == 0 { 1.0 } else { -1.0 };
            s * (1.0 + i as f64 / (dim.max(2) - 1) as f64)
        })
        .collect();
    f.solve(&mut v);
    est.max(2.0 * norm1(&v) / (3.0 * dim as f64))
}

/// Solves `M z = rhs` with equilibration, one step of iterative refinement and a
/// condition estimate. Reports [`Error::SingularSystem`] on factorization
/// breakdown or when the reciprocal condition is below [`RCOND_MIN`].
pub fn solve(system: &SparseSystem) -> Result<LinearSolution> {
    solve_with(system, Backend::Sparse)
}

pub fn solve_with(system: &SparseSystem, backend: Backend) -> Result<LinearSolution> {
    let dim = system.dim;
    let (r, c) = system.equilibration();
    let scaled: Vec<(usize, usize, f64)> = system.entries.iter().map(|&(i, j, w)| (i, j, r[i] * w * c[j])).collect();

    let mut col_sums = vec![0.0; dim];
    for &(_, j, w) in &scaled {
        col_sums[j] += w.abs();
    }
    let norm1 = col_sums.iter().cloned().fold(0.0, f64::max);

    let factored: Box<dyn Factored> = match backend {
        Backend::Sparse => {
            let triplets: Vec<_> = scaled.iter().map(|&(i, j, w)| Triplet::new(i, j, w)).collect();
            let m = SparseColMat::<usize, f64>::try_new_from_triplets(dim, dim, &triplets)
                .map_err(|e| Error::Assembly(format!("{e:?}")))?;
            let lu = m.sp_lu().map_err(|e| Error::SingularSystem { reason: format!("sparse LU failed: {e:?}") })?;
            Box::new(SparseLu(lu))
        }
        Backend::Dense => {
            if dim > DENSE_MAX_DIM {
                return Err(Error::Assembly(format!("dense backend limited to {DENSE_MAX_DIM} unknowns, got {dim}")));
            }
            let mut m = DMatrix::zeros(dim, dim);
            for &(i, j, w) in &scaled {
                m[(i, j)] += w;
            }
            let lu_t = m.transpose().lu();
            let lu = m.lu();
            if !lu.is_invertible() {
                return Err(Error::SingularSystem { reason: "dense LU found an exactly zero pivot".into() });
            }
            Box::new(DenseLu { lu, lu_t })
        }
    };

    let solve_scaled = |b: &[f64]| -> Vec<f64> {
        let mut y: Vec<f64> = b.iter().zip(&r).map(|(v, s)| v * s).collect();
        factored.solve(&mut y);
        y.iter().zip(&c).map(|(v, s)| v * s).collect()
    };

    let mut z = solve_scaled(&system.rhs);
    let res = system.residual(&z);
    let dz = solve_scaled(&res);
    for (zi, d) in z.iter_mut().zip(dz) {
        *zi += d;
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem { reason: "factorization produced non-finite values".into() });
    }

    let inv_norm = inverse_norm1_estimate(factored.as_ref(), dim);
    let rcond = if inv_norm.is_finite() && inv_norm > 0.0 { 1.0 / (norm1 * inv_norm) } else { 0.0 };
    if !(rcond >= RCOND_MIN) {
        return Err(Error::SingularSystem { reason: format!("reciprocal condition estimate {rcond:e} < {RCOND_MIN:e}") });
    }

    let scale = system.rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let res_max = system.residual(&z).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let relative_residual = if scale > 0.0 { res_max / scale } else { res_max };
    Ok(LinearSolution { z, rcond, relative_residual })
}

/// Grid functions recovered from a solve, with closure values in slots `0` and `n`.
#[derive(Debug, Clone)]
pub struct DiscreteSolution {
    pub u: GridFunction,
    pub p: GridFunction,
    pub d2: GridFunction,
    pub d3: GridFunction,
    pub d4: GridFunction,
    pub left: BoundaryTriple,
    pub right: BoundaryTriple,
    pub rcond: f64,
}

impl DiscreteSolution {
    /// Field by derivative order: `0 -> u`, `1 -> p`, ..., `4 -> d4`.
    pub fn field(&self, k: usize) -> &GridFunction {
        match k {
            0 => &self.u,
            1 => &self.p,
            2 => &self.d2,
            3 => &self.d3,
            4 => &self.d4,
            _ => panic!("field order {k} > 4"),
        }
    }
}

fn relative_deviation(a: &[f64], b: &[f64], scale: f64) -> f64 {
    let diff = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Assembles, solves and unpacks `spec`, then checks self-consistency.
pub fn solve_bvp(spec: &ProblemSpec) -> Result<DiscreteSolution> {
    solve_bvp_with(spec, Backend::Sparse)
}

pub fn solve_bvp_with(spec: &ProblemSpec, backend: Backend) -> Result<DiscreteSolution> {
    let system = assemble(spec)?;
    let sol = solve_with(&system, backend)?;
    let grid = spec.grid;
    let layout = UnknownLayout::new(grid.n());
    let (u, p, left, right) = layout.unpack(&grid, &sol.z, &spec.boundary)?;

    let d2 = tilde_delta2(&u, &p, EndpointPair::new(left.d2, right.d2))?;
    let d3 = delta3(&p, &d2, EndpointPair::new(left.d3, right.d3))?;
    let d4 = delta4(&u, &p, EndpointPair::new(left.d4, right.d4))?;

    // p must be the Hermitian derivative of u
    let p_check = hermitian_derivative(&u, EndpointPair::new(spec.boundary.du_left, spec.boundary.du_right))?;
    let dev = relative_deviation(p.values(), p_check.values(), sup(p.values()));
    if !(dev <= CONSISTENCY_TOL) {
        return Err(Error::Inconsistent { what: "Hermitian derivative".into(), deviation: dev });
    }

    // closure unknowns must solve the endpoint systems for the computed (u, p)
    let f = sample(|x| (spec.coeffs.f)(x), &grid)?;
    for (side, triple) in [(Side::Left, left), (Side::Right, right)] {
        let e = if side == Side::Left { 0 } else { grid.n() };
        let check = close_boundary(&u, &p, &spec.coeffs, f[e], side)?;
        for (k, field) in [&d2, &d3, &d4].into_iter().enumerate() {
            let scale = sup(field.values());
            let dev = relative_deviation(&[triple.to_array()[k]], &[check.to_array()[k]], scale);
            if !(dev <= CONSISTENCY_TOL) {
                return Err(Error::Inconsistent { what: format!("{side} closure d{}", k + 2), deviation: dev });
            }
        }
    }

    Ok(DiscreteSolution { u, p, d2, d3, d4, left, right, rcond: sol.rcond })
}
