//! Truncation and accuracy studies, convergence rates and pointwise slopes.
//!
//! Truncation errors apply the difference operators to samples of the exact
//! solution; accuracy errors compare a computed solution with those samples.
//! Truncation tables are normed over interior nodes `j = 1..n` (the endpoint
//! slots hold closure values, whose orders are reported pointwise instead);
//! accuracy tables are normed over all nodes.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::calculus::{delta3, delta4, hermitian_derivative, tilde_delta2, EndpointPair};
use crate::closure::{close_boundary, Side};
use crate::error::{Error, Result};
use crate::grid::{sample, Grid, GridFunction, NormSpan};
use crate::problem::Problem;
use crate::solver::solve_bvp;

/// Errors at or below this are treated as exact: no rate is defined.
pub const EXACT_THRESHOLD: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    U,
    D1,
    D2,
    D3,
    D4,
}

impl Field {
    pub const ALL: [Field; 5] = [Field::U, Field::D1, Field::D2, Field::D3, Field::D4];
    pub const DERIVATIVES: [Field; 4] = [Field::D1, Field::D2, Field::D3, Field::D4];

    pub fn order(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Field::U => "u",
            Field::D1 => "d1",
            Field::D2 => "d2",
            Field::D3 => "d3",
            Field::D4 => "d4",
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    Truncation,
    Accuracy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorRecord {
    pub n: usize,
    pub field: Field,
    pub norm_h: f64,
    pub norm_sup: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateRecord {
    pub n1: usize,
    pub n2: usize,
    pub field: Field,
    pub rate_h: Option<f64>,
    pub rate_sup: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointwiseRate {
    pub n_coarse: usize,
    pub n_fine: usize,
    /// Coarse-grid node index.
    pub j: usize,
    pub x: f64,
    pub field: Field,
    /// `None` where either pointwise error is exact.
    pub slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub problem: String,
    pub kind: StudyKind,
    pub span: NormSpan,
    pub records: Vec<ErrorRecord>,
    pub rates: Vec<RateRecord>,
    pub pointwise: Vec<PointwiseRate>,
}

impl ConvergenceReport {
    pub fn error(&self, field: Field, n: usize) -> Option<&ErrorRecord> {
        self.records.iter().find(|r| r.field == field && r.n == n)
    }

    pub fn rate(&self, field: Field, n1: usize, n2: usize) -> Option<&RateRecord> {
        self.rates.iter().find(|r| r.field == field && r.n1 == n1 && r.n2 == n2)
    }

    pub fn ns(&self) -> Vec<usize> {
        let mut ns: Vec<usize> = self.records.iter().map(|r| r.n).collect();
        ns.dedup();
        ns
    }
}

/// `log(e1 / e2) / log(n2 / n1)`; `None` when either error is at or below
/// [`EXACT_THRESHOLD`] or the mesh pair is not increasing.
pub fn rate(e1: f64, e2: f64, n1: usize, n2: usize) -> Option<f64> {
    if n2 <= n1 || !(e1 > EXACT_THRESHOLD) || !(e2 > EXACT_THRESHOLD) {
        return None;
    }
    Some((e1 / e2).ln() / (n2 as f64 / n1 as f64).ln())
}

/// Pointwise absolute errors of all five fields on one grid.
#[derive(Debug, Clone)]
pub struct FieldErrors {
    pub grid: Grid,
    pub errors: [GridFunction; 5],
}

impl FieldErrors {
    pub fn get(&self, field: Field) -> &GridFunction {
        &self.errors[field.order()]
    }

    fn records(&self, fields: &[Field], span: NormSpan) -> Vec<ErrorRecord> {
        fields
            .iter()
            .map(|&field| {
                let e = self.get(field);
                ErrorRecord { n: self.grid.n(), field, norm_h: e.norm_h_over(span), norm_sup: e.norm_sup_over(span) }
            })
            .collect()
    }
}

fn validate_ns(ns: &[usize]) -> Result<()> {
    if ns.is_empty() {
        return Err(Error::InvalidMeshes("empty mesh list".into()));
    }
    if let Some(&n) = ns.iter().find(|&&n| n < crate::closure::MIN_CLOSURE_CELLS) {
        return Err(Error::InvalidMeshes(format!("mesh {n} has fewer than {} cells", crate::closure::MIN_CLOSURE_CELLS)));
    }
    if ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidMeshes(format!("meshes must be strictly ascending, got {ns:?}")));
    }
    Ok(())
}

fn exact_samples(problem: &Problem, grid: &Grid) -> Result<[GridFunction; 5]> {
    let s = |k: usize| sample(|x| problem.exact.derivative(k)(x), grid);
    Ok([s(0)?, s(1)?, s(2)?, s(3)?, s(4)?])
}

fn abs_errors(computed: [&GridFunction; 5], exact: &[GridFunction; 5]) -> Result<[GridFunction; 5]> {
    let e = |k: usize| computed[k].sub(&exact[k]).map(|d| d.abs());
    Ok([e(0)?, e(1)?, e(2)?, e(3)?, e(4)?])
}

/// Operators applied to exact samples, endpoint slots filled by the closure
/// solved on those samples with the exact right-hand side.
pub fn truncation_errors(problem: &Problem, n: usize) -> Result<FieldErrors> {
    let grid = problem.grid(n)?;
    let exact = exact_samples(problem, &grid)?;
    let u = &exact[0];
    let bc = problem.boundary();
    let p = hermitian_derivative(u, EndpointPair::new(bc.du_left, bc.du_right))?;
    let f = |x: f64| (problem.coeffs.f)(x);
    let left = close_boundary(u, &p, &problem.coeffs, f(grid.a()), Side::Left)?;
    let right = close_boundary(u, &p, &problem.coeffs, f(grid.b()), Side::Right)?;
    let d2 = tilde_delta2(u, &p, EndpointPair::new(left.d2, right.d2))?;
    let d3 = delta3(&p, &d2, EndpointPair::new(left.d3, right.d3))?;
    let d4 = delta4(u, &p, EndpointPair::new(left.d4, right.d4))?;
    Ok(FieldErrors { grid, errors: abs_errors([u, &p, &d2, &d3, &d4], &exact)? })
}

/// Computed solution against exact samples.
pub fn accuracy_errors(problem: &Problem, n: usize) -> Result<FieldErrors> {
    let spec = problem.spec(n)?;
    let sol = solve_bvp(&spec)?;
    let exact = exact_samples(problem, &spec.grid)?;
    Ok(FieldErrors { grid: spec.grid, errors: abs_errors([&sol.u, &sol.p, &sol.d2, &sol.d3, &sol.d4], &exact)? })
}

fn rate_records(records: &[ErrorRecord], ns: &[usize], fields: &[Field]) -> Vec<RateRecord> {
    let mut out = Vec::new();
    for w in ns.windows(2) {
        for &field in fields {
            let find = |n| records.iter().find(|r| r.n == n && r.field == field).expect("record exists");
            let (a, b) = (find(w[0]), find(w[1]));
            out.push(RateRecord {
                n1: w[0],
                n2: w[1],
                field,
                rate_h: rate(a.norm_h, b.norm_h, w[0], w[1]),
                rate_sup: rate(a.norm_sup, b.norm_sup, w[0], w[1]),
            });
        }
    }
    out
}

fn study(
    problem: &Problem,
    ns: &[usize],
    kind: StudyKind,
    errors: impl Fn(&Problem, usize) -> Result<FieldErrors> + Sync,
) -> Result<(ConvergenceReport, Vec<FieldErrors>)> {
    validate_ns(ns)?;
    let (fields, span): (&[Field], NormSpan) = match kind {
        StudyKind::Truncation => (&Field::DERIVATIVES, NormSpan::Interior),
        StudyKind::Accuracy => (&Field::ALL, NormSpan::Full),
    };
    // independent per mesh; collect preserves mesh order
    let per_n: Vec<FieldErrors> = ns.par_iter().map(|&n| errors(problem, n)).collect::<Result<_>>()?;
    let records: Vec<ErrorRecord> = per_n.iter().flat_map(|e| e.records(fields, span)).collect();
    let rates = rate_records(&records, ns, fields);
    let report = ConvergenceReport { problem: problem.name.clone(), kind, span, records, rates, pointwise: Vec::new() };
    Ok((report, per_n))
}

pub fn truncation_study(problem: &Problem, ns: &[usize]) -> Result<ConvergenceReport> {
    study(problem, ns, StudyKind::Truncation, truncation_errors).map(|(r, _)| r)
}

pub fn accuracy_study(problem: &Problem, ns: &[usize]) -> Result<ConvergenceReport> {
    study(problem, ns, StudyKind::Accuracy, accuracy_errors).map(|(r, _)| r)
}

/// Truncation study plus pointwise slopes for every consecutive doubling in `ns`.
pub fn truncation_study_with_pointwise(problem: &Problem, ns: &[usize]) -> Result<ConvergenceReport> {
    let (mut report, per_n) = study(problem, ns, StudyKind::Truncation, truncation_errors)?;
    for w in per_n.windows(2) {
        if w[0].grid.is_refined_by(&w[1].grid) {
            report.pointwise.extend(pointwise_rates(&w[0], &w[1], Pairing::StencilRole)?);
        }
    }
    Ok(report)
}

/// How coarse nodes are matched to fine nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    /// Coarse `j` against fine `2j`: the same abscissa.
    Nested,
    /// As `Nested`, except the first and last interior nodes are matched with
    /// the first and last interior nodes of the fine grid, so that both errors
    /// come from the same one-sided stencil role next to the boundary.
    StencilRole,
}

/// Per-node slopes `log2(e_coarse / e_fine)` for all five fields.
pub fn pointwise_rates(coarse: &FieldErrors, fine: &FieldErrors, pairing: Pairing) -> Result<Vec<PointwiseRate>> {
    if !coarse.grid.is_refined_by(&fine.grid) {
        return Err(Error::InvalidMeshes(format!(
            "fine grid with {} cells does not refine the coarse grid with {} cells",
            fine.grid.n(),
            coarse.grid.n()
        )));
    }
    let (nc, nf) = (coarse.grid.n(), fine.grid.n());
    let fine_index = |j: usize| match pairing {
        Pairing::StencilRole if j == 1 => 1,
        Pairing::StencilRole if j == nc - 1 => nf - 1,
        _ => 2 * j,
    };
    let mut out = Vec::with_capacity(5 * (nc + 1));
    for field in Field::ALL {
        let (ec, ef) = (coarse.get(field), fine.get(field));
        for j in 0..=nc {
            out.push(PointwiseRate {
                n_coarse: nc,
                n_fine: nf,
                j,
                x: coarse.grid.x(j),
                field,
                slope: rate(ec[j], ef[fine_index(j)], nc, nf),
            });
        }
    }
    Ok(out)
}

/// Number of cells next to each end where the boundary closure still
/// contaminates pointwise errors at the level of the interior error.
///
/// Closure errors decay into the interior like `(2 - sqrt 3)^j` (the root of
/// the Simpson recurrence), and are larger than interior errors by at most
/// `O(h^-3)`; the width is where that factor has decayed away.
pub fn boundary_layer_width(n: usize) -> usize {
    let decay = (2.0 + 3f64.sqrt()).ln();
    (3.0 * (n as f64).ln() / decay).ceil() as usize + 1
}
