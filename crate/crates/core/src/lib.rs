//! Compact fourth-order finite differences for two-point boundary value
//! problems `u'''' + D u''' + A u'' + (A' + H) u' + B u = f` with clamped ends.
//!
//! Start from [`problem::Problem`] or [`problem::ProblemSpec`], call
//! [`solver::solve_bvp`], and compare against exact solutions with
//! [`convergence`].

pub mod calculus;
pub mod closure;
pub mod convergence;
pub mod error;
pub mod grid;
pub mod problem;
pub mod solver;
pub mod stencil;
pub mod tridiag;

pub use closure::{BoundaryTriple, Side};
pub use error::{Error, Result};
pub use grid::{sample, Grid, GridFunction, NormSpan};
pub use problem::{CoefficientSet, ExactSolution, Problem, ProblemSpec};
pub use solver::{solve_bvp, DiscreteSolution};
pub use stencil::BoundaryValues;
