//! Coefficient sets, exact solutions and the two benchmark problems.
//!
//! The equation is `u'''' + D u''' + A u'' + (A' + H) u' + B u = f` on `[a, b]`
//! with `u` and `u'` prescribed at both ends.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::stencil::BoundaryValues;

pub type Func = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

pub fn func(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Func {
    Arc::new(f)
}

pub fn constant(c: f64) -> Func {
    Arc::new(move |_| c)
}

/// Coefficient values at a single abscissa.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeCoefficients {
    pub a: f64,
    pub a_prime: f64,
    pub b: f64,
    pub d: f64,
    pub h: f64,
    pub f: f64,
}

/// `A`, its analytic derivative `A'`, `B`, `D`, `H` and the right-hand side `f`.
#[derive(Clone)]
pub struct CoefficientSet {
    pub a: Func,
    pub a_prime: Func,
    pub b: Func,
    pub d: Func,
    pub h: Func,
    pub f: Func,
}

impl fmt::Debug for CoefficientSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CoefficientSet { .. }")
    }
}

impl CoefficientSet {
    /// All coefficients zero: `u'''' = f`.
    pub fn biharmonic(f: Func) -> Self {
        CoefficientSet {
            a: constant(0.0),
            a_prime: constant(0.0),
            b: constant(0.0),
            d: constant(0.0),
            h: constant(0.0),
            f,
        }
    }

    pub fn constant(a: f64, b: f64, d: f64, h: f64, f: Func) -> Self {
        CoefficientSet { a: constant(a), a_prime: constant(0.0), b: constant(b), d: constant(d), h: constant(h), f }
    }

    pub fn with_f(&self, f: Func) -> Self {
        CoefficientSet { f, ..self.clone() }
    }

    /// Evaluates every coefficient at `x`; any non-finite value is an error.
    pub fn at(&self, x: f64) -> Result<NodeCoefficients> {
        let c = NodeCoefficients {
            a: (self.a)(x),
            a_prime: (self.a_prime)(x),
            b: (self.b)(x),
            d: (self.d)(x),
            h: (self.h)(x),
            f: (self.f)(x),
        };
        if [c.a, c.a_prime, c.b, c.d, c.h, c.f].iter().all(|v| v.is_finite()) {
            Ok(c)
        } else {
            Err(Error::Evaluation { x })
        }
    }

    /// Applies the differential operator to a function given by its derivatives.
    pub fn apply(&self, x: f64, derivs: [f64; 5]) -> f64 {
        let [u, u1, u2, u3, u4] = derivs;
        u4 + (self.d)(x) * u3 + (self.a)(x) * u2 + ((self.a_prime)(x) + (self.h)(x)) * u1 + (self.b)(x) * u
    }
}

/// A solution together with its first four derivatives.
#[derive(Clone)]
pub struct ExactSolution {
    pub u: Func,
    pub u1: Func,
    pub u2: Func,
    pub u3: Func,
    pub u4: Func,
}

impl fmt::Debug for ExactSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ExactSolution { .. }")
    }
}

impl ExactSolution {
    pub fn zero() -> Self {
        ExactSolution::polynomial([0.0; 5])
    }

    /// `c[0] + c[1] x + ... + c[4] x^4`.
    pub fn polynomial(c: [f64; 5]) -> Self {
        let eval = move |k: usize| {
            func(move |x: f64| {
                // k-th derivative by Horner over the differentiated coefficients
                let mut acc = 0.0;
                for i in (k..5).rev() {
                    let falling: f64 = (0..k).map(|m| (i - m) as f64).product();
                    acc = acc * x + falling * c[i];
                }
                acc
            })
        };
        ExactSolution { u: eval(0), u1: eval(1), u2: eval(2), u3: eval(3), u4: eval(4) }
    }

    pub fn derivs(&self, x: f64) -> [f64; 5] {
        [(self.u)(x), (self.u1)(x), (self.u2)(x), (self.u3)(x), (self.u4)(x)]
    }

    /// Derivative of order `k <= 4`.
    pub fn derivative(&self, k: usize) -> &Func {
        match k {
            0 => &self.u,
            1 => &self.u1,
            2 => &self.u2,
            3 => &self.u3,
            4 => &self.u4,
            _ => panic!("derivative order {k} > 4"),
        }
    }

    pub fn boundary_values(&self, a: f64, b: f64) -> BoundaryValues {
        BoundaryValues { u_left: (self.u)(a), du_left: (self.u1)(a), u_right: (self.u)(b), du_right: (self.u1)(b) }
    }
}

/// `f = u'''' + D u''' + A u'' + (A' + H) u' + B u` for the given exact solution.
/// The `f` field of `coeffs` is ignored.
pub fn manufactured_rhs(exact: &ExactSolution, coeffs: &CoefficientSet) -> Func {
    let exact = exact.clone();
    let coeffs = coeffs.clone();
    func(move |x| coeffs.apply(x, exact.derivs(x)))
}

/// A fully specified boundary value problem on a grid.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub grid: Grid,
    pub coeffs: CoefficientSet,
    pub boundary: BoundaryValues,
}

/// A benchmark: interval, coefficients and the known solution.
#[derive(Debug, Clone)]
pub struct Problem {
    pub name: String,
    pub a: f64,
    pub b: f64,
    pub coeffs: CoefficientSet,
    pub exact: ExactSolution,
}

impl Problem {
    /// Coefficients with `f` manufactured from `exact`.
    pub fn manufactured(name: &str, a: f64, b: f64, coeffs: CoefficientSet, exact: ExactSolution) -> Self {
        let f = manufactured_rhs(&exact, &coeffs);
        Problem { name: name.to_string(), a, b, coeffs: coeffs.with_f(f), exact }
    }

    pub fn grid(&self, n: usize) -> Result<Grid> {
        Grid::new(self.a, self.b, n)
    }

    pub fn boundary(&self) -> BoundaryValues {
        self.exact.boundary_values(self.a, self.b)
    }

    pub fn spec(&self, n: usize) -> Result<ProblemSpec> {
        Ok(ProblemSpec { grid: self.grid(n)?, coeffs: self.coeffs.clone(), boundary: self.boundary() })
    }

    /// Same coefficients, zero boundary data and `f = 0`.
    pub fn homogeneous(&self) -> Problem {
        Problem {
            name: format!("{}-homogeneous", self.name),
            a: self.a,
            b: self.b,
            coeffs: self.coeffs.with_f(constant(0.0)),
            exact: ExactSolution::zero(),
        }
    }
}

/// Constant coefficients of the first benchmark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantCoefficients {
    pub a: f64,
    pub b: f64,
    pub d: f64,
    pub h: f64,
}

impl Default for ConstantCoefficients {
    fn default() -> Self {
        ConstantCoefficients { a: 1e2, b: 1e4, d: 10.0, h: 1e3 }
    }
}

pub const PROBLEM1_INTERVAL: (f64, f64) = (0.3, 1.4);

/// `u = e^x cos(2 pi x)` on `[0.3, 1.4]` with constant coefficients.
pub fn problem1() -> Problem {
    problem1_with(ConstantCoefficients::default())
}

pub fn problem1_exact() -> ExactSolution {
    // d^k/dx^k e^x cos(wx) = e^x Re[(1 + i w)^k e^{iwx}]
    let w = 2.0 * PI;
    let deriv = move |k: i32| {
        let (re, im) = (0..k).fold((1.0f64, 0.0f64), |(r, i), _| (r - w * i, i + w * r));
        func(move |x: f64| x.exp() * (re * (w * x).cos() - im * (w * x).sin()))
    };
    ExactSolution { u: deriv(0), u1: deriv(1), u2: deriv(2), u3: deriv(3), u4: deriv(4) }
}

/// The closed-form right-hand side for constant `(D, A, H, B)`, `A' = 0`.
pub fn problem1_rhs(c: ConstantCoefficients) -> Func {
    let pi2 = PI * PI;
    let pi4 = pi2 * pi2;
    let cos_part = 1.0 - 24.0 * pi2 + 16.0 * pi4 + c.d * (1.0 - 12.0 * pi2) + c.a * (1.0 - 4.0 * pi2) + c.h + c.b;
    let sin_part = 4.0 - 16.0 * pi2 + c.d * (3.0 - 4.0 * pi2) + 2.0 * c.a + c.h;
    func(move |x: f64| {
        let t = 2.0 * PI * x;
        (t.cos() * cos_part - 2.0 * PI * t.sin() * sin_part) * x.exp()
    })
}

pub fn problem1_with(c: ConstantCoefficients) -> Problem {
    let (a, b) = PROBLEM1_INTERVAL;
    Problem {
        name: "problem1".into(),
        a,
        b,
        coeffs: CoefficientSet::constant(c.a, c.b, c.d, c.h, problem1_rhs(c)),
        exact: problem1_exact(),
    }
}

pub const PROBLEM2_EPS: f64 = 1.0 / 40.0;
pub const PROBLEM2_ALPHA: f64 = 1e4;
pub const PROBLEM2_BETA: f64 = 1e8;
pub const PROBLEM2_GAMMA: f64 = 1e2;

/// `u = x^2 (1-x)^2 sin(1 / ((x - 1/2)^2 + eps))` on `[0, 1]`, variable coefficients.
pub fn problem2() -> Problem {
    let coeffs = CoefficientSet {
        a: func(|x| PROBLEM2_ALPHA * (1.0 + 0.5 * (40.0 * PI * x).sin())),
        a_prime: func(|x| 20.0 * PI * PROBLEM2_ALPHA * (40.0 * PI * x).cos()),
        b: func(|x| PROBLEM2_BETA * (40.0 * PI * x).sin()),
        d: func(|x| PROBLEM2_GAMMA * (40.0 * PI * x).cos()),
        h: constant(0.0),
        f: constant(0.0),
    };
    Problem::manufactured("problem2", 0.0, 1.0, coeffs, problem2_exact())
}

pub fn problem2_exact() -> ExactSolution {
    let d = |k: usize| func(move |x| problem2_derivs(x)[k]);
    ExactSolution { u: d(0), u1: d(1), u2: d(2), u3: d(3), u4: d(4) }
}

/// Derivatives 0..=4 of `x^2 (1-x)^2 sin(1 / ((x - 1/2)^2 + eps))`.
pub fn problem2_derivs(x: f64) -> [f64; 5] {
    // g = 1/w, w = (x - 1/2)^2 + eps
    let w = (x - 0.5).powi(2) + PROBLEM2_EPS;
    let w1 = 2.0 * (x - 0.5);
    let w2 = 2.0;
    let g = 1.0 / w;
    let g1 = -w1 / (w * w);
    let g2 = -w2 / (w * w) + 2.0 * w1 * w1 / w.powi(3);
    let g3 = 6.0 * w1 * w2 / w.powi(3) - 6.0 * w1.powi(3) / w.powi(4);
    let g4 = 6.0 * w2 * w2 / w.powi(3) - 36.0 * w1 * w1 * w2 / w.powi(4) + 24.0 * w1.powi(4) / w.powi(5);

    let (sn, cs) = g.sin_cos();
    let s = [
        sn,
        cs * g1,
        -sn * g1 * g1 + cs * g2,
        -cs * g1.powi(3) - 3.0 * sn * g1 * g2 + cs * g3,
        sn * g1.powi(4) - 6.0 * cs * g1 * g1 * g2 - 3.0 * sn * g2 * g2 - 4.0 * sn * g1 * g3 + cs * g4,
    ];
    let p = [
        x * x * (1.0 - x).powi(2),
        2.0 * x - 6.0 * x * x + 4.0 * x.powi(3),
        2.0 - 12.0 * x + 12.0 * x * x,
        -12.0 + 24.0 * x,
        24.0,
    ];

    const BINOM: [[f64; 5]; 5] = [
        [1.0, 0.0, 0.0, 0.0, 0.0],
        [1.0, 1.0, 0.0, 0.0, 0.0],
        [1.0, 2.0, 1.0, 0.0, 0.0],
        [1.0, 3.0, 3.0, 1.0, 0.0],
        [1.0, 4.0, 6.0, 4.0, 1.0],
    ];
    let mut out = [0.0; 5];
    for k in 0..5 {
        out[k] = (0..=k).map(|i| BINOM[k][i] * p[i] * s[k - i]).sum();
    }
    out
}

pub const PROBLEM_NAMES: [&str; 2] = ["problem1", "problem2"];

pub fn by_name(name: &str) -> Result<Problem> {
    match name {
        "problem1" => Ok(problem1()),
        "problem2" => Ok(problem2()),
        other => Err(Error::UnknownProblem(other.to_string())),
    }
}
