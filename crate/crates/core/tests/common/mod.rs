#![allow(dead_code)]

use hermfd::calculus::{delta1, delta2, delta4, hermitian_derivative, EndpointPair};
use hermfd::grid::{Grid, GridFunction};
use hermfd::problem::{constant, func, CoefficientSet, ExactSolution, Func, Problem};
use nalgebra::DMatrix;

/// Smooth variable coefficients with every term present.
pub fn variable_coeffs() -> CoefficientSet {
    CoefficientSet {
        a: func(|x| 40.0 + 10.0 * x),
        a_prime: constant(10.0),
        b: func(|x| 200.0 * (1.0 + x * x)),
        d: func(|x| -3.0 + x),
        h: func(|x| 5.0 * x.cos()),
        f: constant(0.0),
    }
}

/// `e^x sin 3x` with derivatives.
pub fn exp_sin() -> ExactSolution {
    ExactSolution {
        u: func(|x| (3.0 * x).sin() * x.exp()),
        u1: func(|x| x.exp() * ((3.0 * x).sin() + 3.0 * (3.0 * x).cos())),
        u2: func(|x| x.exp() * (-8.0 * (3.0 * x).sin() + 6.0 * (3.0 * x).cos())),
        u3: func(|x| x.exp() * (-26.0 * (3.0 * x).sin() - 18.0 * (3.0 * x).cos())),
        u4: func(|x| x.exp() * (28.0 * (3.0 * x).sin() - 96.0 * (3.0 * x).cos())),
    }
}

/// `x -> a + b - x`: odd derivatives and odd-order coefficients change sign.
pub fn reflect(p: &Problem) -> Problem {
    let (a, b) = (p.a, p.b);
    let r = move |f: Func, s: f64| func(move |x| s * f(a + b - x));
    let c = &p.coeffs;
    let e = &p.exact;
    Problem {
        name: format!("{}-reflected", p.name),
        a,
        b,
        coeffs: CoefficientSet {
            a: r(c.a.clone(), 1.0),
            a_prime: r(c.a_prime.clone(), -1.0),
            b: r(c.b.clone(), 1.0),
            d: r(c.d.clone(), -1.0),
            h: r(c.h.clone(), -1.0),
            f: r(c.f.clone(), 1.0),
        },
        exact: ExactSolution {
            u: r(e.u.clone(), 1.0),
            u1: r(e.u1.clone(), -1.0),
            u2: r(e.u2.clone(), 1.0),
            u3: r(e.u3.clone(), -1.0),
            u4: r(e.u4.clone(), 1.0),
        },
    }
}

fn unit_vector(grid: Grid, k: usize) -> GridFunction {
    GridFunction::from_fn(grid, |j| if j == k + 1 { 1.0 } else { 0.0 })
}

/// Matrix of `z -> delta4 z` on functions vanishing with their Hermitian
/// derivative at both ends, over the interior nodes.
pub fn delta4_matrix(n: usize) -> DMatrix<f64> {
    let grid = Grid::new(0.0, 1.0, n).unwrap();
    let m = n - 1;
    let mut out = DMatrix::zeros(m, m);
    for k in 0..m {
        let z = unit_vector(grid, k);
        let p = hermitian_derivative(&z, EndpointPair::zero()).unwrap();
        let d4 = delta4(&z, &p, EndpointPair::zero()).unwrap();
        for i in 0..m {
            out[(i, k)] = d4[i + 1];
        }
    }
    out
}

/// Matrices of `z -> delta2 z` and `z -> delta1(z_x)` over the interior nodes.
fn energy_matrices(n: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let grid = Grid::new(0.0, 1.0, n).unwrap();
    let m = n - 1;
    let mut d2 = DMatrix::zeros(m, m);
    let mut dp = DMatrix::zeros(m, m);
    for k in 0..m {
        let z = unit_vector(grid, k);
        let p = hermitian_derivative(&z, EndpointPair::zero()).unwrap();
        let a = delta2(&z);
        let b = delta1(&p);
        for i in 0..m {
            d2[(i, k)] = a[i + 1];
            dp[(i, k)] = b[i + 1];
        }
    }
    (d2, dp)
}

/// `max |M - M^T| / max |M|` and the smallest eigenvalue of the symmetric part.
pub fn delta4_symmetry_and_min_eigenvalue(n: usize) -> (f64, f64, bool) {
    let m = delta4_matrix(n);
    let asym = (&m - m.transpose()).abs().max() / m.abs().max();
    let sym = (&m + m.transpose()) * 0.5;
    let chol = sym.clone().cholesky().is_some();
    (asym, sym.symmetric_eigenvalues().min(), chol)
}

/// Smallest value over the space of `(d4 z, z) / (|z|^2 + |d2 z|^2 + |d1 z_x|^2)`,
/// as a generalized symmetric eigenvalue.
pub fn coercivity_constant(n: usize) -> f64 {
    let m = delta4_matrix(n);
    let m = (&m + m.transpose()) * 0.5;
    let (d2, dp) = energy_matrices(n);
    let e = DMatrix::identity(n - 1, n - 1) + d2.transpose() * &d2 + dp.transpose() * &dp;
    let l = e.cholesky().expect("energy matrix is SPD").l();
    let linv = l.try_inverse().unwrap();
    let g = &linv * m * linv.transpose();
    ((&g + g.transpose()) * 0.5).symmetric_eigenvalues().min()
}

pub fn coercivity_ratio(z: &GridFunction) -> f64 {
    let p = hermitian_derivative(z, EndpointPair::zero()).unwrap();
    let d4 = delta4(z, &p, EndpointPair::zero()).unwrap();
    let num = d4.inner_product(z).unwrap();
    let den = z.norm_h().powi(2) + delta2(z).norm_h().powi(2) + delta1(&p).norm_h().powi(2);
    num / den
}
