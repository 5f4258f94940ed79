use hermfd::problem::*;
use rand::{rngs::StdRng, Rng, SeedableRng};

fn term_scale(p: &Problem, x: f64) -> f64 {
    let c = p.coeffs.at(x).unwrap();
    let [u, u1, u2, u3, u4] = p.exact.derivs(x);
    u4.abs() + (c.d * u3).abs() + (c.a * u2).abs() + ((c.a_prime + c.h) * u1).abs() + (c.b * u).abs()
}

#[test]
fn problem1_printed_rhs_matches_manufactured() {
    let p = problem1();
    let manufactured = manufactured_rhs(&p.exact, &p.coeffs);
    let mut rng = StdRng::seed_from_u64(1);
    for _ in 0..1000 {
        let x = rng.random_range(p.a..p.b);
        let (printed, made) = ((p.coeffs.f)(x), manufactured(x));
        assert!((printed - made).abs() <= 1e-10 * term_scale(&p, x), "x = {x}: {printed} vs {made}");
    }
}

#[test]
fn problem1_rhs_is_parametric_in_the_constants() {
    let c = ConstantCoefficients { a: -3.0, b: 7.0, d: 0.5, h: 2.0 };
    let p = problem1_with(c);
    let manufactured = manufactured_rhs(&p.exact, &p.coeffs);
    for i in 0..=50 {
        let x = p.a + (p.b - p.a) * i as f64 / 50.0;
        assert!(((p.coeffs.f)(x) - manufactured(x)).abs() <= 1e-10 * term_scale(&p, x));
    }
}

#[test]
fn problem2_derivatives_match_central_differences() {
    let mut rng = StdRng::seed_from_u64(2);
    let xs: Vec<f64> = (0..100).map(|_| rng.random_range(0.0..1.0)).collect();
    let step = 1e-6;
    let d: Vec<[f64; 5]> = xs.iter().map(|&x| problem2_derivs(x)).collect();
    for k in 0..4 {
        // floor the denominator only where the derivative crosses zero
        let sup = d.iter().map(|v| v[k + 1].abs()).fold(0.0, f64::max);
        for (&x, exact) in xs.iter().zip(&d) {
            let fd = (problem2_derivs(x + step)[k] - problem2_derivs(x - step)[k]) / (2.0 * step);
            let rel = (fd - exact[k + 1]).abs() / (exact[k + 1].abs() + 1e-3 * sup);
            assert!(rel <= 1e-6, "order {} at x = {x}: rel {rel:e}", k + 1);
        }
    }
}

#[test]
fn problem2_exact_solution_is_clamped() {
    let p = problem2();
    let bc = p.boundary();
    assert_eq!((bc.u_left, bc.u_right), (0.0, 0.0));
    assert!(bc.du_left.abs() < 1e-15 && bc.du_right.abs() < 1e-15);
}

#[test]
fn problem2_terms_have_comparable_size() {
    let p = problem2();
    let (mut bu, mut u4) = (0.0f64, 0.0f64);
    for j in 0..=512 {
        let x = j as f64 / 512.0;
        bu = bu.max(((p.coeffs.b)(x) * (p.exact.u)(x)).abs());
        u4 = u4.max((p.exact.u4)(x).abs());
    }
    let ratio = bu / u4;
    assert!((1e-2..=1e2).contains(&ratio), "ratio {ratio}");
}

#[test]
fn problem2_coefficient_derivative_is_analytic() {
    let p = problem2();
    for i in 1..200 {
        let x = i as f64 / 200.0;
        let h = 1e-7;
        let fd = ((p.coeffs.a)(x + h) - (p.coeffs.a)(x - h)) / (2.0 * h);
        assert!((fd - (p.coeffs.a_prime)(x)).abs() <= 1e-5 * (PROBLEM2_ALPHA * 20.0 * std::f64::consts::PI));
    }
}

#[test]
fn manufactured_rhs_examples() {
    let zero = CoefficientSet::biharmonic(constant(0.0));
    let f = manufactured_rhs(&ExactSolution::polynomial([4.0, -1.0, 2.0, 0.5, 3.0]), &zero);
    assert_eq!(f(0.123), 72.0);
    let f = manufactured_rhs(&ExactSolution::zero(), &problem2().coeffs);
    assert_eq!(f(0.4), 0.0);
}
