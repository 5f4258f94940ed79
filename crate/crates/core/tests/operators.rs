mod common;

use common::*;
use hermfd::calculus::*;
use hermfd::closure::BoundaryTriple;
use hermfd::grid::{Grid, GridFunction};
use hermfd::stencil::{emit_stencils, BoundaryValues, Operand, Operator, UnknownLayout};
use proptest::prelude::*;
use rand::{rngs::StdRng, Rng, SeedableRng};

fn gf(grid: Grid, v: Vec<f64>) -> GridFunction {
    GridFunction::new(grid, v).unwrap()
}

fn grid_and_values(max_n: usize) -> impl Strategy<Value = (Grid, Vec<f64>, Vec<f64>)> {
    (4..max_n).prop_flat_map(|n| {
        (
            Just(Grid::new(-0.3, 0.9, n).unwrap()),
            prop::collection::vec(-1.0..1.0f64, n + 1),
            prop::collection::vec(-1.0..1.0f64, n + 1),
        )
    })
}

/// Apply an interior-only operator and return only interior values.
fn interior(v: &GridFunction) -> Vec<f64> {
    v.values()[1..v.grid().n()].to_vec()
}

fn close(a: f64, b: f64, scale: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * scale.max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn commutators_vanish_away_from_the_ends((grid, v, _) in grid_and_values(40)) {
        let v = gf(grid, v);
        let n = grid.n();
        let h = grid.h();
        let pairs: [(GridFunction, GridFunction, f64); 3] = [
            (sigma(&delta1(&v)), delta1(&sigma(&v)), 1.0 / h),
            (sigma(&delta2(&v)), delta2(&sigma(&v)), 1.0 / (h * h)),
            (delta1(&delta2(&v)), delta2(&delta1(&v)), 1.0 / (h * h * h)),
        ];
        for (a, b, scale) in pairs {
            for j in 2..=n - 2 {
                prop_assert!(close(a[j], b[j], scale, 1e-12), "j = {} {} vs {}", j, a[j], b[j]);
            }
        }
    }

    #[test]
    fn tilde_delta2_identity((grid, u, _) in grid_and_values(40), bl in -1.0..1.0f64, br in -1.0..1.0f64) {
        // -d2~ = -d2 + h^2/12 d4 with p the Hermitian derivative of u
        let u = gf(grid, u);
        let p = hermitian_derivative(&u, EndpointPair::new(bl, br)).unwrap();
        let h = grid.h();
        let t = tilde_delta2(&u, &p, EndpointPair::zero()).unwrap();
        let d2 = delta2(&u);
        let d4 = delta4(&u, &p, EndpointPair::zero()).unwrap();
        for j in grid.interior() {
            let rhs = -d2[j] + h * h / 12.0 * d4[j];
            prop_assert!(close(-t[j], rhs, d2[j].abs() + (h * h / 12.0 * d4[j]).abs(), 1e-11));
        }
    }

    #[test]
    fn hermitian_derivative_satisfies_simpson_relation((grid, u, _) in grid_and_values(60), bl in -3.0..3.0f64, br in -3.0..3.0f64) {
        let u = gf(grid, u);
        let p = hermitian_derivative(&u, EndpointPair::new(bl, br)).unwrap();
        prop_assert_eq!((p[0], p[grid.n()]), (bl, br));
        let sp = sigma(&p);
        let du = delta1(&u);
        for j in grid.interior() {
            prop_assert!(close(sp[j], du[j], 1.0 / grid.h(), 1e-13));
        }
    }

    #[test]
    fn operators_are_linear((grid, a, b) in grid_and_values(30), s in -4.0..4.0f64) {
        let (u, w) = (gf(grid, a), gf(grid, b));
        let comb = u.add(&w.scale(s)).unwrap();
        let lin = |op: &dyn Fn(&GridFunction) -> GridFunction| {
            let lhs = op(&comb);
            let rhs = op(&u).add(&op(&w).scale(s)).unwrap();
            let scale = op(&u).norm_sup() + s.abs() * op(&w).norm_sup();
            lhs.sub(&rhs).unwrap().norm_sup() <= 1e-12 * scale.max(1.0)
        };
        let zero = EndpointPair::zero();
        let d4 = |v: &GridFunction| {
            let p = hermitian_derivative(v, zero).unwrap();
            delta4(v, &p, zero).unwrap()
        };
        let d3 = |v: &GridFunction| {
            let p = hermitian_derivative(v, zero).unwrap();
            let d2 = tilde_delta2(v, &p, zero).unwrap();
            delta3(&p, &d2, zero).unwrap()
        };
        prop_assert!(lin(&sigma));
        prop_assert!(lin(&delta1));
        prop_assert!(lin(&delta2));
        prop_assert!(lin(&d3));
        prop_assert!(lin(&d4));
    }

    #[test]
    fn stencils_match_direct_application(
        (grid, u, p) in grid_and_values(40),
        t in prop::array::uniform6(-50.0..50.0f64),
        b in prop::array::uniform4(-2.0..2.0f64),
    ) {
        let bc = BoundaryValues { u_left: b[0], du_left: b[1], u_right: b[2], du_right: b[3] };
        let n = grid.n();
        let mut u = u;
        let mut p = p;
        u[0] = bc.u_left; u[n] = bc.u_right;
        p[0] = bc.du_left; p[n] = bc.du_right;
        let (u, p) = (gf(grid, u), gf(grid, p));
        let left = BoundaryTriple::new(t[0], t[1], t[2]);
        let right = BoundaryTriple::new(t[3], t[4], t[5]);
        let layout = UnknownLayout::new(n);
        let z = layout.pack(&u, &p, &left, &right);

        let d2 = tilde_delta2(&u, &p, EndpointPair::new(left.d2, right.d2)).unwrap();
        let direct: Vec<(Operator, Vec<f64>)> = vec![
            (Operator::Sigma(Operand::U), interior(&sigma(&u))),
            (Operator::Sigma(Operand::P), interior(&sigma(&p))),
            (Operator::Delta1(Operand::U), interior(&delta1(&u))),
            (Operator::Delta1(Operand::P), interior(&delta1(&p))),
            (Operator::Delta2(Operand::U), interior(&delta2(&u))),
            (Operator::Delta2(Operand::P), interior(&delta2(&p))),
            (Operator::Simpson, interior(&sigma(&p).sub(&delta1(&u)).unwrap())),
            (Operator::TildeDelta2, interior(&d2)),
            (Operator::Delta3, interior(&delta3(&p, &d2, EndpointPair::zero()).unwrap())),
            (Operator::Delta4, interior(&delta4(&u, &p, EndpointPair::zero()).unwrap())),
        ];
        for (op, values) in direct {
            let rows = emit_stencils(&grid, op, &bc);
            prop_assert_eq!(rows.len(), n - 1);
            for (row, want) in rows.iter().zip(values) {
                let got = row.eval(&z);
                let scale: f64 = row.coefficients.iter().map(|(&k, &w)| (w * z[k]).abs()).sum::<f64>() + row.rhs_shift.abs();
                prop_assert!((got - want).abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE), "{:?}: {} vs {}", op, got, want);
            }
        }
    }

    #[test]
    fn quartics_are_reproduced(c in prop::array::uniform5(-2.0..2.0f64), n in 6usize..40) {
        let grid = Grid::new(-0.5, 1.25, n).unwrap();
        let d = |x: f64| [
            c[0] + c[1] * x + c[2] * x * x + c[3] * x.powi(3) + c[4] * x.powi(4),
            c[1] + 2.0 * c[2] * x + 3.0 * c[3] * x * x + 4.0 * c[4] * x.powi(3),
            2.0 * c[2] + 6.0 * c[3] * x + 12.0 * c[4] * x * x,
            6.0 * c[3] + 24.0 * c[4] * x,
            24.0 * c[4],
        ];
        let u = GridFunction::from_fn(grid, |j| d(grid.x(j))[0]);
        let p = hermitian_derivative(&u, EndpointPair::new(d(grid.a())[1], d(grid.b())[1])).unwrap();
        let bc = |k: usize| EndpointPair::new(d(grid.a())[k], d(grid.b())[k]);
        let d2 = tilde_delta2(&u, &p, bc(2)).unwrap();
        let d3 = delta3(&p, &d2, bc(3)).unwrap();
        let d4 = delta4(&u, &p, bc(4)).unwrap();
        for j in 0..=n {
            let e = d(grid.x(j));
            prop_assert!((p[j] - e[1]).abs() < 1e-10);
            prop_assert!((d2[j] - e[2]).abs() < 1e-9);
            prop_assert!((d3[j] - e[3]).abs() < 1e-7);
            prop_assert!((d4[j] - e[4]).abs() < 1e-6);
        }
    }
}

#[test]
fn delta4_is_symmetric_positive_definite() {
    for n in [16, 32, 64] {
        let (asym, lmin, chol) = delta4_symmetry_and_min_eigenvalue(n);
        assert!(asym <= 1e-10, "n = {n}: asymmetry {asym:e}");
        assert!(chol, "n = {n}: Cholesky failed");
        assert!(lmin > 0.0, "n = {n}: smallest eigenvalue {lmin}");
    }
}

#[test]
fn coercivity_does_not_degrade_under_refinement() {
    let mut rng = StdRng::seed_from_u64(17);
    let mut prev_c: Option<f64> = None;
    let mut prev_sampled: Option<f64> = None;
    for n in [16, 32, 64, 128] {
        let c = coercivity_constant(n);
        assert!(c > 0.0, "n = {n}: c = {c}");

        let grid = Grid::new(0.0, 1.0, n).unwrap();
        let mut sampled = f64::INFINITY;
        for _ in 0..200 {
            let z = GridFunction::from_fn(grid, |j| if j == 0 || j == n { 0.0 } else { rng.random_range(-1.0..1.0) });
            let r = coercivity_ratio(&z);
            assert!(r >= c * (1.0 - 1e-9), "sampled ratio {r} below the minimum {c}");
            sampled = sampled.min(r);
        }
        // smooth members of the space are where the ratio is smallest
        for k in 1..=4 {
            let z = GridFunction::from_fn(grid, |j| (k as f64 * std::f64::consts::PI * grid.x(j)).sin().powi(2) * if j == 0 || j == n { 0.0 } else { 1.0 });
            sampled = sampled.min(coercivity_ratio(&z));
        }
        assert!(sampled > 0.0);
        if let Some(pc) = prev_c {
            assert!(c >= 0.9 * pc, "constant shrank from {pc} to {c} at n = {n}");
        }
        if let Some(ps) = prev_sampled {
            assert!(sampled >= 0.5 * ps, "sampled minimum shrank from {ps} to {sampled} at n = {n}");
        }
        prev_c = Some(c);
        prev_sampled = Some(sampled);
    }
}
