mod common;

use common::*;
use hermfd::convergence::*;
use hermfd::problem::*;
use hermfd::Error;

#[test]
fn quartic_truncation_is_exact() {
    let exact = ExactSolution::polynomial([0.5, -1.0, 2.0, 0.75, -1.5]);
    let p = Problem::manufactured("quartic", -0.3, 0.9, variable_coeffs(), exact);
    let report = truncation_study(&p, &[8, 16, 32, 64]).unwrap();
    for r in &report.records {
        assert!(r.norm_sup <= 1e-9 * 50.0, "{:?}", r);
    }
}

#[test]
fn zero_problem_has_zero_errors() {
    let p = problem1().homogeneous();
    let report = accuracy_study(&p, &[8, 16]).unwrap();
    assert!(report.records.iter().all(|r| r.norm_h == 0.0 && r.norm_sup == 0.0));
    assert!(report.rates.iter().all(|r| r.rate_h.is_none() && r.rate_sup.is_none()));
}

#[test]
fn reports_are_bit_identical_across_runs() {
    let p = problem2();
    let a = accuracy_study(&p, &[32, 64, 128, 256]).unwrap();
    let b = accuracy_study(&p, &[32, 64, 128, 256]).unwrap();
    let bits = |r: &ConvergenceReport| r.records.iter().flat_map(|e| [e.norm_h.to_bits(), e.norm_sup.to_bits()]).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
    let t1 = truncation_study_with_pointwise(&problem1(), &[16, 32, 64]).unwrap();
    let t2 = truncation_study_with_pointwise(&problem1(), &[16, 32, 64]).unwrap();
    assert_eq!(t1, t2);
}

#[test]
fn accuracy_beats_truncation_for_high_derivatives() {
    let p = problem1();
    let acc = accuracy_study(&p, &[128]).unwrap();
    let tr = truncation_study(&p, &[128]).unwrap();
    for field in [Field::D3, Field::D4] {
        let a = acc.error(field, 128).unwrap().norm_h;
        let t = tr.error(field, 128).unwrap().norm_h;
        assert!(a < t, "{field}: accuracy {a:e} vs truncation {t:e}");
    }
}

#[test]
fn problem1_accuracy_rates_are_fourth_order() {
    let report = accuracy_study(&problem1(), &[16, 32, 64, 128]).unwrap();
    for r in report.rates.iter().filter(|r| r.n1 >= 32) {
        let rate = r.rate_h.unwrap();
        assert!((rate - 4.0).abs() <= 0.2, "{:?}", r);
    }
    let u_rates: Vec<f64> = report.rates.iter().filter(|r| r.field == Field::U).map(|r| r.rate_h.unwrap()).collect();
    assert!(u_rates.iter().all(|r| (r - 4.0).abs() <= 0.15), "{u_rates:?}");
}

#[test]
fn truncation_orders_near_the_boundary() {
    let p = problem1();
    let c = truncation_errors(&p, 32).unwrap();
    let f = truncation_errors(&p, 64).unwrap();
    let slopes = pointwise_rates(&c, &f, Pairing::StencilRole).unwrap();
    let at = |field: Field, j: usize| slopes.iter().find(|s| s.field == field && s.j == j).unwrap().slope.unwrap();
    for (field, want) in [(Field::D1, 4.0), (Field::D2, 3.0), (Field::D3, 2.0), (Field::D4, 1.0)] {
        for j in [1, 31] {
            let s = at(field, j);
            assert!((s - want).abs() <= 0.3, "{field} at j={j}: {s}");
        }
    }
    // same abscissa, different stencil role: not the near-boundary order
    let nested = pointwise_rates(&c, &f, Pairing::Nested).unwrap();
    let s = nested.iter().find(|s| s.field == Field::D4 && s.j == 1).unwrap().slope.unwrap();
    assert!(s > 2.0, "{s}");
}

#[test]
fn exact_samples_have_no_pointwise_slope() {
    let p = problem1();
    let c = truncation_errors(&p, 16).unwrap();
    let f = truncation_errors(&p, 32).unwrap();
    let slopes = pointwise_rates(&c, &f, Pairing::Nested).unwrap();
    assert!(slopes.iter().filter(|s| s.field == Field::U).all(|s| s.slope.is_none()));
    // p carries the exact endpoint derivative
    assert!(slopes.iter().filter(|s| s.field == Field::D1 && (s.j == 0 || s.j == 16)).all(|s| s.slope.is_none()));
}

#[test]
fn pointwise_needs_nested_grids() {
    let p = problem1();
    let c = truncation_errors(&p, 16).unwrap();
    let f = truncation_errors(&p, 24).unwrap();
    assert!(matches!(pointwise_rates(&c, &f, Pairing::Nested), Err(Error::InvalidMeshes(_))));
}

#[test]
fn invalid_mesh_lists() {
    let p = problem1();
    assert!(matches!(accuracy_study(&p, &[]), Err(Error::InvalidMeshes(_))));
    assert!(matches!(truncation_study(&p, &[32, 16]), Err(Error::InvalidMeshes(_))));
    assert!(matches!(truncation_study(&p, &[3, 16]), Err(Error::InvalidMeshes(_))));
}

#[test]
fn rates_follow_mesh_pairs() {
    let report = accuracy_study(&problem1(), &[8, 16, 32]).unwrap();
    assert_eq!(report.ns(), vec![8, 16, 32]);
    assert_eq!(report.rates.len(), 2 * 5);
    let r = report.rate(Field::U, 16, 32).unwrap();
    let (a, b) = (report.error(Field::U, 16).unwrap(), report.error(Field::U, 32).unwrap());
    assert_eq!(r.rate_h, rate(a.norm_h, b.norm_h, 16, 32));
}
