use morse_boundary::catalog;
use morse_boundary::critical::locate;
use morse_boundary::error::MorseError;
use morse_boundary::pairing::intersection_pairing;
use morse_boundary::pseudo_gradient::build_adapted;
use morse_boundary::tolerances::Tolerances;

fn id_at(crit: &morse_boundary::critical::CriticalSet, loc: &[f64]) -> usize {
    crit.points.iter().find(|p| p.point.coords.iter().zip(loc).all(|(a, b)| (a - b).abs() < 1e-6)).unwrap().id
}

fn pair(name: &str, p: &[f64], q: &[f64]) -> Result<i64, MorseError> {
    let tol = Tolerances::default();
    let e = catalog::get(name).unwrap();
    let crit = locate(&e.field, &e.chart, &tol).unwrap();
    let (x, _) = build_adapted(&e.field, &e.chart, &crit, false, None, &tol).unwrap();
    let (xm, _) = build_adapted(&e.field, &e.chart, &crit, true, None, &tol).unwrap();
    intersection_pairing(&x, &xm, id_at(&crit, p), id_at(&crit, q), &tol)
}

#[test]
fn annulus_degree_one_is_unimodular() {
    assert_eq!(pair("annulus", &[0.0, -1.0], &[0.0, 1.0]).unwrap().abs(), 1);
}

#[test]
fn moebius_degree_one_is_unimodular() {
    assert_eq!(pair("moebius", &[0.0, 0.0], &[0.0, 0.0]).unwrap().abs(), 1);
}

#[test]
fn top_degree_pairs_through_the_flow() {
    assert_eq!(pair("disk", &[0.0, 1.0], &[0.0, -1.0]).unwrap().abs(), 1);
    assert_eq!(pair("interval", &[1.0], &[0.0]).unwrap().abs(), 1);
    assert_eq!(pair("annulus", &[0.0, 2.0], &[0.0, -2.0]).unwrap().abs(), 1);
}

#[test]
fn non_complementary_pairs_are_rejected() {
    assert!(matches!(pair("annulus", &[0.0, -1.0], &[0.0, -2.0]), Err(MorseError::DimensionMismatch(_))));
    assert!(matches!(pair("disk", &[0.0, -1.0], &[0.0, -1.0]), Err(MorseError::DimensionMismatch(_))));
}
