use morse_boundary::catalog;
use morse_boundary::pipeline::{analyze, invariance_check, Flavor, Side};
use morse_boundary::tolerances::Tolerances;

#[test]
fn every_entry_matches_its_references() {
    let tol = Tolerances::default();
    for name in catalog::list() {
        let entry = catalog::get(name).unwrap();
        let pkg = analyze(&entry, 0, &tol).unwrap();
        for l in &pkg.ledger {
            assert!(l.passed, "{name}: {} failed: {}", l.check, l.detail);
        }
    }
}

#[test]
fn moebius_twisted_differential_is_two() {
    let tol = Tolerances::default();
    let entry = catalog::get("moebius").unwrap();
    let pkg = analyze(&entry, 0, &tol).unwrap();
    let fn_or = pkg.complex(Side::Neumann, Flavor::Orientation);
    let m = fn_or.complex.map(1).to_i64_rows();
    assert_eq!(m.iter().flatten().map(|v| v.abs()).max(), Some(2));
    let fn_plain = pkg.complex(Side::Neumann, Flavor::Untwisted);
    assert!(fn_plain.complex.map(1).is_zero());
}

#[test]
fn annulus_homology_is_seed_independent() {
    let tol = Tolerances::default();
    let entry = catalog::get("annulus").unwrap();
    let crit = morse_boundary::critical::locate(&entry.field, &entry.chart, &tol).unwrap();
    let report = invariance_check(&entry.field, &entry.chart, &crit, &[1, 2, 3], &tol).unwrap();
    assert_eq!(report.results.len(), 18);
}
