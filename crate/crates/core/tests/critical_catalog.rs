use morse_boundary::catalog;
use morse_boundary::critical::{locate, CriticalKind};
use morse_boundary::tolerances::Tolerances;

#[test]
fn finder_reproduces_every_expected_partition() {
    let tol = Tolerances::default();
    for name in catalog::list() {
        let e = catalog::get(name).unwrap();
        let set = locate(&e.field, &e.chart, &tol).unwrap();
        assert_eq!(set.points.len(), e.expected.len(), "{name}: {:?}", set.points);
        for exp in &e.expected {
            let hit = set.points.iter().find(|p| {
                let d: f64 = p.point.coords.iter().zip(&exp.location).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                let d_seam = if e.chart.is_quotient() {
                    (p.point.coords[0] - exp.location[0]).abs() - 2.0 * std::f64::consts::PI
                } else {
                    1.0
                };
                d < 1e-6 || d_seam.abs() < 1e-6
            });
            let hit = hit.unwrap_or_else(|| panic!("{name}: missing {exp:?}"));
            assert_eq!(hit.kind, exp.kind, "{name}");
        }
        let chi: i64 = (0..=e.dim())
            .map(|k| {
                let s = if k % 2 == 0 { 1 } else { -1 };
                s * set.neumann_generators(k).len() as i64
            })
            .sum();
        assert_eq!(chi, e.euler_characteristic, "{name}");
    }
}

#[test]
fn metric_scaling_keeps_kinds() {
    let tol = Tolerances::default();
    for name in ["disk", "annulus", "tilted_dome"] {
        let e = catalog::get(name).unwrap();
        let scaled = e.chart.clone().with_metric(e.chart.metric.scaled(4.0));
        let a = locate(&e.field, &e.chart, &tol).unwrap();
        let b = locate(&e.field, &scaled, &tol).unwrap();
        let kinds = |s: &morse_boundary::critical::CriticalSet| {
            s.points.iter().map(|p| (p.kind, p.grading)).collect::<Vec<(CriticalKind, usize)>>()
        };
        assert_eq!(kinds(&a), kinds(&b), "{name}");
    }
}

#[test]
fn moebius_saddle_data() {
    let e = catalog::get("moebius").unwrap();
    let set = locate(&e.field, &e.chart, &Tolerances::default()).unwrap();
    let saddle = set.c(1)[0];
    assert!(saddle.point.coords.norm() < 1e-9);
    assert_eq!(saddle.orientation_ref.len(), 1);
    let h = e.field.hessian(saddle.point.as_slice());
    assert!((h[(0, 1)] - 0.5).abs() < 1e-12 && h[(0, 0)].abs() < 1e-12);
    let n0 = set.n(0)[0];
    assert!((n0.value + 1.0).abs() < 1e-12);
}

#[test]
fn negative_reclassification() {
    let e = catalog::get("annulus").unwrap();
    let set = locate(&e.field, &e.chart, &Tolerances::default()).unwrap();
    let neg = set.for_negative(&e.field.negated(), &e.chart);
    for p in &set.points {
        let q = neg.get(p.id);
        assert_eq!(q.grading, 2 - p.grading);
        assert_eq!(q.value, -p.value);
    }
    assert_eq!(neg.n(0).len(), 1);
    assert_eq!(neg.n(1).len(), 1);
}
