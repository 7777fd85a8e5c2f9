use morse_boundary::catalog;
use morse_boundary::chart::Point;
use morse_boundary::critical::{locate, CriticalSet};
use morse_boundary::flow::{count_connecting_orbits, integrate, orbits_from, Termination};
use morse_boundary::pseudo_gradient::{build_adapted, PseudoGradientField};
use morse_boundary::tolerances::Tolerances;

fn setup(name: &str, tol: &Tolerances) -> (PseudoGradientField, CriticalSet) {
    let e = catalog::get(name).unwrap();
    let crit = locate(&e.field, &e.chart, tol).unwrap();
    let (x, _) = build_adapted(&e.field, &e.chart, &crit, false, None, tol).unwrap();
    (x, crit)
}

fn id_at(crit: &CriticalSet, loc: &[f64]) -> usize {
    crit.points
        .iter()
        .find(|p| p.point.coords.iter().zip(loc).all(|(a, b)| (a - b).abs() < 1e-6))
        .unwrap_or_else(|| panic!("no critical point at {loc:?}"))
        .id
}

#[test]
fn trajectories_reach_the_unique_sink_and_descend() {
    let tol = Tolerances::default();
    for (name, start, sink) in [("disk", [0.5, 0.0], [0.0, -1.0]), ("annulus", [0.0, 1.5], [0.0, -2.0])] {
        let (x, crit) = setup(name, &tol);
        let traj = integrate(&x, &Point::new(&start), &tol).unwrap();
        assert_eq!(traj.termination, Termination::ConvergedTo(id_at(&crit, &sink)), "{name}");
        let values: Vec<f64> = traj.samples.iter().map(|(_, p)| x.field.value(p.as_slice())).collect();
        assert!(values.windows(2).all(|w| w[1] < w[0] + 1e-12), "{name}: f not monotone");
    }
}

#[test]
fn start_at_rest_point_is_trivial() {
    let tol = Tolerances::default();
    let (x, crit) = setup("annulus", &tol);
    let id = id_at(&crit, &[0.0, -2.0]);
    let traj = integrate(&x, &crit.get(id).point, &tol).unwrap();
    assert_eq!(traj.samples.len(), 1);
    assert_eq!(traj.termination, Termination::ConvergedTo(id));
}

#[test]
fn annulus_saddle_orbits_cancel() {
    let tol = Tolerances::default();
    let (x, crit) = setup("annulus", &tol);
    let c = count_connecting_orbits(&x, id_at(&crit, &[0.0, 1.0]), id_at(&crit, &[0.0, -2.0]), &tol).unwrap();
    assert_eq!(c.orbits.len(), 2);
    assert_eq!(c.orbits[0].sign, -c.orbits[1].sign);
    assert_eq!((c.m, c.m_or), (0, 0));
}

#[test]
fn moebius_orbits_are_twisted() {
    let tol = Tolerances::default();
    let (x, crit) = setup("moebius", &tol);
    let c = count_connecting_orbits(&x, id_at(&crit, &[0.0, 0.0]), id_at(&crit, &[std::f64::consts::PI, -1.0]), &tol).unwrap();
    assert_eq!(c.orbits.len(), 2);
    assert_eq!(c.m, 0);
    assert_eq!(c.m_or.abs(), 2);
    assert_eq!(c.orbits.iter().filter(|o| o.w1 == -1).count(), 1);
}

#[test]
fn dome_maximum_hits_boundary_saddle_once() {
    let tol = Tolerances::default();
    let (x, crit) = setup("tilted_dome", &tol);
    let c = count_connecting_orbits(&x, id_at(&crit, &[0.0, 0.25]), id_at(&crit, &[0.0, 1.0]), &tol).unwrap();
    assert_eq!(c.orbits.len(), 1, "{:?}", c.orbits.iter().map(|o| o.parameter).collect::<Vec<_>>());
    assert_eq!(c.m.abs(), 1);
}

#[test]
fn halving_launch_radius_keeps_counts() {
    let tol = Tolerances::default();
    let half = Tolerances { r_launch: tol.r_launch / 2.0, ..tol.clone() };
    for name in ["annulus", "moebius"] {
        let (x, crit) = setup(name, &tol);
        for p in crit.points.iter().filter(|p| p.is_rest_point() && p.grading == 1) {
            let a = orbits_from(&x, p.id, &tol).unwrap();
            let b = orbits_from(&x, p.id, &half).unwrap();
            let key = |v: &[morse_boundary::flow::ConnectingOrbit]| v.iter().map(|o| (o.to, o.sign, o.w1)).collect::<Vec<_>>();
            assert_eq!(key(&a), key(&b), "{name}");
            assert!(a.iter().all(|o| matches!(o.trajectory.termination, Termination::ConvergedTo(_))));
        }
    }
}
