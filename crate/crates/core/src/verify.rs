//! The numbered acceptance criteria, run over the whole catalog.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::{homology, smith_normal_form, IntMatrix, IntPolynomial};
use crate::catalog::{self, CatalogEntry};
use crate::chart::Vector;
use crate::critical::CriticalSet;
use crate::error::Result;
use crate::flow::IncidenceCount;
use crate::pipeline::{analyze, build_fields, compare_across_seeds, Flavor, MorsePackage, Side};
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub number: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

struct Run {
    entry: CatalogEntry,
    package: Result<MorsePackage>,
}

fn all_ok(items: impl IntoIterator<Item = (String, bool)>) -> (bool, String) {
    let mut failures = Vec::new();
    let mut count = 0;
    for (label, ok) in items {
        count += 1;
        if !ok {
            failures.push(label);
        }
    }
    if failures.is_empty() {
        (true, format!("{count} checks"))
    } else {
        (false, format!("failed: {}", failures.join("; ")))
    }
}

fn homology_matches(runs: &[Run], side: Side, flavor: Flavor, only: Option<&str>) -> (bool, String) {
    all_ok(runs.iter().filter(|r| only.is_none_or(|n| n == r.entry.name)).map(|r| match &r.package {
        Ok(p) => {
            let c = p.complex(side, flavor);
            (format!("{} {} = {:?}/{:?}", r.entry.name, c.name, c.homology.betti, c.homology.torsion), c.matches)
        }
        Err(e) => (format!("{}: {e}", r.entry.name), false),
    }))
}

fn unique(crit: &CriticalSet, label: &str, grading: usize) -> Option<usize> {
    let ids: Vec<usize> = crit.points.iter().filter(|p| p.kind.label() == label && p.grading == grading).map(|p| p.id).collect();
    (ids.len() == 1).then(|| ids[0])
}

fn incidence(p: &MorsePackage, from: (&str, usize), to: (&str, usize)) -> Option<IncidenceCount> {
    let a = unique(&p.crit, from.0, from.1)?;
    let b = unique(&p.crit, to.0, to.1)?;
    Some(IncidenceCount::from_orbits(a, b, &p.fields.orbits))
}

fn package<'a>(runs: &'a [Run], name: &str) -> Option<&'a MorsePackage> {
    runs.iter().find(|r| r.entry.name == name).and_then(|r| r.package.as_ref().ok())
}

/// Invariant factors from gcds of all `k × k` minors, for small matrices.
pub fn determinantal_invariant_factors(m: &[Vec<i64>]) -> Vec<i64> {
    use num_integer::Integer;
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut divisors = vec![1i64];
    for k in 1..=rows.min(cols) {
        let mut g = 0i64;
        for rs in subsets(rows, k) {
            for cs in subsets(cols, k) {
                let minor: Vec<Vec<i64>> = rs.iter().map(|&i| cs.iter().map(|&j| m[i][j]).collect()).collect();
                g = g.gcd(&det(&minor));
            }
        }
        if g == 0 {
            break;
        }
        divisors.push(g);
    }
    divisors.windows(2).map(|w| w[1] / w[0]).collect()
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    (0..n)
        .flat_map(|last| {
            subsets(last, k - 1).into_iter().map(move |mut s| {
                s.push(last);
                s
            })
        })
        .collect()
}

fn det(m: &[Vec<i64>]) -> i64 {
    if m.len() == 1 {
        return m[0][0];
    }
    (0..m.len())
        .map(|j| {
            let minor: Vec<Vec<i64>> =
                m[1..].iter().map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, v)| *v).collect()).collect();
            let s = if j % 2 == 0 { 1 } else { -1 };
            s * m[0][j] * det(&minor)
        })
        .sum()
}

/// Compares the Smith form with the determinant-divisor oracle on random
/// 4×4 matrices with entries in `[-5, 5]`; returns the number of mismatches.
pub fn snf_oracle_mismatches(samples: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .filter(|_| {
            let rows: Vec<Vec<i64>> = (0..4).map(|_| (0..4).map(|_| rng.gen_range(-5..=5)).collect()).collect();
            let snf = smith_normal_form(&IntMatrix::from_rows(&rows));
            let got: Vec<i64> = snf.diagonal.iter().map(|d| i64::try_from(d).expect("small entries")).collect();
            got != determinantal_invariant_factors(&rows)
        })
        .count()
}

/// Runs all criteria against the given entries.
pub fn run_entries(entries: Vec<CatalogEntry>, seed: u64, tol: &Tolerances) -> Vec<CriterionResult> {
    let runs: Vec<Run> = entries.into_iter().map(|entry| Run { package: analyze(&entry, seed, tol), entry }).collect();
    let mut out = Vec::new();
    let mut push = |number, name, (passed, detail): (bool, String)| out.push(CriterionResult { number, name, passed, detail });

    push(1, "untwisted Neumann homology", homology_matches(&runs, Side::Neumann, Flavor::Untwisted, None));

    let twisted = homology_matches(&runs, Side::Neumann, Flavor::Orientation, Some("moebius"));
    let relative = homology_matches(&runs, Side::Dual, Flavor::Untwisted, Some("moebius"));
    push(2, "twisted Moebius homology", (twisted.0 && relative.0, format!("{}; {}", twisted.1, relative.1)));

    push(3, "Dirichlet cohomology", homology_matches(&runs, Side::Dirichlet, Flavor::Untwisted, None));

    push(
        4,
        "square zero",
        all_ok(runs.iter().flat_map(|r| match &r.package {
            Ok(p) => p
                .complexes
                .iter()
                .flat_map(|c| {
                    let cx = &c.complex;
                    (1..=cx.top).map(move |k| {
                        let square = cx.map(k + 1).mul(cx.map(k));
                        (format!("{} {} degree {k}", r.entry.name, c.name), square.is_zero())
                    })
                })
                .collect::<Vec<_>>(),
            Err(e) => vec![(format!("{}: {e}", r.entry.name), false)],
        })),
    );

    push(
        5,
        "Morse inequalities",
        all_ok(runs.iter().flat_map(|r| match &r.package {
            Ok(p) => {
                let q = &p.polynomials;
                let mut v = vec![
                    (format!("{} Q^N", r.entry.name), q.quotient_neumann.is_some()),
                    (format!("{} Q^D", r.entry.name), q.quotient_dirichlet.is_some()),
                ];
                if r.entry.name == "tilted_dome" {
                    v.push(("tilted_dome Q^N = T".into(), q.quotient_neumann == Some(IntPolynomial::new(vec![0, 1]))));
                }
                v
            }
            Err(e) => vec![(format!("{}: {e}", r.entry.name), false)],
        })),
    );

    let mut orbit_checks = Vec::new();
    match package(&runs, "annulus").and_then(|p| incidence(p, ("N", 1), ("N", 0))) {
        Some(c) => orbit_checks.push((
            format!("annulus m = {} from {} orbits", c.m, c.orbits.len()),
            c.m == 0 && c.orbits.len() == 2 && c.orbits[0].sign == -c.orbits[1].sign,
        )),
        None => orbit_checks.push(("annulus incidence missing".into(), false)),
    }
    match package(&runs, "moebius").and_then(|p| incidence(p, ("C", 1), ("N", 0))) {
        Some(c) => orbit_checks.push((
            format!("moebius m = {}, m_or = {} from {} orbits", c.m, c.m_or, c.orbits.len()),
            c.m == 0 && c.m_or.abs() == 2 && c.orbits.len() == 2,
        )),
        None => orbit_checks.push(("moebius incidence missing".into(), false)),
    }
    match package(&runs, "tilted_dome").and_then(|p| incidence(p, ("C", 2), ("N", 1))) {
        Some(c) => orbit_checks.push((format!("tilted_dome m = {} from {} orbits", c.m, c.orbits.len()), c.m.abs() == 1)),
        None => orbit_checks.push(("tilted_dome incidence missing".into(), false)),
    }
    push(6, "forced orbit counts", all_ok(orbit_checks));

    let pairing = package(&runs, "annulus").and_then(|p| p.pairing.iter().find(|m| m.degree == 1).cloned());
    push(
        7,
        "annulus pairing",
        match pairing {
            Some(m) => {
                let det = m.small_determinant();
                (det.is_some_and(|d| d.abs() == 1) && m.entries.len() == 1, format!("{:?}", m.entries))
            }
            None => (false, "no pairing matrix".into()),
        },
    );

    push(
        8,
        "double manifold",
        all_ok(runs.iter().flat_map(|r| match &r.package {
            Ok(p) => {
                let mut v = vec![(format!("{} sum identity", r.entry.name), p.double.sum_identity)];
                if r.entry.orientable {
                    v.push((format!("{} quotient {:?}", r.entry.name, p.double.quotient_error), p.double.quotient.is_some()));
                }
                v
            }
            Err(e) => vec![(format!("{}: {e}", r.entry.name), false)],
        })),
    );

    push(
        9,
        "seed invariance",
        all_ok(runs.iter().map(|r| {
            let label = r.entry.name.to_string();
            let Ok(p) = &r.package else { return (label, false) };
            let mut results = Vec::new();
            for c in &p.complexes {
                results.push((seed, c.name.clone(), c.homology.clone()));
            }
            for s in [seed + 1, seed + 2] {
                match build_fields(&r.entry.field, &r.entry.chart, &p.crit, s, tol) {
                    Ok(f) => {
                        for side in [Side::Neumann, Side::Dirichlet, Side::Dual] {
                            for flavor in [Flavor::Untwisted, Flavor::Orientation] {
                                match f.complex(side, flavor) {
                                    Ok(cx) => results.push((s, crate::pipeline::complex_name(side, flavor), homology(&cx))),
                                    Err(e) => return (format!("{label} seed {s}: {e}"), false),
                                }
                            }
                        }
                    }
                    Err(e) => return (format!("{label} seed {s}: {e}"), false),
                }
            }
            match compare_across_seeds(&results) {
                Ok(()) => (label, true),
                Err(e) => (format!("{label}: {e}"), false),
            }
        })),
    );

    let mut hygiene = Vec::new();
    for r in &runs {
        match &r.package {
            Ok(p) => {
                hygiene.push((format!("{} certificate X", r.entry.name), p.fields.certificate.passed));
                hygiene.push((format!("{} certificate X-", r.entry.name), p.fields.certificate_minus.passed));
            }
            Err(e) => hygiene.push((format!("{}: {e}", r.entry.name), false)),
        }
        let pts: Vec<Vector> = p_samples(r.entry.dim());
        hygiene.push((format!("{} gradient", r.entry.name), r.entry.field.gradient_fd_error(&pts, 1e-6) < 1e-7));
        hygiene.push((format!("{} hessian", r.entry.name), r.entry.field.hessian_fd_error(&pts, 1e-6) < 1e-7));
    }
    let mismatches = snf_oracle_mismatches(1000, seed);
    hygiene.push((format!("{mismatches} Smith form mismatches in 1000"), mismatches == 0));
    push(10, "numerical hygiene", all_ok(hygiene));
    out
}

fn p_samples(dim: usize) -> Vec<Vector> {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    (0..32).map(|_| Vector::from_iterator(dim, (0..dim).map(|_| rng.gen_range(-0.9..0.9)))).collect()
}

/// Runs all criteria over the built-in catalog.
pub fn run(seed: u64, tol: &Tolerances) -> Vec<CriterionResult> {
    let entries = catalog::list().into_iter().map(|n| catalog::get(n).expect("catalog names resolve")).collect();
    run_entries(entries, seed, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_oracle_small_cases() {
        assert_eq!(determinantal_invariant_factors(&[vec![2, 0], vec![0, 3]]), vec![1, 6]);
        assert_eq!(determinantal_invariant_factors(&[vec![2, 4], vec![4, 8]]), vec![2]);
        assert_eq!(determinantal_invariant_factors(&[vec![0, 0], vec![0, 0]]), Vec::<i64>::new());
    }
}
