//! Built-in manifolds with Morse functions and reference homology.

use std::f64::consts::PI;

use serde::Serialize;

use crate::algebra::{HomologyResult, IntPolynomial};
use crate::chart::{ChartModel, Constraint};
use crate::critical::CriticalKind;
use crate::error::{MorseError, Result};
use crate::field::{field_from_fns, MorseField};

/// A critical point the entry is known to have.
#[derive(Debug, Clone, Serialize)]
pub struct ExpectedPoint {
    pub kind: CriticalKind,
    pub location: Vec<f64>,
}

/// Reference groups for the entry, each as Betti numbers plus torsion.
#[derive(Debug, Clone, Serialize)]
pub struct References {
    /// `H_*(M; Z)`
    pub absolute: HomologyResult,
    /// `H_*(M; Z^or)`
    pub absolute_twisted: HomologyResult,
    /// `H^*(M, dM; Z^or)`
    pub relative_cohomology_twisted: HomologyResult,
    /// `H^*(M, dM; Z)`
    pub relative_cohomology: HomologyResult,
    /// `H_*(M, dM; Z^or)`
    pub relative_homology_twisted: HomologyResult,
    /// `H_*(M, dM; Z)`
    pub relative_homology: HomologyResult,
}

impl References {
    pub fn poincare_absolute(&self) -> IntPolynomial {
        IntPolynomial::from_counts(&self.absolute.betti)
    }

    /// Poincaré polynomial of `H^*(M, dM; Z^or)`.
    pub fn poincare_relative_twisted(&self) -> IntPolynomial {
        IntPolynomial::from_counts(&self.relative_cohomology_twisted.betti)
    }
}

#[derive(Clone)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub chart: ChartModel,
    pub field: MorseField,
    pub expected: Vec<ExpectedPoint>,
    pub reference: References,
    pub euler_characteristic: i64,
    pub orientable: bool,
}

impl CatalogEntry {
    pub fn dim(&self) -> usize {
        self.chart.dim()
    }
}

const NAMES: [&str; 5] = ["interval", "disk", "annulus", "moebius", "tilted_dome"];

pub fn list() -> Vec<&'static str> {
    NAMES.to_vec()
}

pub fn get(name: &str) -> Result<CatalogEntry> {
    match name {
        "interval" => Ok(interval()),
        "disk" => Ok(disk()),
        "annulus" => Ok(annulus()),
        "moebius" => Ok(moebius()),
        "tilted_dome" => Ok(tilted_dome()),
        other => Err(MorseError::UnknownEntry(other.to_string())),
    }
}

fn n_point(boundary_index: usize, location: &[f64]) -> ExpectedPoint {
    ExpectedPoint { kind: CriticalKind::BoundaryN { boundary_index }, location: location.to_vec() }
}

fn d_point(boundary_index: usize, location: &[f64]) -> ExpectedPoint {
    ExpectedPoint { kind: CriticalKind::BoundaryD { boundary_index }, location: location.to_vec() }
}

fn c_point(index: usize, location: &[f64]) -> ExpectedPoint {
    ExpectedPoint { kind: CriticalKind::Interior { index }, location: location.to_vec() }
}

/// All four flavors coincide for orientable entries.
fn orientable_refs(absolute: &[usize], relative: &[usize]) -> References {
    References {
        absolute: HomologyResult::free(absolute),
        absolute_twisted: HomologyResult::free(absolute),
        relative_cohomology_twisted: HomologyResult::free(relative),
        relative_cohomology: HomologyResult::free(relative),
        relative_homology_twisted: HomologyResult::free(relative),
        relative_homology: HomologyResult::free(relative),
    }
}

fn height() -> MorseField {
    field_from_fns(|x| x[1], |_| vec![0.0, 1.0], |_| vec![0.0; 4])
}

fn unit_disk_chart() -> ChartModel {
    ChartModel::region(vec![-1.0, -1.0], vec![1.0, 1.0], vec![Constraint::inside_circle("unit circle", [0.0, 0.0], 1.0)])
}

fn interval() -> CatalogEntry {
    CatalogEntry {
        name: "interval",
        description: "[0,1] with f = x",
        chart: ChartModel::region(
            vec![-0.25],
            vec![1.25],
            vec![Constraint::half_line("left end", 0.0, -1.0), Constraint::half_line("right end", 1.0, 1.0)],
        ),
        field: field_from_fns(|x| x[0], |_| vec![1.0], |_| vec![0.0]),
        expected: vec![n_point(0, &[0.0]), d_point(0, &[1.0])],
        reference: orientable_refs(&[1, 0], &[0, 1]),
        euler_characteristic: 1,
        orientable: true,
    }
}

fn disk() -> CatalogEntry {
    CatalogEntry {
        name: "disk",
        description: "unit disk with f = y",
        chart: unit_disk_chart(),
        field: height(),
        expected: vec![n_point(0, &[0.0, -1.0]), d_point(1, &[0.0, 1.0])],
        reference: orientable_refs(&[1, 0, 0], &[0, 0, 1]),
        euler_characteristic: 1,
        orientable: true,
    }
}

fn annulus() -> CatalogEntry {
    CatalogEntry {
        name: "annulus",
        description: "1 <= x^2 + y^2 <= 4 with f = y",
        chart: ChartModel::region(
            vec![-2.0, -2.0],
            vec![2.0, 2.0],
            vec![
                Constraint::outside_circle("inner circle", [0.0, 0.0], 1.0),
                Constraint::inside_circle("outer circle", [0.0, 0.0], 2.0),
            ],
        ),
        field: height(),
        expected: vec![n_point(0, &[0.0, -2.0]), d_point(0, &[0.0, -1.0]), n_point(1, &[0.0, 1.0]), d_point(1, &[0.0, 2.0])],
        reference: orientable_refs(&[1, 1, 0], &[0, 1, 1]),
        euler_characteristic: 0,
        orientable: true,
    }
}

fn moebius() -> CatalogEntry {
    let field = field_from_fns(
        |x| x[1] * (0.5 * x[0]).sin(),
        |x| vec![0.5 * x[1] * (0.5 * x[0]).cos(), (0.5 * x[0]).sin()],
        |x| {
            let (s, c) = (0.5 * x[0]).sin_cos();
            vec![-0.25 * x[1] * s, 0.5 * c, 0.5 * c, 0.0]
        },
    );
    CatalogEntry {
        name: "moebius",
        description: "strip [0,2pi) x [-1,1] with (u + 2pi, -v) ~ (u, v) and f = v sin(u/2)",
        chart: ChartModel::quotient(2.0 * PI, -1.0, 1.0, -1),
        field,
        expected: vec![n_point(0, &[PI, -1.0]), c_point(1, &[0.0, 0.0]), d_point(1, &[PI, 1.0])],
        reference: References {
            absolute: HomologyResult::free(&[1, 1, 0]),
            absolute_twisted: HomologyResult::free(&[0, 0, 0]).with_torsion(0, &[2]),
            relative_cohomology_twisted: HomologyResult::free(&[0, 1, 1]),
            relative_cohomology: HomologyResult::free(&[0, 0, 0]).with_torsion(2, &[2]),
            relative_homology_twisted: HomologyResult::free(&[0, 1, 1]),
            relative_homology: HomologyResult::free(&[0, 0, 0]).with_torsion(1, &[2]),
        },
        euler_characteristic: 0,
        orientable: false,
    }
}

fn tilted_dome() -> CatalogEntry {
    CatalogEntry {
        name: "tilted_dome",
        description: "unit disk with f = 1 - x^2 - y^2 + y/2",
        chart: unit_disk_chart(),
        field: field_from_fns(
            |x| 1.0 - x[0] * x[0] - x[1] * x[1] + 0.5 * x[1],
            |x| vec![-2.0 * x[0], -2.0 * x[1] + 0.5],
            |_| vec![-2.0, 0.0, 0.0, -2.0],
        ),
        expected: vec![n_point(0, &[0.0, -1.0]), n_point(1, &[0.0, 1.0]), c_point(2, &[0.0, 0.25])],
        reference: orientable_refs(&[1, 0, 0], &[0, 0, 1]),
        euler_characteristic: 1,
        orientable: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::duality_symmetry_check;

    #[test]
    fn names_and_lookup() {
        assert_eq!(list().len(), 5);
        assert!(matches!(get("torus"), Err(MorseError::UnknownEntry(_))));
        let m = get("moebius").unwrap();
        assert_eq!(m.chart.flip(), -1);
        assert_eq!(m.expected.len(), 3);
        let d = get("disk").unwrap();
        assert!(d.expected.iter().all(|p| !p.kind.is_interior()));
    }

    #[test]
    fn reference_consistency() {
        for name in list() {
            let e = get(name).unwrap();
            let r = &e.reference;
            assert_eq!(r.absolute.euler_characteristic(), e.euler_characteristic, "{name}");
            let twisted_rel = IntPolynomial::from_counts(&r.relative_homology_twisted.betti);
            assert!(duality_symmetry_check(&r.poincare_absolute(), &twisted_rel, e.dim()), "{name}");
            assert!(duality_symmetry_check(&r.poincare_absolute(), &r.poincare_relative_twisted(), e.dim()), "{name}");
        }
    }

    #[test]
    fn analytic_derivatives_match_differences() {
        for name in list() {
            let e = get(name).unwrap();
            let pts: Vec<_> = [[0.3, -0.2], [0.1, 0.5], [2.0, 0.7], [5.5, -0.9]]
                .iter()
                .map(|p| crate::chart::Vector::from_column_slice(&p[..e.dim()]))
                .collect();
            assert!(e.field.gradient_fd_error(&pts, 1e-6) < 1e-8, "{name}");
            assert!(e.field.hessian_fd_error(&pts, 1e-6) < 1e-8, "{name}");
        }
        let m = get("moebius").unwrap();
        let pts: Vec<_> = (0..20).map(|i| crate::chart::Vector::from_vec(vec![0.3 * i as f64, -0.9 + 0.09 * i as f64])).collect();
        assert!(m.field.deck_defect(&m.chart, &pts) < 1e-12);
    }
}
