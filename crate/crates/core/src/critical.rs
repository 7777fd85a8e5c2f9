//! Location and classification of critical points: interior points of `f`,
//! and critical points of `f|dM` split into type N and type D by the sign
//! of `<df, n>` against the outward normal.

use nalgebra::SymmetricEigen;
use rayon::prelude::*;
use serde::Serialize;

use crate::chart::{BoundaryComponent, ChartModel, Point, Vector};
use crate::error::{MorseError, Result};
use crate::field::{tangential_jet_on_piece, validate_morse, MorseField, ValidationReport};
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "type")]
pub enum CriticalKind {
    Interior {
        index: usize,
    },
    /// Type N: `<df, n> < 0`.
    BoundaryN {
        boundary_index: usize,
    },
    /// Type D: `<df, n> > 0`; the grading is `boundary_index + 1`.
    BoundaryD {
        boundary_index: usize,
    },
}

impl CriticalKind {
    pub fn grading(&self) -> usize {
        match *self {
            CriticalKind::Interior { index } => index,
            CriticalKind::BoundaryN { boundary_index } => boundary_index,
            CriticalKind::BoundaryD { boundary_index } => boundary_index + 1,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            CriticalKind::Interior { .. } => "C",
            CriticalKind::BoundaryN { .. } => "N",
            CriticalKind::BoundaryD { .. } => "D",
        }
    }

    pub fn is_interior(&self) -> bool {
        matches!(self, CriticalKind::Interior { .. })
    }

    /// Kind of the same point for `-f` on an `n`-manifold.
    pub fn upside_down(&self, n: usize) -> Self {
        match *self {
            CriticalKind::Interior { index } => CriticalKind::Interior { index: n - index },
            CriticalKind::BoundaryN { boundary_index } => CriticalKind::BoundaryD { boundary_index: n - 1 - boundary_index },
            CriticalKind::BoundaryD { boundary_index } => CriticalKind::BoundaryN { boundary_index: n - 1 - boundary_index },
        }
    }
}

#[derive(Debug, Clone)]
pub struct CriticalPoint {
    pub id: usize,
    pub point: Point,
    pub value: f64,
    pub kind: CriticalKind,
    pub grading: usize,
    pub unstable_dim: usize,
    /// Ordered frame spanning the unstable directions, fixed at creation.
    pub orientation_ref: Vec<Vector>,
    /// Boundary piece for boundary points.
    pub piece: Option<usize>,
}

impl CriticalPoint {
    /// Whether the point is a zero of an adapted pseudo-gradient (interior or type N).
    pub fn is_rest_point(&self) -> bool {
        !matches!(self.kind, CriticalKind::BoundaryD { .. })
    }
}

#[derive(Debug, Clone)]
pub struct CriticalSet {
    pub dim: usize,
    /// Sorted by strictly increasing value.
    pub points: Vec<CriticalPoint>,
    pub validation: Option<ValidationReport>,
}

impl CriticalSet {
    pub fn get(&self, id: usize) -> &CriticalPoint {
        self.points.iter().find(|p| p.id == id).expect("known critical id")
    }

    fn select(&self, k: usize, pred: impl Fn(&CriticalKind) -> bool) -> Vec<&CriticalPoint> {
        self.points.iter().filter(|p| p.grading == k && pred(&p.kind)).collect()
    }

    pub fn c(&self, k: usize) -> Vec<&CriticalPoint> {
        self.select(k, |c| c.is_interior())
    }

    pub fn n(&self, k: usize) -> Vec<&CriticalPoint> {
        self.select(k, |c| matches!(c, CriticalKind::BoundaryN { .. }))
    }

    pub fn d(&self, k: usize) -> Vec<&CriticalPoint> {
        self.select(k, |c| matches!(c, CriticalKind::BoundaryD { .. }))
    }

    /// Per-degree counts `(|C_k|, |N_k|, |D_k|)` for `k = 0..=dim`.
    pub fn counts(&self) -> Vec<(usize, usize, usize)> {
        (0..=self.dim).map(|k| (self.c(k).len(), self.n(k).len(), self.d(k).len())).collect()
    }

    /// Generators `C_k ∪ N_k`, ordered by value.
    pub fn neumann_generators(&self, k: usize) -> Vec<usize> {
        self.select(k, |c| !matches!(c, CriticalKind::BoundaryD { .. })).iter().map(|p| p.id).collect()
    }

    /// Generators `C_k ∪ D_k`, ordered by value.
    pub fn dirichlet_generators(&self, k: usize) -> Vec<usize> {
        self.select(k, |c| !matches!(c, CriticalKind::BoundaryN { .. })).iter().map(|p| p.id).collect()
    }

    /// The same points seen by `-f`: indices and types swapped, values
    /// negated, orientation frames recomputed from `-f`. Ids are preserved.
    pub fn for_negative(&self, neg_field: &MorseField, chart: &ChartModel) -> CriticalSet {
        let mut points: Vec<CriticalPoint> = self
            .points
            .iter()
            .map(|p| {
                let kind = p.kind.upside_down(self.dim);
                let orientation_ref = unstable_frame(neg_field, chart, &p.point, kind, p.piece);
                CriticalPoint {
                    id: p.id,
                    point: p.point.clone(),
                    value: -p.value,
                    kind,
                    grading: kind.grading(),
                    unstable_dim: kind.grading(),
                    orientation_ref,
                    piece: p.piece,
                }
            })
            .collect();
        points.sort_by(|a, b| a.value.total_cmp(&b.value));
        CriticalSet { dim: self.dim, points, validation: self.validation.clone() }
    }
}

/// Eigenvectors for the negative eigenvalues of a symmetric form, ordered by
/// ascending eigenvalue, normalized, first nonzero coordinate positive.
pub fn negative_frame(h: &nalgebra::DMatrix<f64>) -> Vec<Vector> {
    let eig = SymmetricEigen::new(h.clone());
    let mut pairs: Vec<(f64, Vector)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, l)| **l < 0.0)
        .map(|(i, l)| (*l, eig.eigenvectors.column(i).into_owned()))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().map(|(_, v)| fix_sign(v.normalize())).collect()
}

pub fn fix_sign(v: Vector) -> Vector {
    match v.iter().find(|c| c.abs() > 1e-12) {
        Some(c) if *c < 0.0 => -v,
        _ => v,
    }
}

fn negative_count(h: &nalgebra::DMatrix<f64>) -> usize {
    SymmetricEigen::new(h.clone()).eigenvalues.iter().filter(|l| **l < 0.0).count()
}

/// Orientation frame of the unstable directions at a critical point.
pub fn unstable_frame(
    field: &MorseField,
    chart: &ChartModel,
    p: &Point,
    kind: CriticalKind,
    piece: Option<usize>,
) -> Vec<Vector> {
    match kind {
        CriticalKind::Interior { .. } => negative_frame(&field.hessian(p.as_slice())),
        _ => {
            let jet = tangential_jet_on_piece(field, chart, piece.expect("boundary point"), p.as_slice());
            match jet.tangent {
                Some(t) if jet.hessian < 0.0 => vec![fix_sign(t)],
                _ => Vec::new(),
            }
        }
    }
}

fn newton_critical(field: &MorseField, seed: &Vector, tol: &Tolerances) -> Option<Vector> {
    let mut x = seed.clone();
    let mut g = field.gradient(x.as_slice());
    for _ in 0..tol.newton_max_iter {
        if g.norm() < tol.tol_crit {
            return Some(x);
        }
        let h = field.hessian(x.as_slice());
        let step = h.lu().solve(&g)?;
        if !step.iter().all(|s| s.is_finite()) {
            return None;
        }
        let mut damping = 1.0;
        let mut accepted = false;
        for _ in 0..8 {
            let trial = &x - &step * damping;
            let tg = field.gradient(trial.as_slice());
            if tg.norm() < g.norm() || damping == 1.0 && tg.norm() < tol.tol_crit * 10.0 {
                x = trial;
                g = tg;
                accepted = true;
                break;
            }
            damping *= 0.5;
        }
        if !accepted {
            // accept the full step anyway; overshoot protection already tried
            x -= &step;
            g = field.gradient(x.as_slice());
        }
    }
    (g.norm() < tol.tol_crit).then_some(x)
}

fn dedupe(chart: &ChartModel, pts: Vec<Vector>, radius: f64) -> Vec<Vector> {
    let mut out: Vec<Vector> = Vec::new();
    for p in pts {
        let dup = out.iter().any(|q| {
            let (rep, _) = chart.nearest_representative(q, &p);
            (rep - q).norm() < radius
        });
        if !dup {
            out.push(p);
        }
    }
    out
}

fn seed_grid(chart: &ChartModel, density: usize) -> Vec<Vector> {
    let (lo, hi) = chart.bounding_box();
    let n = lo.len();
    let total = density.pow(n as u32);
    (0..total)
        .map(|mut idx| {
            let mut c = Vec::with_capacity(n);
            for axis in 0..n {
                let i = idx % density;
                idx /= density;
                c.push(lo[axis] + (hi[axis] - lo[axis]) * (i as f64 + 0.5) / density as f64);
            }
            Vector::from_vec(c)
        })
        .collect()
}

/// Interior critical points by Newton iteration from a uniform seed grid.
pub fn find_interior_critical(field: &MorseField, chart: &ChartModel, tol: &Tolerances) -> Result<Vec<CriticalPoint>> {
    let seeds = seed_grid(chart, tol.seed_grid_density);
    let converged: Vec<Vector> = seeds
        .par_iter()
        .filter_map(|s| newton_critical(field, s, tol))
        .map(|x| chart.canonicalize(&x).0)
        .filter(|x| chart.contains(x.as_slice(), tol.tol_geom))
        .filter(|x| chart.depths(x.as_slice()).iter().all(|d| *d > tol.tol_geom))
        .collect();
    let unique = dedupe(chart, converged, 1e-6);
    let mut out = Vec::new();
    for x in unique {
        let h = field.hessian(x.as_slice());
        if h.determinant().abs() < tol.tol_nondeg {
            return Err(MorseError::DegenerateCritical(x.as_slice().to_vec()));
        }
        let index = negative_count(&h);
        let kind = CriticalKind::Interior { index };
        let point = Point { coords: x };
        out.push(CriticalPoint {
            id: 0,
            value: field.value(point.as_slice()),
            orientation_ref: unstable_frame(field, chart, &point, kind, None),
            point,
            kind,
            grading: index,
            unstable_dim: index,
            piece: None,
        });
    }
    Ok(out)
}

fn classify_boundary(field: &MorseField, chart: &ChartModel, piece: usize, x: Vector, tol: &Tolerances) -> Result<CriticalPoint> {
    let jet = tangential_jet_on_piece(field, chart, piece, x.as_slice());
    if jet.normal_derivative.abs() <= tol.tol_type {
        return Err(MorseError::TypeUndetermined(x.as_slice().to_vec()));
    }
    let boundary_index = if chart.dim() == 1 {
        0
    } else {
        if jet.hessian.abs() < tol.tol_nondeg {
            return Err(MorseError::DegenerateCritical(x.as_slice().to_vec()));
        }
        usize::from(jet.hessian < 0.0)
    };
    let kind = if jet.normal_derivative < 0.0 {
        CriticalKind::BoundaryN { boundary_index }
    } else {
        CriticalKind::BoundaryD { boundary_index }
    };
    let point = Point { coords: x };
    Ok(CriticalPoint {
        id: 0,
        value: field.value(point.as_slice()),
        orientation_ref: unstable_frame(field, chart, &point, kind, Some(piece)),
        point,
        kind,
        grading: kind.grading(),
        unstable_dim: kind.grading(),
        piece: Some(piece),
    })
}

/// Critical points of `f|dM`, classified as type N or D.
pub fn find_boundary_critical(field: &MorseField, chart: &ChartModel, tol: &Tolerances) -> Result<Vec<CriticalPoint>> {
    let mut found: Vec<(usize, Vector)> = Vec::new();
    for (piece, component) in chart.boundary_components() {
        match component {
            BoundaryComponent::Point(x) => found.push((piece, x)),
            BoundaryComponent::Curve(curve) => {
                let samples = tol.boundary_samples.max(8);
                let step = curve.period / samples as f64;
                // derivative of f along the parametrization, in raw coordinates
                let along = |t: f64| {
                    let h = 1e-6;
                    let x = (curve.param)(t);
                    let dx = ((curve.param)(t + h) - (curve.param)(t - h)) / (2.0 * h);
                    field.gradient(x.as_slice()).dot(&dx)
                };
                let thetas: Vec<f64> = (0..=samples).map(|i| i as f64 * step).collect();
                let vals: Vec<f64> = thetas.iter().map(|t| along(*t)).collect();
                let mut roots = Vec::new();
                for i in 0..samples {
                    if vals[i].abs() < tol.tol_crit {
                        roots.push(thetas[i]);
                    } else if vals[i] * vals[i + 1] < 0.0 && vals[i + 1].abs() >= tol.tol_crit {
                        let (mut a, mut b) = (thetas[i], thetas[i + 1]);
                        let fa = vals[i];
                        for _ in 0..100 {
                            let m = 0.5 * (a + b);
                            if along(m) * fa > 0.0 {
                                a = m;
                            } else {
                                b = m;
                            }
                            if b - a < 1e-14 {
                                break;
                            }
                        }
                        roots.push(0.5 * (a + b));
                    }
                }
                if roots.len() > samples / 4 {
                    let x = (curve.param)(roots[0]);
                    return Err(MorseError::DegenerateCritical(x.as_slice().to_vec()));
                }
                for t in roots {
                    let (x, _) = chart.canonicalize(&(curve.param)(t));
                    let piece = if chart.is_quotient() {
                        chart.collar_frame(x.as_slice()).expect("strip has edges").piece
                    } else {
                        piece
                    };
                    found.push((piece, chart.project_to_piece(piece, &x)));
                }
            }
        }
    }
    let mut uniq: Vec<(usize, Vector)> = Vec::new();
    for (piece, x) in found {
        if !uniq.iter().any(|(_, q)| (chart.nearest_representative(q, &x).0 - q).norm() < 1e-6) {
            uniq.push((piece, x));
        }
    }
    uniq.into_iter().map(|(piece, x)| classify_boundary(field, chart, piece, x, tol)).collect()
}

/// Merges, sorts by value, assigns ids, and validates the Morse conditions.
pub fn assemble_critical_set(
    field: &MorseField,
    chart: &ChartModel,
    interior: Vec<CriticalPoint>,
    boundary: Vec<CriticalPoint>,
    tol: &Tolerances,
) -> Result<CriticalSet> {
    let mut points: Vec<CriticalPoint> = interior.into_iter().chain(boundary).collect();
    points.sort_by(|a, b| a.value.total_cmp(&b.value));
    for (i, p) in points.iter_mut().enumerate() {
        p.id = i;
    }
    let validation = validate_morse(field, chart, &points, tol)?;
    Ok(CriticalSet { dim: chart.dim(), points, validation: Some(validation) })
}

/// Full critical-point search.
pub fn locate(field: &MorseField, chart: &ChartModel, tol: &Tolerances) -> Result<CriticalSet> {
    let interior = find_interior_critical(field, chart, tol)?;
    let boundary = find_boundary_critical(field, chart, tol)?;
    assemble_critical_set(field, chart, interior, boundary, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Constraint;
    use crate::field::field_from_fns;

    fn disk() -> ChartModel {
        ChartModel::region(vec![-1.0, -1.0], vec![1.0, 1.0], vec![Constraint::inside_circle("c", [0.0, 0.0], 1.0)])
    }

    #[test]
    fn dome_interior_max() {
        let f = field_from_fns(
            |x| 1.0 - x[0] * x[0] - x[1] * x[1] + 0.5 * x[1],
            |x| vec![-2.0 * x[0], -2.0 * x[1] + 0.5],
            |_| vec![-2.0, 0.0, 0.0, -2.0],
        );
        let pts = find_interior_critical(&f, &disk(), &Tolerances::default()).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].kind, CriticalKind::Interior { index: 2 });
        assert!((pts[0].point.coords[1] - 0.25).abs() < 1e-12);
        assert!((pts[0].value - 17.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn disk_height_boundary_types() {
        let f = field_from_fns(|x| x[1], |_| vec![0.0, 1.0], |_| vec![0.0; 4]);
        let tol = Tolerances::default();
        assert!(find_interior_critical(&f, &disk(), &tol).unwrap().is_empty());
        let set = locate(&f, &disk(), &tol).unwrap();
        assert_eq!(set.points.len(), 2);
        assert_eq!(set.points[0].kind, CriticalKind::BoundaryN { boundary_index: 0 });
        assert_eq!(set.points[1].kind, CriticalKind::BoundaryD { boundary_index: 1 });
        assert_eq!(set.points[1].grading, 2);
        assert!((set.points[1].point.coords[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn constant_boundary_restriction_is_not_morse() {
        let f = field_from_fns(|x| x[0] * x[0] + x[1] * x[1], |x| vec![2.0 * x[0], 2.0 * x[1]], |_| vec![2.0, 0.0, 0.0, 2.0]);
        let err = locate(&f, &disk(), &Tolerances::default()).unwrap_err();
        assert!(matches!(err, MorseError::DegenerateCritical(_) | MorseError::NotMorse { .. }), "{err:?}");
    }

    #[test]
    fn boundary_critical_point_of_f_has_undetermined_type() {
        // df vanishes at the boundary point (1, 0)
        let f = field_from_fns(
            |x| (x[0] - 1.0).powi(2) + x[1] * x[1],
            |x| vec![2.0 * (x[0] - 1.0), 2.0 * x[1]],
            |_| vec![2.0, 0.0, 0.0, 2.0],
        );
        let err = find_boundary_critical(&f, &disk(), &Tolerances::default()).unwrap_err();
        assert!(matches!(err, MorseError::TypeUndetermined(_) | MorseError::DegenerateCritical(_)), "{err:?}");
    }

    #[test]
    fn negative_frame_sign_fixed() {
        let h = nalgebra::DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]);
        let frame = negative_frame(&h);
        assert_eq!(frame.len(), 1);
        assert!(frame[0][0] > 0.0);
        assert!((frame[0][0] + frame[0][1]).abs() < 1e-12);
    }

    #[test]
    fn upside_down_swaps_types() {
        assert_eq!(CriticalKind::BoundaryD { boundary_index: 1 }.upside_down(2), CriticalKind::BoundaryN { boundary_index: 0 });
        assert_eq!(CriticalKind::BoundaryN { boundary_index: 1 }.upside_down(2), CriticalKind::BoundaryD { boundary_index: 0 });
        assert_eq!(CriticalKind::Interior { index: 1 }.upside_down(2), CriticalKind::Interior { index: 1 });
        for k in [
            CriticalKind::BoundaryD { boundary_index: 0 },
            CriticalKind::BoundaryN { boundary_index: 1 },
            CriticalKind::Interior { index: 2 },
        ] {
            assert_eq!(k.upside_down(2).grading(), 2 - k.grading());
        }
    }
}
