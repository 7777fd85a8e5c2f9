//! The Morse function: analytic value, gradient and hessian closures, the
//! jet of its restriction to the boundary, and Morse validation.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::chart::{ChartModel, Form, FormFn, Point, ScalarFn, Vector, VectorFn};
use crate::critical::{CriticalKind, CriticalPoint};
use crate::error::{MorseError, Result};
use crate::tolerances::Tolerances;

#[derive(Clone)]
pub struct MorseField {
    value: ScalarFn,
    gradient: VectorFn,
    hessian: FormFn,
    negated: bool,
}

impl fmt::Debug for MorseField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MorseField").field("negated", &self.negated).finish()
    }
}

impl MorseField {
    pub fn new(value: ScalarFn, gradient: VectorFn, hessian: FormFn) -> Self {
        Self { value, gradient, hessian, negated: false }
    }

    /// The field `-f`.
    pub fn negated(&self) -> Self {
        Self { negated: !self.negated, ..self.clone() }
    }

    pub fn is_negated(&self) -> bool {
        self.negated
    }

    fn sign(&self) -> f64 {
        if self.negated {
            -1.0
        } else {
            1.0
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.sign() * (self.value)(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vector {
        (self.gradient)(x) * self.sign()
    }

    pub fn hessian(&self, x: &[f64]) -> Form {
        (self.hessian)(x) * self.sign()
    }

    /// Worst relative error between the gradient and central differences of
    /// the value.
    pub fn gradient_fd_error(&self, points: &[Vector], step: f64) -> f64 {
        points
            .iter()
            .map(|p| {
                let g = self.gradient(p.as_slice());
                let fd = Vector::from_iterator(
                    p.len(),
                    (0..p.len()).map(|i| {
                        let mut a = p.clone();
                        let mut b = p.clone();
                        a[i] += step;
                        b[i] -= step;
                        (self.value(a.as_slice()) - self.value(b.as_slice())) / (2.0 * step)
                    }),
                );
                relative_error(&g, &fd)
            })
            .fold(0.0, f64::max)
    }

    /// Worst relative error between the hessian and central differences of
    /// the gradient.
    pub fn hessian_fd_error(&self, points: &[Vector], step: f64) -> f64 {
        points
            .iter()
            .map(|p| {
                let h = self.hessian(p.as_slice());
                let n = p.len();
                let mut fd = Form::zeros(n, n);
                for j in 0..n {
                    let mut a = p.clone();
                    let mut b = p.clone();
                    a[j] += step;
                    b[j] -= step;
                    let col = (self.gradient(a.as_slice()) - self.gradient(b.as_slice())) / (2.0 * step);
                    fd.set_column(j, &col);
                }
                let scale = h.amax().max(fd.amax()).max(1.0);
                (h - fd).amax() / scale
            })
            .fold(0.0, f64::max)
    }

    /// Worst deviation of value, gradient and hessian from deck invariance.
    pub fn deck_defect(&self, chart: &ChartModel, points: &[Vector]) -> f64 {
        if !chart.is_quotient() {
            return 0.0;
        }
        let s = chart.flip() as f64;
        let d = Form::from_diagonal(&Vector::from_vec(vec![1.0, s]));
        points
            .iter()
            .map(|p| {
                // T(p) taken as a raw chart point; the closures see raw coordinates
                let q = chart.deck(p, 1);
                let dv = (self.value(p.as_slice()) - self.value(q.as_slice())).abs();
                let dg = (&d * self.gradient(q.as_slice()) - self.gradient(p.as_slice())).amax();
                let dh = (&d * self.hessian(q.as_slice()) * &d - self.hessian(p.as_slice())).amax();
                dv.max(dg).max(dh)
            })
            .fold(0.0, f64::max)
    }
}

fn relative_error(a: &Vector, b: &Vector) -> f64 {
    (a - b).amax() / a.amax().max(b.amax()).max(1.0)
}

/// First and second derivative of `f` restricted to a boundary curve, taken
/// along the Euclidean unit tangent.
#[derive(Debug, Clone, Serialize)]
pub struct TangentialJet {
    pub gradient: f64,
    pub hessian: f64,
    /// `<df, n>` for the outward metric-unit normal.
    pub normal_derivative: f64,
    #[serde(skip)]
    pub tangent: Option<Vector>,
    pub piece: usize,
}

/// Tangential jet of `f|dM` at a boundary point (curvature corrected).
/// For one-dimensional charts the tangential parts are zero and `tangent`
/// is empty.
pub fn boundary_restriction_derivatives(field: &MorseField, chart: &ChartModel, p: &Point) -> Result<TangentialJet> {
    let data = chart.boundary_data(p)?.ok_or_else(|| MorseError::NotOnBoundary(p.as_slice().to_vec()))?;
    Ok(tangential_jet_on_piece(field, chart, data.piece, p.as_slice()))
}

/// Same as [`boundary_restriction_derivatives`] without the activity check,
/// for points already known to sit on `piece`.
pub fn tangential_jet_on_piece(field: &MorseField, chart: &ChartModel, piece: usize, x: &[f64]) -> TangentialJet {
    let df = field.gradient(x);
    let frame = chart.frame_for_piece(piece, x);
    let normal_derivative = df.dot(&frame.normal);
    if chart.dim() == 1 {
        return TangentialJet { gradient: 0.0, hessian: 0.0, normal_derivative, tangent: None, piece };
    }
    // Euclidean unit normal and tangent
    let n = chart.euclidean_normal(piece, x);
    let t = Vector::from_vec(vec![-n[1], n[0]]);
    let h = field.hessian(x);
    let second = chart.second_fundamental(piece, x);
    let gradient = df.dot(&t);
    let hessian = (t.transpose() * h * &t)[(0, 0)] - df.dot(&n) * second;
    TangentialJet { gradient, hessian, normal_derivative, tangent: Some(t), piece }
}

/// Outcome of a successful Morse validation.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub critical_points: usize,
    pub min_hessian_det: f64,
    pub min_boundary_hessian: f64,
    pub min_normal_derivative: f64,
    pub min_value_gap: f64,
}

/// Checks the Morse conditions on a located critical set.
pub fn validate_morse(
    field: &MorseField,
    chart: &ChartModel,
    crit: &[CriticalPoint],
    tol: &Tolerances,
) -> Result<ValidationReport> {
    let fail =
        |p: &CriticalPoint, clause: &str| MorseError::NotMorse { point: p.point.as_slice().to_vec(), clause: clause.to_string() };
    let mut min_det = f64::INFINITY;
    let mut min_bh = f64::INFINITY;
    let mut min_nd = f64::INFINITY;
    for p in crit {
        match p.kind {
            CriticalKind::Interior { .. } => {
                let det = field.hessian(p.point.as_slice()).determinant().abs();
                if det <= tol.tol_nondeg {
                    return Err(fail(p, "degenerate interior hessian"));
                }
                min_det = min_det.min(det);
            }
            CriticalKind::BoundaryN { .. } | CriticalKind::BoundaryD { .. } => {
                let jet = tangential_jet_on_piece(field, chart, p.piece.expect("boundary point"), p.point.as_slice());
                if jet.normal_derivative.abs() <= tol.tol_type {
                    return Err(fail(p, "df vanishes on the boundary"));
                }
                min_nd = min_nd.min(jet.normal_derivative.abs());
                if chart.dim() > 1 {
                    if jet.hessian.abs() <= tol.tol_nondeg {
                        return Err(fail(p, "degenerate boundary restriction"));
                    }
                    min_bh = min_bh.min(jet.hessian.abs());
                }
            }
        }
    }
    let mut values: Vec<(f64, &CriticalPoint)> = crit.iter().map(|p| (p.value, p)).collect();
    values.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut min_gap = f64::INFINITY;
    for w in values.windows(2) {
        let gap = w[1].0 - w[0].0;
        if gap <= tol.tol_val {
            return Err(fail(w[1].1, "critical values not distinct"));
        }
        min_gap = min_gap.min(gap);
    }
    Ok(ValidationReport {
        critical_points: crit.len(),
        min_hessian_det: min_det,
        min_boundary_hessian: min_bh,
        min_normal_derivative: min_nd,
        min_value_gap: min_gap,
    })
}

/// Convenience constructor for closures over plain slices.
pub fn field_from_fns(
    value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    gradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    hessian: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
) -> MorseField {
    MorseField::new(
        Arc::new(value),
        Arc::new(move |x| Vector::from_vec(gradient(x))),
        Arc::new(move |x| {
            let n = x.len();
            Form::from_row_slice(n, n, &hessian(x))
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Constraint;
    use std::f64::consts::PI;

    fn disk() -> ChartModel {
        ChartModel::region(vec![-1.0, -1.0], vec![1.0, 1.0], vec![Constraint::inside_circle("c", [0.0, 0.0], 1.0)])
    }

    fn height() -> MorseField {
        field_from_fns(|x| x[1], |_| vec![0.0, 1.0], |_| vec![0.0; 4])
    }

    // f(theta) = sin(theta) on the unit circle; derivatives by hand
    #[test]
    fn disk_height_tangential_jet() {
        let c = disk();
        let bottom = boundary_restriction_derivatives(&height(), &c, &Point::new(&[0.0, -1.0])).unwrap();
        assert!(bottom.gradient.abs() < 1e-12);
        assert!((bottom.hessian - 1.0).abs() < 1e-12);
        let top = boundary_restriction_derivatives(&height(), &c, &Point::new(&[0.0, 1.0])).unwrap();
        assert!((top.hessian + 1.0).abs() < 1e-12);
        let side = boundary_restriction_derivatives(&height(), &c, &Point::new(&[1.0, 0.0])).unwrap();
        assert!((side.gradient.abs() - 1.0).abs() < 1e-12);
        assert!(matches!(
            boundary_restriction_derivatives(&height(), &c, &Point::new(&[0.2, 0.0])),
            Err(MorseError::NotOnBoundary(_))
        ));
    }

    #[test]
    fn tangential_hessian_matches_arclength_differences() {
        // tilted dome on the unit circle: f(theta) = sin(theta) / 2
        let f = field_from_fns(
            |x| 1.0 - x[0] * x[0] - x[1] * x[1] + 0.5 * x[1],
            |x| vec![-2.0 * x[0], -2.0 * x[1] + 0.5],
            |_| vec![-2.0, 0.0, 0.0, -2.0],
        );
        let c = disk();
        for theta in [0.3f64, 1.2, -PI / 2.0, PI / 2.0, 2.5] {
            let p = Point::new(&[theta.cos(), theta.sin()]);
            let jet = boundary_restriction_derivatives(&f, &c, &p).unwrap();
            let g = |s: f64| f.value(&[s.cos(), s.sin()]);
            let h = 1e-4;
            let fd1 = (g(theta + h) - g(theta - h)) / (2.0 * h);
            let fd2 = (g(theta + h) - 2.0 * g(theta) + g(theta - h)) / (h * h);
            assert!((jet.gradient - fd1).abs() < 1e-4, "{theta}");
            assert!((jet.hessian - fd2).abs() < 1e-4, "{theta}");
        }
    }

    #[test]
    fn negation_flips_everything() {
        let f = height().negated();
        assert_eq!(f.value(&[0.0, 0.5]), -0.5);
        assert_eq!(f.gradient(&[0.0, 0.5])[1], -1.0);
        assert!(f.negated().value(&[0.0, 0.5]) > 0.0);
    }
}
