//! Intersection pairing between generators of the Dirichlet side (relative
//! cycles) and of the Neumann side (absolute cycles).
//!
//! A generator `p` of `F^D_k` carries the relative `k`-cycle `W^s(p, X⁻)`,
//! which ends on the boundary; a generator `p'` of `F^N_{n-k}` carries the
//! absolute cycle `W^u(p', X)`, pushed off the boundary by [`PUSH_OFF`].
//! The relative cycle is moved by the generic shift [`SHIFT`], shorter
//! than the push-off, so its end points stay on the far side of the
//! absolute cycle and the algebraic count is stable.

use std::collections::HashMap;

use nalgebra::SymmetricEigen;

use crate::chart::{sign_power, Vector};
use crate::critical::{CriticalKind, CriticalPoint};
use crate::error::{MorseError, Result};
use crate::flow::{integrate_with, unstable_branches, FlowSettings, Termination};
use crate::pseudo_gradient::PseudoGradientField;
use crate::tolerances::Tolerances;

pub const PUSH_OFF: f64 = 2e-3;
pub const SHIFT: [f64; 2] = [4.1e-4, 2.7e-4];
const SPACING: f64 = 1e-3;

fn shift(dim: usize) -> Vector {
    Vector::from_column_slice(&SHIFT[..dim])
}

fn det2(a: &Vector, b: &Vector) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Signed intersection count of the cycles carried by `p` (generator of
/// `F^D_k`) and `p'` (generator of `F^N_{n-k}`). `x` is adapted to `f`,
/// `x_minus` to `-f`; critical ids are shared.
pub fn intersection_pairing(
    x: &PseudoGradientField,
    x_minus: &PseudoGradientField,
    p_id: usize,
    q_id: usize,
    tol: &Tolerances,
) -> Result<i64> {
    let n = x.chart.dim();
    let p = x.crit.get(p_id);
    let q = x.crit.get(q_id);
    if matches!(p.kind, CriticalKind::BoundaryN { .. }) || matches!(q.kind, CriticalKind::BoundaryD { .. }) {
        return Err(MorseError::DimensionMismatch(format!("{p_id} must be a C or D point and {q_id} a C or N point")));
    }
    if p.grading + q.grading != n {
        return Err(MorseError::DimensionMismatch(format!(
            "gradings {} and {} are not complementary in dimension {n}",
            p.grading, q.grading
        )));
    }
    let k = p.grading;
    if k == n {
        point_flows_to(x_minus, q, p_id, false, tol)
    } else if k == 0 {
        point_flows_to(x, p, q_id, true, tol)
    } else if n == 2 {
        curve_pairing(x, x_minus, p_id, q, tol)
    } else {
        Err(MorseError::DimensionMismatch(format!("curve pairing needs dimension 2, got {n}")))
    }
}

/// Moves `from` off the boundary (or off its rest point), flows along `field`
/// (backwards if `reverse`) and reports `±1` if it ends at `target`.
fn point_flows_to(
    field: &PseudoGradientField,
    from: &CriticalPoint,
    target: usize,
    reverse: bool,
    tol: &Tolerances,
) -> Result<i64> {
    let chart = &field.chart;
    let start = match from.piece {
        Some(piece) => &from.point.coords - chart.euclidean_normal(piece, from.point.as_slice()) * PUSH_OFF,
        None => &from.point.coords + shift(chart.dim()),
    };
    let mut s = FlowSettings::from_tolerances(tol);
    s.reverse = reverse;
    s.stop_at_boundary = true;
    let traj = integrate_with(field, &start, &s)?;
    Ok(match traj.termination {
        Termination::ConvergedTo(id) if id == target => sign_power(chart.flip(), traj.end_deck) as i64,
        _ => 0,
    })
}

/// Oriented polyline of `W^s(p, X⁻)`: backward `X⁻` orbits out of `p`
/// until they reach the boundary.
fn stable_curve(x_minus: &PseudoGradientField, p_id: usize, tol: &Tolerances) -> Result<Vec<Vector>> {
    let chart = &x_minus.chart;
    let p = x_minus.crit.get(p_id);
    let e_u = p.orientation_ref.first().ok_or_else(|| MorseError::DimensionMismatch("no unstable direction".into()))?;
    let directions: Vec<Vector> = match p.piece {
        Some(piece) => vec![-chart.euclidean_normal(piece, p.point.as_slice())],
        None => {
            let eig = SymmetricEigen::new(x_minus.field.hessian(p.point.as_slice()));
            let i = (0..eig.eigenvalues.len()).find(|&i| eig.eigenvalues[i] > 0.0).expect("saddle has a stable direction");
            let e_s: Vector = eig.eigenvectors.column(i).into_owned();
            vec![e_s.clone(), -e_s]
        }
    };
    let mut s = FlowSettings::from_tolerances(tol);
    s.reverse = true;
    s.stop_at_boundary = true;
    let mut plus: Vec<Vector> = Vec::new();
    let mut minus: Vec<Vector> = Vec::new();
    for w in directions {
        let start = &p.point.coords + &w * tol.r_launch;
        let traj = integrate_with(x_minus, &start, &s)?.decimated(SPACING);
        if det2(&w, e_u) > 0.0 {
            plus = traj.points();
        } else {
            minus = traj.points();
        }
    }
    let mut curve: Vec<Vector> = minus.into_iter().rev().collect();
    curve.push(p.point.coords.clone());
    curve.extend(plus);
    Ok(curve)
}

/// Oriented polyline of `W^u(q, X)` pushed off the boundary.
fn unstable_curve(x: &PseudoGradientField, q: &CriticalPoint, tol: &Tolerances) -> Result<Vec<Vector>> {
    let s = FlowSettings::from_tolerances(tol);
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for (sign, start) in unstable_branches(x, q, tol.r_launch) {
        let traj = integrate_with(x, &start, &s)?.decimated(SPACING);
        if sign > 0 {
            plus = traj.points();
        } else {
            minus = traj.points();
        }
    }
    let mut curve: Vec<Vector> = minus.into_iter().rev().collect();
    curve.push(q.point.coords.clone());
    curve.extend(plus);
    Ok(curve.iter().map(|p| push_off(x, p)).collect())
}

fn push_off(x: &PseudoGradientField, lifted: &Vector) -> Vector {
    let chart = &x.chart;
    let (canon, k) = chart.canonicalize(lifted);
    let Some(frame) = chart.collar_frame(canon.as_slice()) else { return lifted.clone() };
    let weight = (1.0 - frame.depth / (3.0 * PUSH_OFF)).max(0.0);
    if weight == 0.0 {
        return lifted.clone();
    }
    let inward = -chart.euclidean_normal(frame.piece, canon.as_slice());
    lifted + chart.deck_vector(&inward, k) * (PUSH_OFF * weight)
}

fn curve_pairing(
    x: &PseudoGradientField,
    x_minus: &PseudoGradientField,
    p_id: usize,
    q: &CriticalPoint,
    tol: &Tolerances,
) -> Result<i64> {
    let chart = &x.chart;
    let delta = shift(2);
    let alpha: Vec<Vector> = stable_curve(x_minus, p_id, tol)?.into_iter().map(|a| a + &delta).collect();
    let beta = unstable_curve(x, q, tol)?;
    let decks: Vec<i64> = if chart.is_quotient() { (-2..=2).collect() } else { vec![0] };
    let mut total = 0;
    for j in decks {
        let moved: Vec<Vector> = beta.iter().map(|b| chart.deck(b, j)).collect();
        total += signed_crossings(&alpha, &moved)?;
    }
    Ok(total)
}

const CELL: f64 = 0.05;

fn cells(a: &Vector, b: &Vector) -> impl Iterator<Item = (i64, i64)> {
    let (x0, x1) = (a[0].min(b[0]), a[0].max(b[0]));
    let (y0, y1) = (a[1].min(b[1]), a[1].max(b[1]));
    let (i0, i1) = ((x0 / CELL).floor() as i64, (x1 / CELL).floor() as i64);
    let (j0, j1) = ((y0 / CELL).floor() as i64, (y1 / CELL).floor() as i64);
    (i0..=i1).flat_map(move |i| (j0..=j1).map(move |j| (i, j)))
}

/// Algebraic number of crossings of two oriented planar polylines.
pub fn signed_crossings(a: &[Vector], b: &[Vector]) -> Result<i64> {
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for s in 0..b.len().saturating_sub(1) {
        for c in cells(&b[s], &b[s + 1]) {
            grid.entry(c).or_default().push(s);
        }
    }
    let mut total = 0;
    let mut seen = Vec::new();
    for r in 0..a.len().saturating_sub(1) {
        let (a0, a1) = (&a[r], &a[r + 1]);
        let da = a1 - a0;
        seen.clear();
        for c in cells(a0, a1) {
            if let Some(list) = grid.get(&c) {
                seen.extend_from_slice(list);
            }
        }
        seen.sort_unstable();
        seen.dedup();
        for &s in &seen {
            let (b0, b1) = (&b[s], &b[s + 1]);
            let db = b1 - b0;
            let d = det2(&da, &db);
            let scale = da.norm() * db.norm();
            if scale == 0.0 {
                continue;
            }
            let w = b0 - a0;
            let t = det2(&w, &db) / d;
            let u = det2(&w, &da) / d;
            if d.abs() < 1e-12 * scale {
                // parallel pieces only matter if they overlap
                if det2(&w, &da).abs() < 1e-12 * da.norm() * w.norm().max(1e-300) && w.norm() < da.norm() + db.norm() {
                    return Err(MorseError::NonTransverse("overlapping cycle pieces".into()));
                }
                continue;
            }
            if (0.0..1.0).contains(&t) && (0.0..1.0).contains(&u) {
                total += d.signum() as i64;
            }
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(pts: &[[f64; 2]]) -> Vec<Vector> {
        pts.iter().map(|p| Vector::from_column_slice(p)).collect()
    }

    #[test]
    fn crossing_signs() {
        let a = poly(&[[-1.0, 0.0], [1.0, 0.0]]);
        let up = poly(&[[0.0, -1.0], [0.0, 1.0]]);
        let down = poly(&[[0.0, 1.0], [0.0, -1.0]]);
        assert_eq!(signed_crossings(&a, &up).unwrap(), 1);
        assert_eq!(signed_crossings(&a, &down).unwrap(), -1);
        let zigzag = poly(&[[-0.5, -1.0], [-0.5, 1.0], [0.5, 1.0], [0.5, -1.0]]);
        assert_eq!(signed_crossings(&a, &zigzag).unwrap(), 0);
        let far = poly(&[[5.0, -1.0], [5.0, 1.0]]);
        assert_eq!(signed_crossings(&a, &far).unwrap(), 0);
    }

    #[test]
    fn vertex_on_the_other_curve_counts_once() {
        let a = poly(&[[-1.0, 0.0], [0.0, 0.0], [1.0, 0.0]]);
        let b = poly(&[[0.0, -1.0], [0.0, 0.0], [0.0, 1.0]]);
        assert_eq!(signed_crossings(&a, &b).unwrap(), 1);
    }
}
