//! Flow lines of pseudo-gradients and connecting orbits between critical
//! points of adjacent grading.
//!
//! Trajectories live in lifted coordinates: on a quotient chart the raw
//! point is never wrapped, the field is evaluated at the canonical
//! representative and carried back by the deck differential. A trajectory
//! ending near `T^j(q)` closes a loop whose `w1` is `flip^j`.

use rayon::prelude::*;
use serde::Serialize;

use crate::chart::{ChartModel, Point, Vector};
use crate::critical::CriticalPoint;
use crate::error::{MorseError, Result};
use crate::ode::Dp45;
use crate::pseudo_gradient::PseudoGradientField;
use crate::tolerances::Tolerances;

/// Radius around a grading `k-1` target inside which the side of its
/// stable manifold is read off.
pub const SIDE_RADIUS: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "id")]
pub enum Termination {
    ConvergedTo(usize),
    LeftDomain,
    Timeout,
    /// Stopped on a requested level of `f`.
    ReachedLevel,
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    /// `(time, lifted coordinates)`.
    #[serde(serialize_with = "ser_samples")]
    pub samples: Vec<(f64, Vector)>,
    pub termination: Termination,
    /// `j` with the lifted end point close to `T^j(q)` for `ConvergedTo(q)`;
    /// otherwise the deck power of the last sample.
    pub end_deck: i64,
    /// Orientation sign accumulated across seams.
    pub seam_sign: i32,
}

fn ser_samples<S: serde::Serializer>(s: &[(f64, Vector)], ser: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = ser.serialize_seq(Some(s.len()))?;
    for (t, x) in s {
        let mut row = vec![*t];
        row.extend(x.iter());
        seq.serialize_element(&row)?;
    }
    seq.end()
}

impl Trajectory {
    pub fn end(&self) -> &Vector {
        &self.samples.last().expect("non-empty trajectory").1
    }

    pub fn points(&self) -> Vec<Vector> {
        self.samples.iter().map(|(_, x)| x.clone()).collect()
    }

    /// Keeps samples at least `spacing` apart, plus the end points.
    pub fn decimated(&self, spacing: f64) -> Trajectory {
        let mut out: Vec<(f64, Vector)> = Vec::new();
        for (i, s) in self.samples.iter().enumerate() {
            let last = i + 1 == self.samples.len();
            if out.last().is_none_or(|p| (&p.1 - &s.1).norm() >= spacing) || last {
                out.push(s.clone());
            }
        }
        Trajectory { samples: out, ..self.clone() }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct FlowSettings {
    pub ode: Dp45,
    pub r_conv: f64,
    pub t_max: f64,
    pub tol_geom: f64,
    /// Follow `-X` instead of `X`.
    pub reverse: bool,
    /// End with `LeftDomain` when the flow reaches the boundary.
    pub stop_at_boundary: bool,
    /// End with `ReachedLevel` once `f` drops below this value.
    pub stop_below: Option<f64>,
}

impl FlowSettings {
    pub fn from_tolerances(tol: &Tolerances) -> Self {
        Self {
            ode: Dp45 { rtol: tol.ode_rtol, atol: tol.ode_atol, h_max: tol.ode_h_max, h_min: 1e-14 },
            r_conv: tol.r_conv,
            t_max: tol.t_max,
            tol_geom: tol.tol_geom,
            reverse: false,
            stop_at_boundary: false,
            stop_below: None,
        }
    }
}

const REST_SPEED: f64 = 1e-8;

fn min_depth(chart: &ChartModel, canon: &Vector) -> (f64, usize) {
    chart
        .depths(canon.as_slice())
        .into_iter()
        .enumerate()
        .map(|(i, d)| (d, i))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .unwrap_or((f64::INFINITY, 0))
}

/// Rest point the lifted point has converged to, with the deck power `j`
/// of the matching image `T^j(q)`.
fn converged(x: &PseudoGradientField, lifted: &Vector, s: &FlowSettings) -> Option<(usize, i64)> {
    let chart = &x.chart;
    let (canon, k) = chart.canonicalize(lifted);
    if x.eval(canon.as_slice()).norm() >= REST_SPEED {
        return None;
    }
    x.crit.points.iter().filter(|q| q.is_rest_point()).find_map(|q| {
        let (rep, j) = chart.nearest_representative(&q.point.coords, &canon);
        ((rep - &q.point.coords).norm() < s.r_conv).then_some((q.id, k - j))
    })
}

pub(crate) fn integrate_with(x: &PseudoGradientField, start: &Vector, s: &FlowSettings) -> Result<Trajectory> {
    let chart = &x.chart;
    let sign = if s.reverse { -1.0 } else { 1.0 };
    let rhs = |y: &Vector| x.eval_raw(y) * sign;
    let mut pos = start.clone();
    let mut t = 0.0;
    let mut h = s.ode.h_max.min(1e-3);
    let mut samples = vec![(0.0, pos.clone())];
    let finish = |samples: Vec<(f64, Vector)>, termination: Termination, end_deck: i64| {
        let last_k = chart.canonicalize(&samples.last().expect("non-empty").1).1;
        let seam_sign = crate::chart::sign_power(chart.flip(), last_k - chart.canonicalize(&samples[0].1).1);
        Ok(Trajectory { samples, termination, end_deck, seam_sign })
    };
    loop {
        if let Some((id, j)) = converged(x, &pos, s) {
            return finish(samples, Termination::ConvergedTo(id), j);
        }
        if let Some(level) = s.stop_below {
            let (canon, k) = chart.canonicalize(&pos);
            if x.field.value(canon.as_slice()) < level {
                return finish(samples, Termination::ReachedLevel, k);
            }
        }
        if t > s.t_max {
            let k = chart.canonicalize(&pos).1;
            if s.stop_below.is_some() || s.stop_at_boundary {
                return finish(samples, Termination::Timeout, k);
            }
            return Err(MorseError::Timeout(pos.as_slice().to_vec()));
        }
        let mut rejections = 0;
        let (next, used) = loop {
            let (cand, used) = s.ode.step(&rhs, &pos, &mut h);
            let (canon, k) = chart.canonicalize(&cand);
            let (depth, piece) = min_depth(chart, &canon);
            if depth >= 0.0 {
                break (cand, used);
            }
            if depth >= -s.tol_geom {
                let snapped = chart.project_to_piece(piece, &canon);
                break (chart.deck(&snapped, k), used);
            }
            if s.stop_at_boundary {
                // bisect the step length to land on the boundary
                let (mut lo, mut hi) = (0.0, used);
                let mut land = pos.clone();
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    let (trial, _) = s.ode.trial(&rhs, &pos, mid);
                    let (c, _) = chart.canonicalize(&trial);
                    let (d, _) = min_depth(chart, &c);
                    if d >= 0.0 {
                        lo = mid;
                        land = trial;
                    } else {
                        hi = mid;
                    }
                    if hi - lo < 1e-15 || (0.0..s.tol_geom).contains(&d) {
                        break;
                    }
                }
                let (c, k) = chart.canonicalize(&land);
                let (_, piece) = min_depth(chart, &c);
                let on = chart.deck(&chart.project_to_piece(piece, &c), k);
                samples.push((t + lo, on));
                return finish(samples, Termination::LeftDomain, k);
            }
            rejections += 1;
            if rejections > 60 {
                return Err(MorseError::CertificateViolation(cand.as_slice().to_vec()));
            }
            h = used * 0.5;
        };
        t += used;
        pos = next;
        samples.push((t, pos.clone()));
    }
}

/// Forward flow line of `X` from a manifold point until it converges to a
/// rest point of `X`.
pub fn integrate(x: &PseudoGradientField, start: &Point, tol: &Tolerances) -> Result<Trajectory> {
    if !x.chart.contains(start.as_slice(), tol.tol_geom) {
        return Err(MorseError::PointOutsideManifold(start.as_slice().to_vec()));
    }
    integrate_with(x, &start.coords, &FlowSettings::from_tolerances(tol))
}

#[derive(Debug, Clone, Serialize)]
pub struct ConnectingOrbit {
    pub from: usize,
    pub to: usize,
    pub sign: i32,
    pub w1: i32,
    /// Launch parameter: branch sign for saddles, angle for maxima.
    pub parameter: f64,
    pub trajectory: Trajectory,
}

#[derive(Debug, Clone, Serialize)]
pub struct IncidenceCount {
    pub from: usize,
    pub to: usize,
    pub m: i64,
    pub m_or: i64,
    pub orbits: Vec<ConnectingOrbit>,
}

impl IncidenceCount {
    pub fn from_orbits(from: usize, to: usize, all: &[ConnectingOrbit]) -> Self {
        let orbits: Vec<ConnectingOrbit> = all.iter().filter(|o| o.from == from && o.to == to).cloned().collect();
        let m = orbits.iter().map(|o| o.sign as i64).sum();
        let m_or = orbits.iter().map(|o| (o.sign * o.w1) as i64).sum();
        Self { from, to, m, m_or, orbits }
    }
}

/// Launch points `(sign, lifted start)` along the one-dimensional unstable
/// manifold of a grading-1 rest point.
pub(crate) fn unstable_branches(x: &PseudoGradientField, p: &CriticalPoint, r: f64) -> Vec<(i32, Vector)> {
    let e = p.orientation_ref[0].clone();
    [1, -1]
        .into_iter()
        .map(|s| {
            let raw = &p.point.coords + &e * (s as f64 * r);
            let start = match p.piece {
                Some(piece) => x.chart.project_to_piece(piece, &raw),
                None => raw,
            };
            (s, start)
        })
        .collect()
}

fn flip_power(chart: &ChartModel, j: i64) -> i32 {
    crate::chart::sign_power(chart.flip(), j)
}

/// All connecting orbits leaving `p`, towards rest points of grading one less.
pub fn orbits_from(x: &PseudoGradientField, p_id: usize, tol: &Tolerances) -> Result<Vec<ConnectingOrbit>> {
    let p = x.crit.get(p_id).clone();
    if !p.is_rest_point() {
        return Err(MorseError::DimensionMismatch(format!("critical point {p_id} is not a rest point of the field")));
    }
    match p.grading {
        0 => Ok(Vec::new()),
        1 => saddle_orbits(x, &p, tol),
        2 if x.chart.dim() == 2 => maximum_orbits(x, &p, tol),
        k => Err(MorseError::DimensionMismatch(format!("sources of grading {k} in dimension {}", x.chart.dim()))),
    }
}

fn saddle_orbits(x: &PseudoGradientField, p: &CriticalPoint, tol: &Tolerances) -> Result<Vec<ConnectingOrbit>> {
    let settings = FlowSettings::from_tolerances(tol);
    let branches = unstable_branches(x, p, tol.r_launch);
    let runs: Vec<Result<(i32, Trajectory)>> =
        branches.par_iter().map(|(s, start)| integrate_with(x, start, &settings).map(|t| (*s, t))).collect();
    let mut out = Vec::new();
    for run in runs {
        let (s, traj) = run?;
        let Termination::ConvergedTo(q) = traj.termination else {
            return Err(MorseError::Timeout(traj.end().as_slice().to_vec()));
        };
        let target = x.crit.get(q);
        if target.grading + 1 != p.grading {
            return Err(MorseError::NonTransverse(format!(
                "branch {s} of {} converges to {q} of grading {}",
                p.id, target.grading
            )));
        }
        out.push(ConnectingOrbit {
            from: p.id,
            to: q,
            sign: s,
            w1: flip_power(&x.chart, traj.end_deck),
            parameter: s as f64,
            trajectory: traj.decimated(2e-3),
        });
    }
    Ok(out)
}

/// Outcome of one launch from a maximum, relative to one target.
#[derive(Debug, Clone)]
struct SideProbe {
    /// `(side, deck power)` if the flow passed within [`SIDE_RADIUS`] of an image of `q`.
    side: Option<(i32, i64)>,
    /// Flow direction at the first crossing of `f(q) + eps_lvl`.
    velocity: Option<Vector>,
    trajectory: Trajectory,
}

fn probe(x: &PseudoGradientField, start: &Vector, q: &CriticalPoint, tol: &Tolerances) -> Result<SideProbe> {
    let mut settings = FlowSettings::from_tolerances(tol);
    settings.stop_below = Some(q.value - tol.eps_lvl);
    let traj = integrate_with(x, start, &settings)?;
    let chart = &x.chart;
    let e_u = &q.orientation_ref[0];
    let mut best: Option<(f64, i32, i64)> = None;
    let mut velocity = None;
    for (_, pt) in &traj.samples {
        let (canon, k) = chart.canonicalize(pt);
        if velocity.is_none() && x.field.value(canon.as_slice()) <= q.value + tol.eps_lvl {
            velocity = Some(x.eval_raw(pt));
        }
        let (rep, j) = chart.nearest_representative(&q.point.coords, &canon);
        let off = rep - &q.point.coords;
        let dist = off.norm();
        if dist < SIDE_RADIUS && best.is_none_or(|b| dist < b.0) {
            let side = off.dot(e_u);
            let s = if side > 0.0 {
                1
            } else if side < 0.0 {
                -1
            } else {
                0
            };
            best = Some((dist, s, k - j));
        }
    }
    let side = best.and_then(|(_, s, j)| (s != 0).then_some((s, j)));
    Ok(SideProbe { side, velocity, trajectory: traj })
}

fn det2(a: &Vector, b: &Vector) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn maximum_orbits(x: &PseudoGradientField, p: &CriticalPoint, tol: &Tolerances) -> Result<Vec<ConnectingOrbit>> {
    let chart = &x.chart;
    let (e1, e2) = (p.orientation_ref[0].clone(), p.orientation_ref[1].clone());
    let frame_sign = det2(&e1, &e2).signum() as i32;
    let launch = |theta: f64| &p.point.coords + (&e1 * theta.cos() + &e2 * theta.sin()) * tol.r_launch;
    let n = tol.angle_samples.max(8);
    let thetas: Vec<f64> = (0..n).map(|i| 2.0 * std::f64::consts::PI * (i as f64 + 0.5) / n as f64).collect();
    let targets: Vec<CriticalPoint> =
        x.crit.points.iter().filter(|q| q.is_rest_point() && q.grading + 1 == p.grading && q.value < p.value).cloned().collect();
    let mut out = Vec::new();
    for q in &targets {
        let probes: Vec<Result<SideProbe>> = thetas.par_iter().map(|t| probe(x, &launch(*t), q, tol)).collect();
        let probes: Vec<SideProbe> = probes.into_iter().collect::<Result<_>>()?;
        for i in 0..n {
            let a = &probes[i];
            let b = &probes[(i + 1) % n];
            let (Some((sa, ja)), Some((sb, jb))) = (a.side, b.side) else { continue };
            if sa == sb || ja != jb {
                continue;
            }
            let (mut lo, mut hi) = (thetas[i], if i + 1 == n { thetas[0] + 2.0 * std::f64::consts::PI } else { thetas[i + 1] });
            let mut best = a.clone();
            while hi - lo > tol.bisect_tol {
                let mid = 0.5 * (lo + hi);
                let m = probe(x, &launch(mid), q, tol)?;
                match m.side {
                    Some((s, j)) if j == ja && s == sa => lo = mid,
                    Some((s, j)) if j == ja && s == sb => hi = mid,
                    // the probe fell onto q or lost it: as close as it gets
                    _ => {
                        best = m;
                        break;
                    }
                }
                best = m;
            }
            let theta = 0.5 * (lo + hi);
            let Some(v) = best.velocity.clone() else {
                return Err(MorseError::NonTransverse(format!(
                    "orbit {} -> {} never reaches the level of the target",
                    p.id, q.id
                )));
            };
            let c_q = chart.deck_vector(&q.orientation_ref[0], ja);
            let d = det2(&v, &c_q);
            if d.abs() < 1e-8 * v.norm().max(1e-300) {
                return Err(MorseError::NonTransverse(format!("orbit {} -> {} is tangent to the stable manifold", p.id, q.id)));
            }
            out.push(ConnectingOrbit {
                from: p.id,
                to: q.id,
                sign: d.signum() as i32 * frame_sign,
                w1: flip_power(chart, ja),
                parameter: theta.rem_euclid(2.0 * std::f64::consts::PI),
                trajectory: best.trajectory.decimated(2e-3),
            });
        }
    }
    out.sort_by(|a, b| (a.to, a.parameter).partial_cmp(&(b.to, b.parameter)).expect("finite parameters"));
    Ok(out)
}

/// Signed count of orbits from `p` to `q` (untwisted and `w1`-twisted).
pub fn count_connecting_orbits(x: &PseudoGradientField, p_id: usize, q_id: usize, tol: &Tolerances) -> Result<IncidenceCount> {
    let p = x.crit.get(p_id);
    let q = x.crit.get(q_id);
    if p.grading != q.grading + 1 || q.value >= p.value {
        return Ok(IncidenceCount { from: p_id, to: q_id, m: 0, m_or: 0, orbits: Vec::new() });
    }
    let all = orbits_from(x, p_id, tol)?;
    Ok(IncidenceCount::from_orbits(p_id, q_id, &all))
}
