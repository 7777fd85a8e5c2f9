//! Adapted pseudo-gradient fields and their numerical certification.
//!
//! The field is a blend of three pieces: `-grad f` in the bulk, a collar
//! correction that turns the outward part inward, and hyperbolic model
//! fields around the type N points that are tangent to the boundary.

use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::chart::{BoundaryComponent, ChartModel, Form, Vector};
use crate::critical::{CriticalKind, CriticalSet};
use crate::error::{MorseError, Result};
use crate::field::{tangential_jet_on_piece, MorseField};
use crate::tolerances::Tolerances;

/// Quintic smoothstep on `[0, 1]`, clamped outside.
pub fn smoothstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
}

#[derive(Debug, Clone)]
struct NPatch {
    id: usize,
    center: Vector,
    piece: usize,
    /// Sign of the tangential hessian; the model is repelling along the
    /// boundary when negative.
    curvature_sign: f64,
}

#[derive(Debug, Clone)]
struct Bump {
    center: Vector,
    radius: f64,
    direction: Vector,
}

#[derive(Debug, Clone)]
struct Perturbation {
    magnitude: f64,
    bumps: Vec<Bump>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BlendRadii {
    pub r_n: f64,
    pub delta_c: f64,
    pub eps_n: f64,
    pub r_excl: f64,
}

#[derive(Debug, Clone)]
pub struct PseudoGradientField {
    /// The function the field is adapted to (`-f` for `X⁻`).
    pub field: MorseField,
    pub chart: ChartModel,
    /// Critical set classified for `field`.
    pub crit: CriticalSet,
    pub for_negative: bool,
    pub radii: BlendRadii,
    pub seed: Option<u64>,
    patches: Vec<NPatch>,
    perturbation: Option<Perturbation>,
}

impl PseudoGradientField {
    fn assemble(
        field: MorseField,
        chart: ChartModel,
        crit: CriticalSet,
        for_negative: bool,
        radii: BlendRadii,
        seed: Option<u64>,
        magnitude: f64,
    ) -> Self {
        let patches = crit
            .points
            .iter()
            .filter_map(|p| match p.kind {
                CriticalKind::BoundaryN { .. } => {
                    let piece = p.piece.expect("boundary point");
                    let h = tangential_jet_on_piece(&field, &chart, piece, p.point.as_slice()).hessian;
                    Some(NPatch {
                        id: p.id,
                        center: p.point.coords.clone(),
                        piece,
                        curvature_sign: if h < 0.0 { -1.0 } else { 1.0 },
                    })
                }
                _ => None,
            })
            .collect();
        let perturbation = seed.map(|s| random_bumps(&chart, s, magnitude));
        Self { field, chart, crit, for_negative, radii, seed, patches, perturbation }
    }

    /// Ids of the critical points carrying a type N model patch.
    pub fn patch_centers(&self) -> Vec<usize> {
        self.patches.iter().map(|p| p.id).collect()
    }

    /// Bulk field with the collar correction.
    fn base(&self, x: &[f64]) -> Vector {
        let df = self.field.gradient(x);
        let grad = if self.chart.metric.euclidean {
            df.clone()
        } else {
            self.chart.metric.at(x).lu().solve(&df).expect("metric is invertible")
        };
        let mut v = -grad;
        let Some(frame) = self.chart.collar_frame(x) else { return v };
        if frame.depth >= self.radii.delta_c {
            return v;
        }
        let s = 1.0 - smoothstep(frame.depth / self.radii.delta_c);
        let g_n = df.dot(&frame.normal);
        let g_t = frame.tangent.as_ref().map_or(0.0, |t| df.dot(t));
        let g_t2 = g_t * g_t;
        let denom = g_n.abs() + g_t2;
        let mu = if denom > 0.0 { self.radii.eps_n * g_t2 / denom } else { 0.0 };
        let lambda = (-g_n).max(0.0) + mu;
        v -= &frame.normal * (s * lambda);
        v
    }

    /// Model field of a patch, at a representative of the point near the
    /// patch center.
    fn model(&self, patch: &NPatch, rep: &Vector) -> Vector {
        let frame = self.chart.frame_for_piece(patch.piece, rep.as_slice());
        // normal component: d' = -d toward the boundary
        let mut v = &frame.normal * frame.depth;
        if let Some(t) = &frame.tangent {
            let t_p = self.chart.frame_for_piece(patch.piece, patch.center.as_slice()).tangent.expect("planar");
            let y = (rep - &patch.center).dot(&t_p);
            v += t * (-patch.curvature_sign * 2.0 * y);
        }
        v
    }

    /// `X` at canonical chart coordinates.
    pub fn eval(&self, x: &[f64]) -> Vector {
        let base = self.base(x);
        let xv = Vector::from_column_slice(x);
        let mut v = base.clone();
        for patch in &self.patches {
            let (rep, j) = self.chart.nearest_representative(&patch.center, &xv);
            let r = (&rep - &patch.center).norm();
            if r >= 2.0 * self.radii.r_n {
                continue;
            }
            // exact model on the patch, blended out to twice its radius
            let beta = 1.0 - smoothstep((r - self.radii.r_n) / self.radii.r_n);
            let model = self.chart.deck_vector(&self.model(patch, &rep), -j);
            v = v * (1.0 - beta) + model * beta;
        }
        if let Some(pert) = &self.perturbation {
            v += self.perturbation_at(pert, &xv) * base.norm();
        }
        v
    }

    fn perturbation_at(&self, pert: &Perturbation, x: &Vector) -> Vector {
        let mut cutoff = match self.chart.collar_frame(x.as_slice()) {
            Some(frame) => smoothstep(frame.depth / self.radii.delta_c),
            None => 1.0,
        };
        for p in &self.crit.points {
            let (rep, _) = self.chart.nearest_representative(&p.point.coords, x);
            let r = (rep - &p.point.coords).norm();
            cutoff *= smoothstep((r - self.radii.r_excl) / self.radii.r_excl);
        }
        let mut out = Vector::zeros(x.len());
        if cutoff == 0.0 {
            return out;
        }
        for b in &pert.bumps {
            let (rep, j) = self.chart.nearest_representative(&b.center, x);
            let r = (rep - &b.center).norm() / b.radius;
            if r < 1.0 {
                let w = 1.0 - smoothstep(r);
                out += self.chart.deck_vector(&b.direction, -j) * w;
            }
        }
        out * (pert.magnitude * cutoff)
    }

    /// `X` at raw (lifted) coordinates: evaluated at the canonical
    /// representative and carried back by the deck differential.
    pub fn eval_raw(&self, x: &Vector) -> Vector {
        let (canon, k) = self.chart.canonicalize(x);
        self.chart.deck_vector(&self.eval(canon.as_slice()), k)
    }

    /// `X·f`.
    pub fn derivative_of_f(&self, x: &[f64]) -> f64 {
        self.field.gradient(x).dot(&self.eval(x))
    }

    /// Central-difference linearization at a point.
    pub fn linearization(&self, p: &Vector) -> Form {
        let n = p.len();
        let h = 1e-6;
        let mut m = Form::zeros(n, n);
        for j in 0..n {
            let mut a = p.clone();
            let mut b = p.clone();
            a[j] += h;
            b[j] -= h;
            let col = (self.eval_raw(&a) - self.eval_raw(&b)) / (2.0 * h);
            m.set_column(j, &col);
        }
        m
    }
}

fn random_bumps(chart: &ChartModel, seed: u64, magnitude: f64) -> Perturbation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = chart.bounding_box();
    let n = lo.len();
    let scale = lo.iter().zip(&hi).map(|(a, b)| b - a).fold(f64::INFINITY, f64::min);
    let bumps = (0..8)
        .map(|_| {
            let center = Vector::from_iterator(n, (0..n).map(|i| rng.gen_range(lo[i]..hi[i])));
            let radius = scale * rng.gen_range(0.25..0.5);
            let dir = Vector::from_iterator(n, (0..n).map(|_| rng.gen_range(-1.0..1.0)));
            let direction = if dir.norm() > 1e-3 { dir.normalize() } else { Vector::from_element(n, 1.0).normalize() };
            Bump { center, radius, direction }
        })
        .collect();
    Perturbation { magnitude, bumps }
}

#[derive(Debug, Clone, Serialize)]
pub struct AdaptednessCertificate {
    /// Condition 1: largest `X·f` on the sample away from critical balls.
    pub descent_margin: f64,
    pub descent_samples: usize,
    /// Condition 2: smallest inward component on the boundary outside type N patches.
    pub inward_margin: f64,
    pub inward_samples: usize,
    /// Condition 3: largest eigenvalue of the linearized quadratic form at interior points.
    pub interior_definiteness: Option<f64>,
    /// Condition 4: same in the model coordinates of type N points.
    pub n_patch_definiteness: Option<f64>,
    /// Linearizations at rest points are hyperbolic with the expected unstable dimension.
    pub hyperbolic: bool,
    /// Largest `|X|` at the rest points.
    pub rest_residual: f64,
    pub radii: BlendRadii,
    pub attempts: usize,
    pub passed: bool,
}

fn halton(i: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let mut i = i;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

fn max_eigenvalue(m: &Form) -> f64 {
    SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// `(A^T Φ + Φ A) / 2`: the quadratic form `v -> Φ(Av, v)`, symmetrized.
fn lie_form(a: &Form, phi: &Form) -> Form {
    (a.transpose() * phi + phi * a) * 0.5
}

/// Samples the adaptedness conditions.
pub fn certify_adapted(x: &PseudoGradientField, tol: &Tolerances) -> AdaptednessCertificate {
    let chart = &x.chart;
    let crit = &x.crit;
    let (lo, hi) = chart.bounding_box();
    let n = chart.dim();
    let bases = [2usize, 3];

    // condition 1
    let mut descent_margin = f64::NEG_INFINITY;
    let mut descent_samples = 0;
    let mut i = 1;
    while descent_samples < tol.cert_interior_samples && i < 50 * tol.cert_interior_samples {
        let p = Vector::from_iterator(n, (0..n).map(|a| lo[a] + (hi[a] - lo[a]) * halton(i, bases[a])));
        i += 1;
        if !chart.contains(p.as_slice(), 0.0) || chart.depths(p.as_slice()).iter().any(|d| *d < 0.0) {
            continue;
        }
        let near = crit.points.iter().any(|c| {
            let (rep, _) = chart.nearest_representative(&c.point.coords, &p);
            (rep - &c.point.coords).norm() < x.radii.r_excl
        });
        if near {
            continue;
        }
        descent_margin = descent_margin.max(x.derivative_of_f(p.as_slice()));
        descent_samples += 1;
    }

    // condition 2
    let mut inward_margin = f64::INFINITY;
    let mut inward_samples = 0;
    let components = chart.boundary_components();
    let curves = components.iter().filter(|(_, c)| matches!(c, BoundaryComponent::Curve(_))).count().max(1);
    for (piece, component) in &components {
        let pts: Vec<Vector> = match component {
            BoundaryComponent::Point(p) => vec![p.clone()],
            BoundaryComponent::Curve(c) => {
                let m = tol.cert_boundary_samples / curves;
                (0..m).map(|j| (c.param)(c.period * (j as f64 + 0.5) / m as f64)).collect()
            }
        };
        for raw in pts {
            let (p, _) = chart.canonicalize(&raw);
            let piece = if chart.is_quotient() { chart.collar_frame(p.as_slice()).expect("edges").piece } else { *piece };
            let in_patch = x.patches.iter().any(|patch| {
                let (rep, _) = chart.nearest_representative(&patch.center, &p);
                (rep - &patch.center).norm() < 2.0 * x.radii.r_n
            });
            if in_patch {
                continue;
            }
            let frame = chart.frame_for_piece(piece, p.as_slice());
            let v = x.eval(p.as_slice());
            let g = chart.metric.at(p.as_slice());
            let inward = -(v.transpose() * g * &frame.normal)[(0, 0)];
            inward_margin = inward_margin.min(inward);
            inward_samples += 1;
        }
    }

    // conditions 3 and 4, hyperbolicity
    let mut interior_definiteness: Option<f64> = None;
    let mut n_patch_definiteness: Option<f64> = None;
    let mut hyperbolic = true;
    let mut rest_residual: f64 = 0.0;
    for c in crit.points.iter().filter(|c| c.is_rest_point()) {
        let p = &c.point.coords;
        rest_residual = rest_residual.max(x.eval(p.as_slice()).norm());
        let a = x.linearization(p);
        let eig = a.clone().complex_eigenvalues();
        if eig.iter().any(|l| l.re.abs() < tol.tol_nondeg) {
            hyperbolic = false;
        }
        if eig.iter().filter(|l| l.re > 0.0).count() != c.grading {
            hyperbolic = false;
        }
        match c.kind {
            CriticalKind::Interior { .. } => {
                let q = lie_form(&a, &x.field.hessian(p.as_slice()));
                let m = max_eigenvalue(&q);
                interior_definiteness = Some(interior_definiteness.map_or(m, |v: f64| v.max(m)));
            }
            CriticalKind::BoundaryN { .. } => {
                let piece = c.piece.expect("boundary point");
                let nrm = chart.euclidean_normal(piece, p.as_slice());
                // model coordinates (y, z): tangent, then inward normal
                let (r, phi) = if n == 1 {
                    (Form::from_row_slice(1, 1, &[-nrm[0]]), Form::from_row_slice(1, 1, &[2.0]))
                } else {
                    let h = tangential_jet_on_piece(&x.field, chart, piece, p.as_slice()).hessian;
                    (
                        Form::from_row_slice(2, 2, &[-nrm[1], nrm[0], -nrm[0], -nrm[1]]),
                        Form::from_row_slice(2, 2, &[h, 0.0, 0.0, 2.0]),
                    )
                };
                let model = &r * &a * r.transpose();
                let m = max_eigenvalue(&lie_form(&model, &phi));
                n_patch_definiteness = Some(n_patch_definiteness.map_or(m, |v: f64| v.max(m)));
            }
            CriticalKind::BoundaryD { .. } => unreachable!(),
        }
    }

    let passed = descent_samples > 0
        && descent_margin < 0.0
        && (inward_samples == 0 || inward_margin > 0.0)
        && interior_definiteness.is_none_or(|m| m < 0.0)
        && n_patch_definiteness.is_none_or(|m| m < 0.0)
        && hyperbolic
        && rest_residual < tol.tol_crit.max(1e-9);
    AdaptednessCertificate {
        descent_margin,
        descent_samples,
        inward_margin,
        inward_samples,
        interior_definiteness,
        n_patch_definiteness,
        hyperbolic,
        rest_residual,
        radii: x.radii,
        attempts: 1,
        passed,
    }
}

/// Builds and certifies an adapted pseudo-gradient for `f`, or for `-f`
/// (the field `X⁻`) when `for_negative` is set; `crit` is always the
/// critical set of `f`. Blend radii are halved up to three times.
pub fn build_adapted(
    field: &MorseField,
    chart: &ChartModel,
    crit: &CriticalSet,
    for_negative: bool,
    seed: Option<u64>,
    tol: &Tolerances,
) -> Result<(PseudoGradientField, AdaptednessCertificate)> {
    let (f, set) = if for_negative {
        let neg = field.negated();
        let set = crit.for_negative(&neg, chart);
        (neg, set)
    } else {
        (field.clone(), crit.clone())
    };
    let mut radii = BlendRadii { r_n: tol.r_n, delta_c: tol.delta_c, eps_n: tol.eps_n, r_excl: tol.r_excl };
    let mut last = None;
    for attempt in 1..=4 {
        let x = PseudoGradientField::assemble(f.clone(), chart.clone(), set.clone(), for_negative, radii, seed, tol.perturbation);
        let mut cert = certify_adapted(&x, tol);
        cert.attempts = attempt;
        if cert.passed {
            return Ok((x, cert));
        }
        last = Some(cert);
        radii.r_n *= 0.5;
        radii.delta_c *= 0.5;
    }
    let cert = last.expect("at least one attempt");
    Err(MorseError::BlendGapFailure(format!(
        "descent {:.3e}, inward {:.3e}, interior {:?}, patch {:?}, hyperbolic {}",
        cert.descent_margin, cert.inward_margin, cert.interior_definiteness, cert.n_patch_definiteness, cert.hyperbolic
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::critical::locate;

    fn built(name: &str, neg: bool) -> (PseudoGradientField, AdaptednessCertificate) {
        let e = catalog::get(name).unwrap();
        let tol = Tolerances::default();
        let crit = locate(&e.field, &e.chart, &tol).unwrap();
        build_adapted(&e.field, &e.chart, &crit, neg, None, &tol).unwrap()
    }

    #[test]
    fn bulk_is_minus_gradient() {
        let (x, _) = built("annulus", false);
        let v = x.eval(&[1.5, 0.0]);
        assert!((v - Vector::from_vec(vec![0.0, -1.0])).norm() < 1e-12);
    }

    #[test]
    fn moebius_n_point_is_tangent_rest_point() {
        let (x, _) = built("moebius", false);
        assert!(x.eval(&[std::f64::consts::PI, -1.0]).norm() < 1e-12);
        for du in [-0.149, -0.05, 0.02, 0.12] {
            let v = x.eval(&[std::f64::consts::PI + du, -1.0]);
            assert!(v[1].abs() < 1e-12, "{v}");
        }
    }

    #[test]
    fn disk_side_point_points_inward_and_descends() {
        let (x, _) = built("disk", false);
        let v = x.eval(&[1.0, 0.0]);
        assert!(-v[0] > 0.0);
        assert!(x.derivative_of_f(&[1.0, 0.0]) < 0.0);
    }

    #[test]
    fn catalog_certificates_pass_with_margins() {
        for name in catalog::list() {
            for neg in [false, true] {
                let (_, c) = built(name, neg);
                assert!(c.passed, "{name} {neg}: {c:?}");
                assert!(c.descent_margin < -1e-6, "{name}: {c:?}");
                assert!(c.inward_samples == 0 || c.inward_margin > 1e-6, "{name}: {c:?}");
            }
        }
    }

    #[test]
    fn unmodified_gradient_fails_inward_condition() {
        let e = catalog::get("annulus").unwrap();
        let p = Vector::from_vec(vec![0.3f64.cos(), 0.3f64.sin()]);
        let n = e.chart.frame_for_piece(0, p.as_slice()).normal;
        let minus_grad = -e.field.gradient(p.as_slice());
        assert!(-minus_grad.dot(&n) < 0.0);
    }

    #[test]
    fn negative_build_patches_sit_at_d_points() {
        let e = catalog::get("annulus").unwrap();
        let tol = Tolerances::default();
        let crit = locate(&e.field, &e.chart, &tol).unwrap();
        let (xm, _) = build_adapted(&e.field, &e.chart, &crit, true, None, &tol).unwrap();
        let mut d_ids: Vec<usize> =
            crit.points.iter().filter(|p| matches!(p.kind, CriticalKind::BoundaryD { .. })).map(|p| p.id).collect();
        let mut centers = xm.patch_centers();
        d_ids.sort();
        centers.sort();
        assert_eq!(d_ids, centers);
    }

    #[test]
    fn perturbed_fields_stay_adapted() {
        let e = catalog::get("annulus").unwrap();
        let tol = Tolerances::default();
        let crit = locate(&e.field, &e.chart, &tol).unwrap();
        let (plain, _) = build_adapted(&e.field, &e.chart, &crit, false, None, &tol).unwrap();
        for seed in 1..=3 {
            let (x, c) = build_adapted(&e.field, &e.chart, &crit, false, Some(seed), &tol).unwrap();
            assert!(c.passed);
            let moved = (0..50).any(|i| {
                let t = i as f64 * 0.125;
                let p = [1.5 * t.cos(), 1.5 * t.sin()];
                (x.eval(&p) - plain.eval(&p)).norm() > 0.0
            });
            assert!(moved, "seed {seed}");
        }
    }
}
