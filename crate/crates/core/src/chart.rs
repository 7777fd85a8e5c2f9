//! Coordinate models of compact manifolds with boundary.
//!
//! Two shapes cover every manifold we need: a region of `R^n` cut out by
//! smooth constraints `b_i(x) <= 0`, and a strip `R x [v_min, v_max]`
//! modulo a deck transformation `T(u, v) = (u + P, sigma v)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{MorseError, Result};

pub type Vector = DVector<f64>;
pub type Form = DMatrix<f64>;

pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&[f64]) -> Vector + Send + Sync>;
pub type FormFn = Arc<dyn Fn(&[f64]) -> Form + Send + Sync>;
pub type CurveFn = Arc<dyn Fn(f64) -> Vector + Send + Sync>;

pub const TOL_GEOM: f64 = 1e-9;

/// A smooth constraint `b(x) <= 0` together with its derivatives and, for
/// planar regions, a closed parametrization of its zero set.
#[derive(Clone)]
pub struct Constraint {
    pub name: String,
    pub value: ScalarFn,
    pub gradient: VectorFn,
    pub hessian: FormFn,
    pub curve: Option<BoundaryCurve>,
}

impl fmt::Debug for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Constraint").field("name", &self.name).finish()
    }
}

/// Closed parametrization `theta -> raw point` of one boundary component.
#[derive(Clone)]
pub struct BoundaryCurve {
    pub param: CurveFn,
    pub period: f64,
}

impl Constraint {
    /// `|x - center|^2 - r^2 <= 0`: inside a circle.
    pub fn inside_circle(name: &str, center: [f64; 2], radius: f64) -> Self {
        Self::circle(name, center, radius, 1.0)
    }

    /// `r^2 - |x - center|^2 <= 0`: outside a circle.
    pub fn outside_circle(name: &str, center: [f64; 2], radius: f64) -> Self {
        Self::circle(name, center, radius, -1.0)
    }

    fn circle(name: &str, c: [f64; 2], r: f64, s: f64) -> Self {
        Self {
            name: name.to_string(),
            value: Arc::new(move |x| s * ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2) - r * r)),
            gradient: Arc::new(move |x| Vector::from_vec(vec![2.0 * s * (x[0] - c[0]), 2.0 * s * (x[1] - c[1])])),
            hessian: Arc::new(move |_| Form::identity(2, 2) * (2.0 * s)),
            curve: Some(BoundaryCurve {
                param: Arc::new(move |t| Vector::from_vec(vec![c[0] + r * t.cos(), c[1] + r * t.sin()])),
                period: 2.0 * PI,
            }),
        }
    }

    /// `s (x - a) <= 0` on the line: `s = -1` keeps `x >= a`, `s = +1` keeps `x <= a`.
    pub fn half_line(name: &str, a: f64, s: f64) -> Self {
        Self {
            name: name.to_string(),
            value: Arc::new(move |x| s * (x[0] - a)),
            gradient: Arc::new(move |_| Vector::from_element(1, s)),
            hessian: Arc::new(|_| Form::zeros(1, 1)),
            curve: None,
        }
    }
}

/// Symmetric positive-definite bilinear form field.
#[derive(Clone)]
pub struct MetricField {
    pub eval: FormFn,
    pub euclidean: bool,
}

impl MetricField {
    pub fn euclidean(dim: usize) -> Self {
        Self { eval: Arc::new(move |_| Form::identity(dim, dim)), euclidean: true }
    }

    /// Multiplies the metric by a constant factor.
    pub fn scaled(&self, factor: f64) -> Self {
        let inner = self.eval.clone();
        Self { eval: Arc::new(move |x| inner(x) * factor), euclidean: false }
    }

    pub fn at(&self, x: &[f64]) -> Form {
        (self.eval)(x)
    }
}

impl fmt::Debug for MetricField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricField").field("euclidean", &self.euclidean).finish()
    }
}

#[derive(Debug, Clone)]
pub enum ChartShape {
    Region {
        dim: usize,
        lo: Vec<f64>,
        hi: Vec<f64>,
        constraints: Vec<Constraint>,
    },
    Quotient {
        period: f64,
        v_min: f64,
        v_max: f64,
        /// Deck flip sign, +1 or -1.
        flip: i32,
    },
}

/// Canonical chart coordinates of a manifold point.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub coords: Vector,
}

impl Point {
    pub fn new(coords: &[f64]) -> Self {
        Self { coords: Vector::from_column_slice(coords) }
    }

    pub fn as_slice(&self) -> &[f64] {
        self.coords.as_slice()
    }
}

/// Active boundary piece of a point with its outward metric-unit normal.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    pub piece: usize,
    pub normal: Vector,
}

/// Local boundary geometry near (not necessarily on) the boundary.
#[derive(Debug, Clone)]
pub struct CollarFrame {
    pub piece: usize,
    /// Signed depth, positive inside the manifold.
    pub depth: f64,
    /// Outward unit normal in the metric.
    pub normal: Vector,
    /// Unit tangent, metric-orthogonal to `normal` (empty for dimension 1).
    pub tangent: Option<Vector>,
}

/// One connected boundary component, parametrized in raw coordinates.
#[derive(Clone)]
pub enum BoundaryComponent {
    Point(Vector),
    Curve(BoundaryCurve),
}

#[derive(Debug, Clone)]
pub struct ChartModel {
    pub shape: ChartShape,
    pub metric: MetricField,
}

impl ChartModel {
    pub fn region(lo: Vec<f64>, hi: Vec<f64>, constraints: Vec<Constraint>) -> Self {
        let dim = lo.len();
        assert_eq!(dim, hi.len());
        Self { shape: ChartShape::Region { dim, lo, hi, constraints }, metric: MetricField::euclidean(dim) }
    }

    /// Strip chart; panics if a flip is requested on an asymmetric strip.
    pub fn quotient(period: f64, v_min: f64, v_max: f64, flip: i32) -> Self {
        assert!(flip == 1 || flip == -1, "flip sign must be +1 or -1");
        assert!(v_min < v_max);
        if flip == -1 {
            assert!((v_min + v_max).abs() < TOL_GEOM, "a flip must preserve the strip");
        }
        Self { shape: ChartShape::Quotient { period, v_min, v_max, flip }, metric: MetricField::euclidean(2) }
    }

    pub fn with_metric(mut self, metric: MetricField) -> Self {
        self.metric = metric;
        self
    }

    pub fn dim(&self) -> usize {
        match &self.shape {
            ChartShape::Region { dim, .. } => *dim,
            ChartShape::Quotient { .. } => 2,
        }
    }

    /// Deck flip sign (always +1 for regions).
    pub fn flip(&self) -> i32 {
        match &self.shape {
            ChartShape::Region { .. } => 1,
            ChartShape::Quotient { flip, .. } => *flip,
        }
    }

    pub fn is_quotient(&self) -> bool {
        matches!(self.shape, ChartShape::Quotient { .. })
    }

    /// Bounding box of the canonical fundamental domain.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match &self.shape {
            ChartShape::Region { lo, hi, .. } => (lo.clone(), hi.clone()),
            ChartShape::Quotient { period, v_min, v_max, .. } => (vec![0.0, *v_min], vec![*period, *v_max]),
        }
    }

    /// Applies `T^k`.
    pub fn deck(&self, x: &Vector, k: i64) -> Vector {
        match &self.shape {
            ChartShape::Region { .. } => x.clone(),
            ChartShape::Quotient { period, flip, .. } => {
                let s = sign_power(*flip, k) as f64;
                Vector::from_vec(vec![x[0] + k as f64 * period, s * x[1]])
            }
        }
    }

    /// Applies the differential of `T^k` to a tangent vector.
    pub fn deck_vector(&self, v: &Vector, k: i64) -> Vector {
        match &self.shape {
            ChartShape::Region { .. } => v.clone(),
            ChartShape::Quotient { flip, .. } => {
                let s = sign_power(*flip, k) as f64;
                Vector::from_vec(vec![v[0], s * v[1]])
            }
        }
    }

    /// Splits a raw point into canonical coordinates and the deck power `k`
    /// with `raw = T^k(canonical)`. No membership check.
    pub fn canonicalize(&self, raw: &Vector) -> (Vector, i64) {
        match &self.shape {
            ChartShape::Region { .. } => (raw.clone(), 0),
            ChartShape::Quotient { period, flip, .. } => {
                let mut k = (raw[0] / period).floor() as i64;
                let mut u = raw[0] - k as f64 * period;
                // values within rounding of the period belong to the next sheet
                if u >= period - 1e-10 * period.max(1.0) {
                    u = (u - period).max(0.0);
                    k += 1;
                }
                if u < 0.0 {
                    u = 0.0;
                }
                let s = sign_power(*flip, k) as f64;
                (Vector::from_vec(vec![u, s * raw[1]]), k)
            }
        }
    }

    /// Membership test on canonical (or region) coordinates.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        match &self.shape {
            ChartShape::Region { lo, hi, constraints, .. } => {
                x.iter().zip(lo).all(|(v, l)| *v >= l - tol)
                    && x.iter().zip(hi).all(|(v, h)| *v <= h + tol)
                    && constraints.iter().all(|c| (c.value)(x) <= tol)
            }
            ChartShape::Quotient { v_min, v_max, .. } => x[1] >= v_min - tol && x[1] <= v_max + tol,
        }
    }

    /// Canonical form of a raw point plus the orientation sign of the
    /// normalization.
    pub fn normalize_point(&self, raw: &[f64]) -> Result<(Point, i32)> {
        if raw.len() != self.dim() {
            return Err(MorseError::DimensionMismatch(format!("expected {} coordinates, got {}", self.dim(), raw.len())));
        }
        let (canon, k) = self.canonicalize(&Vector::from_column_slice(raw));
        if !self.contains(canon.as_slice(), TOL_GEOM) {
            return Err(MorseError::PointOutsideManifold(raw.to_vec()));
        }
        Ok((Point { coords: canon }, sign_power(self.flip(), k)))
    }

    /// Product of deck flips accumulated along a raw polyline.
    pub fn path_orientation_sign(&self, polyline: &[Vector]) -> i32 {
        if polyline.len() < 2 || self.flip() == 1 {
            return 1;
        }
        polyline
            .windows(2)
            .map(|w| {
                let (_, a) = self.canonicalize(&w[0]);
                let (_, b) = self.canonicalize(&w[1]);
                sign_power(self.flip(), b - a)
            })
            .product()
    }

    /// Number of boundary pieces (constraints, or the two strip edges).
    pub fn piece_count(&self) -> usize {
        match &self.shape {
            ChartShape::Region { constraints, .. } => constraints.len(),
            ChartShape::Quotient { .. } => 2,
        }
    }

    /// Euclidean depth, outward Euclidean unit normal, and the second
    /// fundamental form `II(t, t)` for the unit Euclidean tangent.
    fn piece_geometry(&self, piece: usize, x: &[f64]) -> (f64, Vector, f64) {
        match &self.shape {
            ChartShape::Region { constraints, dim, .. } => {
                let c = &constraints[piece];
                let g = (c.gradient)(x);
                let norm = g.norm();
                let n = &g / norm;
                let second = if *dim == 2 {
                    let t = Vector::from_vec(vec![-n[1], n[0]]);
                    (t.transpose() * (c.hessian)(x) * &t)[(0, 0)] / norm
                } else {
                    0.0
                };
                (-(c.value)(x) / norm, n, second)
            }
            ChartShape::Quotient { v_min, v_max, .. } => {
                if piece == 0 {
                    (x[1] - v_min, Vector::from_vec(vec![0.0, -1.0]), 0.0)
                } else {
                    (v_max - x[1], Vector::from_vec(vec![0.0, 1.0]), 0.0)
                }
            }
        }
    }

    /// Second fundamental form of the piece at `x`, evaluated on its
    /// Euclidean unit tangent.
    pub fn second_fundamental(&self, piece: usize, x: &[f64]) -> f64 {
        self.piece_geometry(piece, x).2
    }

    pub fn euclidean_normal(&self, piece: usize, x: &[f64]) -> Vector {
        self.piece_geometry(piece, x).1
    }

    /// Euclidean signed depth of `x` below each piece.
    pub fn depths(&self, x: &[f64]) -> Vec<f64> {
        (0..self.piece_count()).map(|i| self.piece_geometry(i, x).0).collect()
    }

    /// Collar frame of the nearest boundary piece, with metric-unit vectors.
    pub fn collar_frame(&self, x: &[f64]) -> Option<CollarFrame> {
        let (piece, _) = self.depths(x).into_iter().enumerate().min_by(|a, b| a.1.total_cmp(&b.1))?;
        Some(self.frame_for_piece(piece, x))
    }

    pub fn frame_for_piece(&self, piece: usize, x: &[f64]) -> CollarFrame {
        let (depth, n_euc, _) = self.piece_geometry(piece, x);
        let g = self.metric.at(x);
        if self.metric.euclidean {
            let tangent = (self.dim() == 2).then(|| Vector::from_vec(vec![-n_euc[1], n_euc[0]]));
            return CollarFrame { piece, depth, normal: n_euc, tangent };
        }
        let ginv = g.clone().try_inverse().expect("metric is positive definite");
        // metric gradient of b, normalized
        let raw = &ginv * &n_euc;
        let len = (raw.transpose() * &g * &raw)[(0, 0)].sqrt();
        let normal = raw / len;
        let tangent = (self.dim() == 2).then(|| {
            let t0 = Vector::from_vec(vec![-n_euc[1], n_euc[0]]);
            let along = (t0.transpose() * &g * &normal)[(0, 0)];
            let t = t0 - &normal * along;
            let tl = (t.transpose() * &g * &t)[(0, 0)].sqrt();
            t / tl
        });
        CollarFrame { piece, depth, normal, tangent }
    }

    /// Active boundary piece of a valid point, if any.
    pub fn boundary_data(&self, p: &Point) -> Result<Option<BoundaryData>> {
        let active: Vec<usize> =
            self.depths(p.as_slice()).into_iter().enumerate().filter(|(_, d)| d.abs() <= TOL_GEOM).map(|(i, _)| i).collect();
        match active.as_slice() {
            [] => Ok(None),
            [piece] => {
                let frame = self.frame_for_piece(*piece, p.as_slice());
                Ok(Some(BoundaryData { piece: *piece, normal: frame.normal }))
            }
            _ => Err(MorseError::AmbiguousBoundary(p.as_slice().to_vec())),
        }
    }

    /// Moves a point onto the zero set of a piece along the normal direction.
    pub fn project_to_piece(&self, piece: usize, x: &Vector) -> Vector {
        match &self.shape {
            ChartShape::Region { constraints, .. } => {
                let c = &constraints[piece];
                let mut y = x.clone();
                for _ in 0..50 {
                    let b = (c.value)(y.as_slice());
                    let g = (c.gradient)(y.as_slice());
                    let step = &g * (b / g.norm_squared());
                    y -= step;
                    if b.abs() < 1e-15 {
                        break;
                    }
                }
                y
            }
            ChartShape::Quotient { v_min, v_max, .. } => {
                let mut y = x.clone();
                y[1] = if piece == 0 { *v_min } else { *v_max };
                y
            }
        }
    }

    /// Representative `T^j(x)` nearest to `center` (both canonical) and its `j`.
    pub fn nearest_representative(&self, center: &Vector, x: &Vector) -> (Vector, i64) {
        if !self.is_quotient() {
            return (x.clone(), 0);
        }
        (-1..=1)
            .map(|j| (self.deck(x, j), j))
            .min_by(|a, b| (&a.0 - center).norm().total_cmp(&(&b.0 - center).norm()))
            .expect("three candidates")
    }

    /// Connected components of the boundary.
    pub fn boundary_components(&self) -> Vec<(usize, BoundaryComponent)> {
        match &self.shape {
            ChartShape::Region { dim: 1, lo, hi, constraints } => {
                let mut out = Vec::new();
                for (i, c) in constraints.iter().enumerate() {
                    for root in line_roots(&*c.value, lo[0], hi[0], 4000) {
                        out.push((i, BoundaryComponent::Point(Vector::from_element(1, root))));
                    }
                }
                out
            }
            ChartShape::Region { constraints, .. } => constraints
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let curve = c.curve.clone().expect("planar constraints carry a parametrization");
                    (i, BoundaryComponent::Curve(curve))
                })
                .collect(),
            ChartShape::Quotient { period, v_min, v_max, flip } => {
                let p = *period;
                let edge =
                    |v: f64, len: f64| BoundaryCurve { param: Arc::new(move |t| Vector::from_vec(vec![t, v])), period: len };
                if *flip == 1 {
                    vec![(0, BoundaryComponent::Curve(edge(*v_min, p))), (1, BoundaryComponent::Curve(edge(*v_max, p)))]
                } else {
                    // a single circle of length 2P, traversed along v_max
                    vec![(1, BoundaryComponent::Curve(edge(*v_max, 2.0 * p)))]
                }
            }
        }
    }

    /// Max deviation of `G(T p)` from `DT G(p) DT` over the given points.
    pub fn metric_deck_defect(&self, points: &[Vector]) -> f64 {
        if !self.is_quotient() {
            return 0.0;
        }
        let s = self.flip() as f64;
        let d = Form::from_diagonal(&Vector::from_vec(vec![1.0, s]));
        points
            .iter()
            .map(|p| {
                let moved = self.deck(p, 1);
                let (canon, _) = self.canonicalize(&moved);
                let lhs = self.metric.at(canon.as_slice());
                let rhs = &d * self.metric.at(p.as_slice()) * &d;
                (lhs - rhs).amax()
            })
            .fold(0.0, f64::max)
    }
}

pub(crate) fn sign_power(flip: i32, k: i64) -> i32 {
    if flip == -1 && k.rem_euclid(2) == 1 {
        -1
    } else {
        1
    }
}

/// Roots of a scalar function on `[lo, hi]` by sign-change scan and bisection;
/// exact zeros at sample points are kept.
fn line_roots(g: &(dyn Fn(&[f64]) -> f64 + Send + Sync), lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let xs: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let vals: Vec<f64> = xs.iter().map(|x| g(&[*x])).collect();
    let mut roots = Vec::new();
    for i in 0..n {
        if vals[i] == 0.0 {
            roots.push(xs[i]);
        } else if vals[i] * vals[i + 1] < 0.0 {
            let (mut a, mut b) = (xs[i], xs[i + 1]);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if g(&[a]) * g(&[m]) <= 0.0 {
                    b = m;
                } else {
                    a = m;
                }
                if b - a < 1e-15 {
                    break;
                }
            }
            roots.push(0.5 * (a + b));
        }
    }
    if vals[n] == 0.0 {
        roots.push(xs[n]);
    }
    roots
}
