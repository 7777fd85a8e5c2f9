//! 800×800 SVG picture of a package: boundary, critical points and the
//! connecting orbits of `X` with their signs.

use std::fmt::Write;

use crate::chart::{BoundaryComponent, ChartModel, ChartShape, Vector};
use crate::critical::CriticalKind;
use crate::pipeline::MorsePackage;

const SIZE: f64 = 800.0;
const MARGIN: f64 = 40.0;
const COLORS: [&str; 3] = ["#1f77b4", "#2ca02c", "#d62728"];

struct View {
    lo: [f64; 2],
    scale: f64,
    offset: [f64; 2],
}

impl View {
    fn new(lo: [f64; 2], hi: [f64; 2]) -> Self {
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-9);
        let scale = (SIZE - 2.0 * MARGIN) / span;
        // center the shorter side
        let offset = [(span - (hi[0] - lo[0])) * scale / 2.0, (span - (hi[1] - lo[1])) * scale / 2.0];
        Self { lo, scale, offset }
    }

    fn map(&self, p: &[f64]) -> (f64, f64) {
        let y = if p.len() > 1 { p[1] } else { self.lo[1] };
        (
            MARGIN + self.offset[0] + (p[0] - self.lo[0]) * self.scale,
            SIZE - MARGIN - self.offset[1] - (y - self.lo[1]) * self.scale,
        )
    }
}

fn bounds(chart: &ChartModel) -> ([f64; 2], [f64; 2]) {
    match &chart.shape {
        ChartShape::Region { lo, hi, .. } if lo.len() == 1 => ([lo[0], 0.0], [hi[0], 0.0]),
        ChartShape::Region { lo, hi, .. } => ([lo[0], lo[1]], [hi[0], hi[1]]),
        ChartShape::Quotient { period, v_min, v_max, .. } => ([0.0, *v_min], [*period, *v_max]),
    }
}

/// Splits a lifted polyline into canonical pieces, breaking at seam jumps.
fn canonical_pieces(chart: &ChartModel, pts: &[Vector]) -> Vec<Vec<Vector>> {
    let mut out: Vec<Vec<Vector>> = Vec::new();
    let mut current: Vec<Vector> = Vec::new();
    let jump = match &chart.shape {
        ChartShape::Quotient { period, .. } => period / 2.0,
        _ => f64::INFINITY,
    };
    for p in pts {
        let c = if chart.is_quotient() { chart.canonicalize(p).0 } else { p.clone() };
        if let Some(last) = current.last() {
            if (&c - last).norm() > jump {
                out.push(std::mem::take(&mut current));
            }
        }
        current.push(c);
    }
    if !current.is_empty() {
        out.push(current);
    }
    out
}

fn polyline(s: &mut String, view: &View, pts: &[Vector], style: &str) {
    if pts.len() < 2 {
        return;
    }
    let coords: Vec<String> = pts
        .iter()
        .map(|p| {
            let (x, y) = view.map(p.as_slice());
            format!("{x:.2},{y:.2}")
        })
        .collect();
    let _ = writeln!(s, r#"<polyline fill="none" {style} points="{}"/>"#, coords.join(" "));
}

fn glyph(s: &mut String, x: f64, y: f64, kind: &CriticalKind, grading: usize) {
    let color = COLORS[grading.min(2)];
    match kind {
        CriticalKind::Interior { .. } => {
            let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="7" fill="{color}"/>"#);
        }
        CriticalKind::BoundaryN { .. } => {
            let _ = writeln!(s, r#"<rect x="{:.2}" y="{:.2}" width="14" height="14" fill="{color}"/>"#, x - 7.0, y - 7.0);
        }
        CriticalKind::BoundaryD { .. } => {
            let _ = writeln!(
                s,
                r#"<polygon points="{x:.2},{:.2} {:.2},{y:.2} {x:.2},{:.2} {:.2},{y:.2}" fill="white" stroke="{color}" stroke-width="3"/>"#,
                y - 9.0,
                x + 9.0,
                y + 9.0,
                x - 9.0
            );
        }
    }
}

pub fn render(pkg: &MorsePackage, chart: &ChartModel) -> String {
    let (lo, hi) = bounds(chart);
    let view = View::new(lo, hi);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="800" height="800" viewBox="0 0 800 800">"#);
    let _ = writeln!(s, r#"<rect width="800" height="800" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="10" y="22" font-family="sans-serif" font-size="16">{}</text>"#, pkg.name);

    if let ChartShape::Quotient { period, v_min, v_max, flip } = &chart.shape {
        // seam edges of the fundamental domain
        let style = r##"stroke="#999" stroke-dasharray="6,4""##;
        for u in [0.0, *period] {
            polyline(&mut s, &view, &[Vector::from_vec(vec![u, *v_min]), Vector::from_vec(vec![u, *v_max])], style);
        }
        let label = if *flip == -1 { "seam glued with a flip" } else { "seam glued straight" };
        let _ = writeln!(s, r#"<text x="10" y="790" font-family="sans-serif" font-size="12">{label}</text>"#);
    }

    let boundary_style = r#"stroke="black" stroke-width="3""#;
    for (_, comp) in chart.boundary_components() {
        match comp {
            BoundaryComponent::Point(p) => {
                let (x, y) = view.map(p.as_slice());
                let _ = writeln!(
                    s,
                    r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black" stroke-width="3"/>"#,
                    y - 15.0,
                    y + 15.0
                );
            }
            BoundaryComponent::Curve(c) => {
                let pts: Vec<Vector> = (0..=720).map(|i| (c.param)(c.period * i as f64 / 720.0)).collect();
                for piece in canonical_pieces(chart, &pts) {
                    polyline(&mut s, &view, &piece, boundary_style);
                }
            }
        }
    }
    if chart.dim() == 1 {
        polyline(&mut s, &view, &[Vector::from_element(1, lo[0]), Vector::from_element(1, hi[0])], r##"stroke="#bbb""##);
    }

    for orbit in &pkg.fields.orbits {
        let pts = orbit.trajectory.decimated(2.0 / view.scale).points();
        let color = if orbit.sign > 0 { "#ff7f0e" } else { "#9467bd" };
        let style = format!(r#"stroke="{color}" stroke-width="1.5""#);
        let pieces = canonical_pieces(chart, &pts);
        for piece in &pieces {
            polyline(&mut s, &view, piece, &style);
        }
        if let Some(mid) = pieces.iter().max_by_key(|p| p.len()).and_then(|p| p.get(p.len() / 2)) {
            let (x, y) = view.map(mid.as_slice());
            let text = if orbit.sign > 0 { "+" } else { "\u{2212}" };
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="14" fill="{color}">{text}</text>"#,
                x + 4.0,
                y - 4.0
            );
        }
    }

    for p in &pkg.crit.points {
        let (x, y) = view.map(p.point.as_slice());
        glyph(&mut s, x, y, &p.kind, p.grading);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12">{}{}</text>"#,
            x + 10.0,
            y + 16.0,
            p.kind.label(),
            p.grading
        );
    }
    s.push_str("</svg>\n");
    s
}
