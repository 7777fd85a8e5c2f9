//! JSON and text renderings of a [`MorsePackage`].

use std::fmt::Write;

use serde_json::{json, Value};

use crate::catalog::CatalogEntry;
use crate::chart::BoundaryComponent;
use crate::critical::CriticalKind;
use crate::flow::IncidenceCount;
use crate::pipeline::{ComplexReport, Flavor, LedgerEntry, MorsePackage, Side};

/// Which complexes and coefficient systems to include.
#[derive(Debug, Clone, Copy)]
pub struct ReportOptions {
    pub neumann: bool,
    pub dirichlet: bool,
    pub untwisted: bool,
    pub orientation: bool,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self { neumann: true, dirichlet: true, untwisted: true, orientation: true }
    }
}

impl ReportOptions {
    pub fn includes(&self, side: Side, flavor: Flavor) -> bool {
        let s = match side {
            Side::Neumann => self.neumann,
            Side::Dirichlet | Side::Dual => self.dirichlet,
        };
        let f = match flavor {
            Flavor::Untwisted => self.untwisted,
            Flavor::Orientation => self.orientation,
        };
        s && f
    }
}

// keep printed floats stable across platforms
fn round(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let digits = 10 - x.abs().log10().ceil() as i32;
    let scale = 10f64.powi(digits.clamp(-300, 300));
    (x * scale).round() / scale
}

fn rounded(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| round(*x)).collect()
}

fn kind_json(kind: &CriticalKind) -> Value {
    match *kind {
        CriticalKind::Interior { index } => json!({"type": "C", "index": index}),
        CriticalKind::BoundaryN { boundary_index } => json!({"type": "N", "boundary_index": boundary_index}),
        CriticalKind::BoundaryD { boundary_index } => json!({"type": "D", "boundary_index": boundary_index}),
    }
}

fn incidence_json(c: &IncidenceCount) -> Value {
    let orbits: Vec<Value> = c.orbits.iter().map(|o| json!({"sign": o.sign, "w1": o.w1})).collect();
    json!({"from": c.from, "to": c.to, "m": c.m, "m_or": c.m_or, "orbits": orbits})
}

fn complex_json(c: &ComplexReport) -> Value {
    let maps: Vec<Value> = (0..=c.complex.top + 1).map(|k| json!(c.complex.map(k).to_i64_rows())).collect();
    json!({
        "direction": c.complex.direction,
        "computes": c.target,
        "generators": c.complex.generators,
        "maps": maps,
    })
}

fn boundary_json(entry: &CatalogEntry) -> Vec<Value> {
    entry
        .chart
        .boundary_components()
        .iter()
        .map(|(piece, comp)| match comp {
            BoundaryComponent::Point(p) => json!({"piece": piece, "point": rounded(p.as_slice())}),
            BoundaryComponent::Curve(c) => json!({"piece": piece, "parameter_period": round(c.period)}),
        })
        .collect()
}

pub fn to_json(pkg: &MorsePackage, entry: &CatalogEntry, opts: &ReportOptions) -> Value {
    let critical: Vec<Value> = pkg
        .crit
        .points
        .iter()
        .map(|p| {
            json!({
                "id": p.id,
                "kind": kind_json(&p.kind),
                "grading": p.grading,
                "location": rounded(p.point.as_slice()),
                "value": round(p.value),
                "piece": p.piece,
            })
        })
        .collect();

    let cert = |c: &crate::pseudo_gradient::AdaptednessCertificate| {
        json!({
            "passed": c.passed,
            "descent_margin": round(c.descent_margin),
            "descent_samples": c.descent_samples,
            "inward_margin": round(c.inward_margin),
            "inward_samples": c.inward_samples,
            "interior_definiteness": c.interior_definiteness.map(round),
            "n_patch_definiteness": c.n_patch_definiteness.map(round),
            "hyperbolic": c.hyperbolic,
            "rest_residual": round(c.rest_residual),
            "attempts": c.attempts,
            "radii": {
                "r_n": round(c.radii.r_n),
                "delta_c": round(c.radii.delta_c),
                "eps_n": round(c.radii.eps_n),
                "r_excl": round(c.radii.r_excl),
            },
        })
    };

    let mut complexes = serde_json::Map::new();
    let mut homology = serde_json::Map::new();
    for c in pkg.complexes.iter().filter(|c| opts.includes(c.side, c.flavor)) {
        complexes.insert(c.name.clone(), complex_json(c));
        homology.insert(
            c.name.clone(),
            json!({
                "computes": c.target,
                "betti": c.homology.betti,
                "torsion": c.homology.torsion,
                "reference": {"betti": c.reference.betti, "torsion": c.reference.torsion},
                "matches": c.matches,
            }),
        );
    }
    if opts.neumann {
        complexes.insert("incidences_X".into(), pkg.neumann_incidences().iter().map(incidence_json).collect());
    }
    if opts.dirichlet {
        complexes.insert("incidences_X_minus".into(), pkg.dirichlet_incidences().iter().map(incidence_json).collect());
    }

    let p = &pkg.polynomials;
    let poly = |q: &crate::algebra::IntPolynomial| json!({"text": q.to_string(), "coefficients": q.coeffs()});
    let opt_poly = |q: &Option<crate::algebra::IntPolynomial>| q.as_ref().map(poly).unwrap_or(Value::Null);
    let d = &pkg.double;
    let polynomials = json!({
        "morse_neumann": poly(&p.morse_neumann),
        "morse_dirichlet": poly(&p.morse_dirichlet),
        "poincare": poly(&p.poincare),
        "poincare_relative_twisted": poly(&p.poincare_relative_twisted),
        "quotient_neumann": opt_poly(&p.quotient_neumann),
        "quotient_dirichlet": opt_poly(&p.quotient_dirichlet),
        "double": {
            "morse": poly(&d.m_double),
            "poincare": poly(&d.p_double),
            "sum_identity": d.sum_identity,
            "quotient": opt_poly(&d.quotient),
            "quotient_error": d.quotient_error,
            "orientable": entry.orientable,
        },
    });

    json!({
        "manifold": {
            "name": pkg.name,
            "description": entry.description,
            "dim": pkg.dim,
            "orientable": entry.orientable,
            "euler_characteristic": entry.euler_characteristic,
            "boundary": boundary_json(entry),
        },
        "critical_points": critical,
        "certificates": {"X": cert(&pkg.fields.certificate), "X_minus": cert(&pkg.fields.certificate_minus)},
        "complexes": complexes,
        "homology": homology,
        "polynomials": polynomials,
        "pairing": pkg.pairing,
        "ledger": pkg.ledger,
        "meta": {
            "seed": pkg.fields.seed,
            "perturbation_attempts": pkg.fields.attempts,
            "version": env!("CARGO_PKG_VERSION"),
            "passed": pkg.passed(),
        },
    })
}

// avoid printing "-0.000000"
fn clean(x: f64) -> f64 {
    if x.abs() < 5e-7 {
        0.0
    } else {
        x
    }
}

fn group(betti: usize, torsion: &[u64]) -> String {
    let mut parts = Vec::new();
    match betti {
        0 => {}
        1 => parts.push("Z".to_string()),
        b => parts.push(format!("Z^{b}")),
    }
    parts.extend(torsion.iter().map(|t| format!("Z/{t}")));
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

pub fn to_text(pkg: &MorsePackage, entry: &CatalogEntry, opts: &ReportOptions) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} (dim {}): {}", pkg.name, pkg.dim, entry.description);
    let _ = writeln!(s, "critical points:");
    for p in &pkg.crit.points {
        let loc: Vec<String> = p.point.as_slice().iter().map(|x| format!("{:.6}", clean(*x))).collect();
        let _ = writeln!(
            s,
            "  #{} {} grading {} at ({}) value {:.6}",
            p.id,
            p.kind.label(),
            p.grading,
            loc.join(", "),
            clean(p.value)
        );
    }
    for c in pkg.complexes.iter().filter(|c| opts.includes(c.side, c.flavor)) {
        let groups: Vec<String> =
            (0..c.homology.betti.len()).map(|k| group(c.homology.betti[k], &c.homology.torsion[k])).collect();
        let mark = if c.matches { "ok" } else { "MISMATCH" };
        let _ = writeln!(s, "{:<10} {:<18} [{}] {mark}", c.name, c.target, groups.join(", "));
    }
    let p = &pkg.polynomials;
    let _ = writeln!(s, "M_N = {}    P = {}", p.morse_neumann, p.poincare);
    let _ = writeln!(s, "M_D = {}    P_rel = {}", p.morse_dirichlet, p.poincare_relative_twisted);
    for pm in &pkg.pairing {
        match &pm.reason {
            Some(r) => {
                let _ = writeln!(s, "pairing degree {}: {r}", pm.degree);
            }
            None => {
                let _ = writeln!(s, "pairing degree {}: {:?}", pm.degree, pm.entries);
            }
        }
    }
    let _ = writeln!(s, "checks:");
    for l in &pkg.ledger {
        let _ = writeln!(s, "  [{}] {}: {}", if l.passed { "pass" } else { "FAIL" }, l.check, l.detail);
    }
    s
}

/// Ledger entries that failed, restricted to the requested complexes.
pub fn failed_checks<'a>(pkg: &'a MorsePackage, opts: &ReportOptions) -> Vec<&'a LedgerEntry> {
    pkg.ledger
        .iter()
        .filter(|l| !l.passed)
        .filter(|l| match pkg.complexes.iter().find(|c| l.check == format!("homology {}", c.name)) {
            Some(c) => opts.includes(c.side, c.flavor),
            None => true,
        })
        .collect()
}
