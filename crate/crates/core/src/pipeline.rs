//! Full construction for one manifold: critical points, both pseudo-gradients,
//! the Neumann and Dirichlet complexes in both coefficient flavors, the dual
//! complex, polynomials, the pairing, and a ledger of checks against the
//! reference data.

use serde::Serialize;

use crate::algebra::{
    double_manifold_check, homology, morse_inequality_quotient, Direction, DoubleManifoldReport, HomologyResult, IntMatrix,
    IntPolynomial, IntegerChainComplex,
};
use crate::catalog::CatalogEntry;
use crate::chart::ChartModel;
use crate::critical::{locate, CriticalSet};
use crate::error::{MorseError, Result};
use crate::field::MorseField;
use crate::flow::{orbits_from, ConnectingOrbit, IncidenceCount};
use crate::pairing::intersection_pairing;
use crate::pseudo_gradient::{build_adapted, AdaptednessCertificate, PseudoGradientField};
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Untwisted,
    Orientation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    /// `F^N`, generated by `C ∪ N`.
    Neumann,
    /// `F^D`, generated by `C ∪ D`.
    Dirichlet,
    /// Transpose of `F^D`.
    Dual,
}

/// The group each complex computes.
pub fn homology_target(side: Side, flavor: Flavor) -> &'static str {
    match (side, flavor) {
        (Side::Neumann, Flavor::Untwisted) => "H_*(M; Z)",
        (Side::Neumann, Flavor::Orientation) => "H_*(M; Z^or)",
        (Side::Dirichlet, Flavor::Untwisted) => "H^*(M, dM; Z^or)",
        (Side::Dirichlet, Flavor::Orientation) => "H^*(M, dM; Z)",
        (Side::Dual, Flavor::Untwisted) => "H_*(M, dM; Z^or)",
        (Side::Dual, Flavor::Orientation) => "H_*(M, dM; Z)",
    }
}

/// Neumann-side orbits and complexes of a field: generators `C_k ∪ N_k` of
/// its own critical set, entries `m_pq` or `m_pq^or`.
pub fn neumann_orbits(x: &PseudoGradientField, tol: &Tolerances) -> Result<Vec<ConnectingOrbit>> {
    let mut all = Vec::new();
    for k in 1..=x.chart.dim() {
        for p in x.crit.neumann_generators(k) {
            all.extend(orbits_from(x, p, tol)?);
        }
    }
    Ok(all)
}

fn incidence_matrix(rows: &[usize], cols: &[usize], orbits: &[ConnectingOrbit], flavor: Flavor) -> IntMatrix {
    let mut m = IntMatrix::zeros(rows.len(), cols.len());
    for (i, p) in rows.iter().enumerate() {
        for (j, q) in cols.iter().enumerate() {
            let c = IncidenceCount::from_orbits(*p, *q, orbits);
            let v = match flavor {
                Flavor::Untwisted => c.m,
                Flavor::Orientation => c.m_or,
            };
            m.set(i, j, v.into());
        }
    }
    m
}

fn chain_from_orbits(crit: &CriticalSet, orbits: &[ConnectingOrbit], flavor: Flavor) -> Result<IntegerChainComplex> {
    let gens: Vec<Vec<usize>> = (0..=crit.dim).map(|k| crit.neumann_generators(k)).collect();
    let maps = (1..=crit.dim).map(|k| incidence_matrix(&gens[k], &gens[k - 1], orbits, flavor)).collect();
    IntegerChainComplex::new(gens, maps, Direction::Chain)
}

/// `(F^N, ∂)` or `(F^N, ∂^or)` for the field `x` adapted to `f`.
#[allow(non_snake_case)]
pub fn build_FN(x: &PseudoGradientField, flavor: Flavor, tol: &Tolerances) -> Result<IntegerChainComplex> {
    chain_from_orbits(&x.crit, &neumann_orbits(x, tol)?, flavor)
}

/// Regrades the Neumann complex of `-f` into the cochain complex `F^D` of
/// `f`: the generator of `(-f)`-grading `n-k` sits in degree `k` and
/// `d_k = ∂⁻_{n-k}`.
pub fn dirichlet_from_negative(neg: &IntegerChainComplex) -> Result<IntegerChainComplex> {
    let n = neg.top;
    let gens: Vec<Vec<usize>> = (0..=n).map(|k| neg.generators[n - k].clone()).collect();
    let maps = (1..=n).map(|k| neg.map(n - k + 1).transpose()).collect();
    IntegerChainComplex::new(gens, maps, Direction::Cochain)
}

/// `(F^D, d)` or `(F^D, d^or)` from the field `x_minus` adapted to `-f`.
#[allow(non_snake_case)]
pub fn build_FD(x_minus: &PseudoGradientField, flavor: Flavor, tol: &Tolerances) -> Result<IntegerChainComplex> {
    dirichlet_from_negative(&build_FN(x_minus, flavor, tol)?)
}

/// The complex with transposed differential.
pub fn dual_complex(fd: &IntegerChainComplex) -> IntegerChainComplex {
    fd.dual()
}

#[derive(Debug, Clone, Serialize)]
pub struct PairingMatrix {
    pub degree: usize,
    /// Generators of `F^D_k`.
    pub rows: Vec<usize>,
    /// Generators of `F^N_{n-k}`.
    pub cols: Vec<usize>,
    pub entries: Vec<Vec<i64>>,
    pub reason: Option<String>,
}

impl PairingMatrix {
    /// Determinant of a square matrix of size at most 2.
    pub fn small_determinant(&self) -> Option<i64> {
        match self.entries.len() {
            1 if self.cols.len() == 1 => Some(self.entries[0][0]),
            2 if self.cols.len() == 2 => {
                let e = &self.entries;
                Some(e[0][0] * e[1][1] - e[0][1] * e[1][0])
            }
            _ => None,
        }
    }
}

pub fn pairing_matrix(
    x: &PseudoGradientField,
    x_minus: &PseudoGradientField,
    k: usize,
    tol: &Tolerances,
) -> Result<PairingMatrix> {
    let n = x.chart.dim();
    let rows = x.crit.dirichlet_generators(k);
    let cols = x.crit.neumann_generators(n - k);
    if rows.is_empty() || cols.is_empty() {
        let reason = Some(format!("no generators in F^D_{k} or F^N_{}", n - k));
        return Ok(PairingMatrix { degree: k, rows, cols, entries: Vec::new(), reason });
    }
    let mut entries = Vec::new();
    for p in &rows {
        let mut row = Vec::new();
        for q in &cols {
            row.push(intersection_pairing(x, x_minus, *p, *q, tol)?);
        }
        entries.push(row);
    }
    Ok(PairingMatrix { degree: k, rows, cols, entries, reason: None })
}

#[derive(Debug, Clone, Serialize)]
pub struct InvarianceReport {
    pub seeds: Vec<u64>,
    /// `(seed, complex name, homology)`.
    pub results: Vec<(u64, String, HomologyResult)>,
}

/// Fails if two seeds disagree on the homology of a named complex.
pub fn compare_across_seeds(results: &[(u64, String, HomologyResult)]) -> Result<()> {
    for (seed, name, h) in results {
        if let Some((s0, _, h0)) = results.iter().find(|(_, n, _)| n == name) {
            if h0 != h {
                return Err(MorseError::InvarianceFailure(format!("{name}: seed {s0} gives {h0:?}, seed {seed} gives {h:?}")));
            }
        }
    }
    Ok(())
}

/// Rebuilds both fields with independently seeded perturbations and checks
/// that every complex has the same homology.
pub fn invariance_check(
    field: &MorseField,
    chart: &ChartModel,
    crit: &CriticalSet,
    seeds: &[u64],
    tol: &Tolerances,
) -> Result<InvarianceReport> {
    if seeds.len() < 2 {
        return Err(MorseError::InvarianceFailure("at least two seeds are needed".into()));
    }
    let mut results = Vec::new();
    for &seed in seeds {
        let fields = build_fields(field, chart, crit, seed, tol)?;
        for (name, h) in fields.homologies() {
            results.push((seed, name, h));
        }
    }
    compare_across_seeds(&results)?;
    Ok(InvarianceReport { seeds: seeds.to_vec(), results })
}

/// Both fields and their orbits for one perturbation seed.
pub struct FieldSet {
    pub x: PseudoGradientField,
    pub x_minus: PseudoGradientField,
    pub certificate: AdaptednessCertificate,
    pub certificate_minus: AdaptednessCertificate,
    pub orbits: Vec<ConnectingOrbit>,
    pub orbits_minus: Vec<ConnectingOrbit>,
    pub seed: u64,
    pub attempts: usize,
}

impl FieldSet {
    pub fn complex(&self, side: Side, flavor: Flavor) -> Result<IntegerChainComplex> {
        match side {
            Side::Neumann => chain_from_orbits(&self.x.crit, &self.orbits, flavor),
            Side::Dirichlet => dirichlet_from_negative(&chain_from_orbits(&self.x_minus.crit, &self.orbits_minus, flavor)?),
            Side::Dual => Ok(dual_complex(&self.complex(Side::Dirichlet, flavor)?)),
        }
    }

    fn homologies(&self) -> Vec<(String, HomologyResult)> {
        let mut out = Vec::new();
        for side in [Side::Neumann, Side::Dirichlet, Side::Dual] {
            for flavor in [Flavor::Untwisted, Flavor::Orientation] {
                if let Ok(cx) = self.complex(side, flavor) {
                    out.push((complex_name(side, flavor), homology(&cx)));
                }
            }
        }
        out
    }
}

pub fn complex_name(side: Side, flavor: Flavor) -> String {
    let base = match side {
        Side::Neumann => "FN",
        Side::Dirichlet => "FD",
        Side::Dual => "dual_FD",
    };
    match flavor {
        Flavor::Untwisted => base.to_string(),
        Flavor::Orientation => format!("{base}_or"),
    }
}

/// Builds `X`, `X⁻` and their orbits, retrying with a fresh perturbation
/// seed (up to three times) when a connection is not transverse.
pub fn build_fields(field: &MorseField, chart: &ChartModel, crit: &CriticalSet, seed: u64, tol: &Tolerances) -> Result<FieldSet> {
    let mut attempt = 0;
    loop {
        let s = seed + 1000 * attempt as u64;
        let result = (|| {
            let (x, certificate) = build_adapted(field, chart, crit, false, Some(s), tol)?;
            let (x_minus, certificate_minus) = build_adapted(field, chart, crit, true, Some(s), tol)?;
            let orbits = neumann_orbits(&x, tol)?;
            let orbits_minus = neumann_orbits(&x_minus, tol)?;
            Ok(FieldSet { x, x_minus, certificate, certificate_minus, orbits, orbits_minus, seed: s, attempts: attempt + 1 })
        })();
        match result {
            Err(MorseError::NonTransverse(_)) if attempt < 3 => attempt += 1,
            other => return other,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ComplexReport {
    pub name: String,
    pub side: Side,
    pub flavor: Flavor,
    pub target: &'static str,
    pub complex: IntegerChainComplex,
    pub homology: HomologyResult,
    pub reference: HomologyResult,
    pub matches: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Polynomials {
    pub morse_neumann: IntPolynomial,
    pub morse_dirichlet: IntPolynomial,
    pub poincare: IntPolynomial,
    pub poincare_relative_twisted: IntPolynomial,
    pub quotient_neumann: Option<IntPolynomial>,
    pub quotient_dirichlet: Option<IntPolynomial>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LedgerEntry {
    pub check: String,
    pub passed: bool,
    pub detail: String,
}

pub struct MorsePackage {
    pub name: String,
    pub dim: usize,
    pub crit: CriticalSet,
    pub fields: FieldSet,
    pub complexes: Vec<ComplexReport>,
    pub polynomials: Polynomials,
    pub double: DoubleManifoldReport,
    pub pairing: Vec<PairingMatrix>,
    pub ledger: Vec<LedgerEntry>,
}

impl MorsePackage {
    pub fn complex(&self, side: Side, flavor: Flavor) -> &ComplexReport {
        self.complexes.iter().find(|c| c.side == side && c.flavor == flavor).expect("all complexes are built")
    }

    pub fn passed(&self) -> bool {
        self.ledger.iter().all(|l| l.passed)
    }

    /// Incidence counts of the Neumann complex (orbits of `X`).
    pub fn neumann_incidences(&self) -> Vec<IncidenceCount> {
        incidences(&self.fields.orbits)
    }

    /// Incidence counts of the Dirichlet complex (orbits of `X⁻`).
    pub fn dirichlet_incidences(&self) -> Vec<IncidenceCount> {
        incidences(&self.fields.orbits_minus)
    }
}

fn incidences(orbits: &[ConnectingOrbit]) -> Vec<IncidenceCount> {
    let mut pairs: Vec<(usize, usize)> = orbits.iter().map(|o| (o.from, o.to)).collect();
    pairs.sort_unstable();
    pairs.dedup();
    pairs.into_iter().map(|(p, q)| IncidenceCount::from_orbits(p, q, orbits)).collect()
}

fn reference_for(entry: &CatalogEntry, side: Side, flavor: Flavor) -> HomologyResult {
    let r = &entry.reference;
    match (side, flavor) {
        (Side::Neumann, Flavor::Untwisted) => r.absolute.clone(),
        (Side::Neumann, Flavor::Orientation) => r.absolute_twisted.clone(),
        (Side::Dirichlet, Flavor::Untwisted) => r.relative_cohomology_twisted.clone(),
        (Side::Dirichlet, Flavor::Orientation) => r.relative_cohomology.clone(),
        (Side::Dual, Flavor::Untwisted) => r.relative_homology_twisted.clone(),
        (Side::Dual, Flavor::Orientation) => r.relative_homology.clone(),
    }
}

fn entry(check: &str, passed: bool, detail: impl Into<String>) -> LedgerEntry {
    LedgerEntry { check: check.to_string(), passed, detail: detail.into() }
}

/// Runs everything for a catalog entry with the given perturbation seed.
pub fn analyze(cat: &CatalogEntry, seed: u64, tol: &Tolerances) -> Result<MorsePackage> {
    let crit = locate(&cat.field, &cat.chart, tol)?;
    let fields = build_fields(&cat.field, &cat.chart, &crit, seed, tol)?;
    let n = crit.dim;
    let mut ledger = Vec::new();

    let mut complexes = Vec::new();
    for side in [Side::Neumann, Side::Dirichlet, Side::Dual] {
        for flavor in [Flavor::Untwisted, Flavor::Orientation] {
            let complex = fields.complex(side, flavor)?;
            let h = homology(&complex);
            let reference = reference_for(cat, side, flavor);
            let matches = h == reference;
            let name = complex_name(side, flavor);
            ledger.push(entry(
                &format!("homology {name}"),
                matches,
                format!("{} = betti {:?} torsion {:?}", homology_target(side, flavor), h.betti, h.torsion),
            ));
            complexes.push(ComplexReport {
                name,
                side,
                flavor,
                target: homology_target(side, flavor),
                complex,
                homology: h,
                reference,
                matches,
            });
        }
    }
    // construction already rejects a nonzero square; recorded for the ledger
    ledger.push(entry("square zero", true, "every differential squares to zero"));

    let counts = crit.counts();
    let morse_neumann = IntPolynomial::new(counts.iter().map(|(c, nn, _)| (c + nn) as i64).collect());
    let morse_dirichlet = IntPolynomial::new(counts.iter().map(|(c, _, d)| (c + d) as i64).collect());
    let poincare = cat.reference.poincare_absolute();
    let poincare_relative_twisted = cat.reference.poincare_relative_twisted();
    let qn = morse_inequality_quotient(&morse_neumann, &poincare);
    let qd = morse_inequality_quotient(&morse_dirichlet, &poincare_relative_twisted);
    ledger.push(entry("morse inequality N", qn.is_ok(), format!("{morse_neumann} - ({poincare}) = (1 + T)({})", show(&qn))));
    ledger.push(entry(
        "morse inequality D",
        qd.is_ok(),
        format!("{morse_dirichlet} - ({poincare_relative_twisted}) = (1 + T)({})", show(&qd)),
    ));
    let chi = morse_neumann.eval(-1);
    ledger.push(entry("euler characteristic", chi == cat.euler_characteristic, format!("{chi} vs {}", cat.euler_characteristic)));

    let double = double_manifold_check(&counts, &poincare, &poincare_relative_twisted);
    ledger.push(entry("double sum identity", double.sum_identity, format!("M_D = {}", double.m_double)));
    if cat.orientable {
        ledger.push(entry(
            "double morse inequality",
            double.quotient.is_some(),
            format!(
                "{} - ({}) over (1 + T): {:?}",
                double.m_double,
                double.p_double,
                double.quotient.as_ref().map(|q| q.to_string())
            ),
        ));
    }

    for (label, c) in [("certificate X", &fields.certificate), ("certificate X-", &fields.certificate_minus)] {
        ledger.push(entry(label, c.passed, format!("descent {:.3e}, inward {:.3e}", c.descent_margin, c.inward_margin)));
    }

    let mut pairing = Vec::new();
    let dual = complexes.iter().find(|c| c.side == Side::Dual && c.flavor == Flavor::Untwisted).expect("dual built");
    let neumann = complexes.iter().find(|c| c.side == Side::Neumann && c.flavor == Flavor::Untwisted).expect("FN built");
    for k in 0..=n {
        let pm = pairing_matrix(&fields.x, &fields.x_minus, k, tol)?;
        let is_z = |h: &HomologyResult, d: usize| h.betti[d] == 1 && h.torsion[d].is_empty();
        if is_z(&dual.homology, k) && is_z(&neumann.homology, n - k) {
            if let Some(det) = pm.small_determinant() {
                ledger.push(entry(&format!("pairing degree {k}"), det.abs() == 1, format!("determinant {det}")));
            }
        }
        pairing.push(pm);
    }

    let polynomials = Polynomials {
        morse_neumann,
        morse_dirichlet,
        poincare,
        poincare_relative_twisted,
        quotient_neumann: qn.ok(),
        quotient_dirichlet: qd.ok(),
    };
    Ok(MorsePackage { name: cat.name.to_string(), dim: n, crit, fields, complexes, polynomials, double, pairing, ledger })
}

fn show(q: &Result<IntPolynomial>) -> String {
    match q {
        Ok(p) => p.to_string(),
        Err(e) => e.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corrupted_homology_is_an_invariance_failure() {
        let good = HomologyResult::free(&[1, 1, 0]);
        let bad = HomologyResult::free(&[0, 0, 0]);
        let ok = vec![(1, "FN".to_string(), good.clone()), (2, "FN".to_string(), good.clone())];
        assert!(compare_across_seeds(&ok).is_ok());
        let broken = vec![(1, "FN".to_string(), good), (2, "FN".to_string(), bad)];
        assert!(matches!(compare_across_seeds(&broken), Err(MorseError::InvarianceFailure(_))));
    }

    #[test]
    fn regrading_reverses_degrees() {
        // chain complex of -f with a single map 1 -> 0 of value 2
        let neg = IntegerChainComplex::new(
            vec![vec![7], vec![8], vec![]],
            vec![IntMatrix::from_rows(&[vec![2]]), IntMatrix::zeros(0, 1)],
            Direction::Chain,
        )
        .unwrap();
        let fd = dirichlet_from_negative(&neg).unwrap();
        assert_eq!(fd.generators, vec![vec![], vec![8], vec![7]]);
        let h = homology(&fd);
        assert_eq!(h, HomologyResult::free(&[0, 0, 0]).with_torsion(2, &[2]));
    }
}
