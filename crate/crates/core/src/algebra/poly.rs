//! Integer polynomials in `T` and the Morse-inequality checks.

use std::fmt;

use serde::Serialize;

use crate::error::{MorseError, Result};

/// Coefficients indexed by the power of `T`, trailing zeros trimmed.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
#[serde(transparent)]
pub struct IntPolynomial {
    coeffs: Vec<i64>,
}

impl IntPolynomial {
    pub fn new(mut coeffs: Vec<i64>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_counts(counts: &[usize]) -> Self {
        Self::new(counts.iter().map(|c| *c as i64).collect())
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> i64 {
        self.coeffs.get(k).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) - other.coeff(k)).collect())
    }

    pub fn eval(&self, t: i64) -> i64 {
        self.coeffs.iter().rev().fold(0, |acc, c| acc * t + c)
    }

    /// `T^n P(1/T)`.
    pub fn reversed(&self, n: usize) -> Self {
        Self::new((0..=n).map(|k| self.coeff(n - k)).collect())
    }

    /// Division by `1 + T`: `(quotient, remainder)`.
    pub fn div_one_plus_t(&self) -> (Self, i64) {
        let Some(m) = self.degree() else { return (Self::default(), 0) };
        if m == 0 {
            return (Self::default(), self.coeffs[0]);
        }
        let mut q = vec![0i64; m];
        q[0] = self.coeffs[0];
        for i in 1..m {
            q[i] = self.coeffs[i] - q[i - 1];
        }
        let remainder = self.coeffs[m] - q[m - 1];
        (Self::new(q), remainder)
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if *c == 0 {
                continue;
            }
            let sign = if *c < 0 { "-" } else { "+" };
            if first {
                if *c < 0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.abs();
            match (k, a) {
                (0, _) => write!(f, "{a}")?,
                (1, 1) => write!(f, "T")?,
                (1, _) => write!(f, "{a}T")?,
                (_, 1) => write!(f, "T^{k}")?,
                _ => write!(f, "{a}T^{k}")?,
            }
        }
        Ok(())
    }
}

/// `Q` with `M - P = (1 + T) Q`, required to have non-negative coefficients.
pub fn morse_inequality_quotient(m: &IntPolynomial, p: &IntPolynomial) -> Result<IntPolynomial> {
    let diff = m.sub(p);
    // (1 + T) Q with Q >= 0 has no negative coefficient
    if diff.coeffs().iter().any(|c| *c < 0) {
        return Err(MorseError::NegativeCoefficient);
    }
    let (q, r) = diff.div_one_plus_t();
    if r != 0 {
        return Err(MorseError::NotDivisible);
    }
    if q.coeffs().iter().any(|c| *c < 0) {
        return Err(MorseError::NegativeCoefficient);
    }
    Ok(q)
}

/// Whether `P_rel(T) = T^n P_abs(1/T)`.
pub fn duality_symmetry_check(p_abs: &IntPolynomial, p_rel: &IntPolynomial, n: usize) -> bool {
    (0..=n).all(|k| p_rel.coeff(k) == p_abs.coeff(n - k)) && p_rel.degree().is_none_or(|d| d <= n)
}

#[derive(Debug, Clone, Serialize)]
pub struct DoubleManifoldReport {
    pub m_double: IntPolynomial,
    pub m_neumann: IntPolynomial,
    pub m_dirichlet: IntPolynomial,
    pub p_double: IntPolynomial,
    /// `M_Df = M^N + M^D`.
    pub sum_identity: bool,
    pub quotient: Option<IntPolynomial>,
    pub quotient_error: Option<String>,
}

/// Counts for the double manifold built from per-degree `(|C_k|, |N_k|, |D_k|)`.
pub fn double_manifold_check(
    counts: &[(usize, usize, usize)],
    p_abs: &IntPolynomial,
    p_rel: &IntPolynomial,
) -> DoubleManifoldReport {
    let m_double = IntPolynomial::new(counts.iter().map(|(c, n, d)| (2 * c + n + d) as i64).collect());
    let m_neumann = IntPolynomial::new(counts.iter().map(|(c, n, _)| (c + n) as i64).collect());
    let m_dirichlet = IntPolynomial::new(counts.iter().map(|(c, _, d)| (c + d) as i64).collect());
    let p_double = p_abs.add(p_rel);
    let sum_identity = m_double == m_neumann.add(&m_dirichlet);
    let (quotient, quotient_error) = match morse_inequality_quotient(&m_double, &p_double) {
        Ok(q) => (Some(q), None),
        Err(e) => (None, Some(e.to_string())),
    };
    DoubleManifoldReport { m_double, m_neumann, m_dirichlet, p_double, sum_identity, quotient, quotient_error }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> IntPolynomial {
        IntPolynomial::new(c.to_vec())
    }

    #[test]
    fn quotients() {
        assert_eq!(morse_inequality_quotient(&p(&[1, 1, 1]), &p(&[1])).unwrap(), p(&[0, 1]));
        assert_eq!(morse_inequality_quotient(&p(&[1, 1]), &p(&[1, 1])).unwrap(), p(&[]));
        assert_eq!(morse_inequality_quotient(&p(&[1]), &p(&[1, 1])), Err(MorseError::NegativeCoefficient));
        assert_eq!(morse_inequality_quotient(&p(&[1, 1]), &p(&[1])), Err(MorseError::NotDivisible));
        assert_eq!(morse_inequality_quotient(&p(&[2]), &p(&[1])), Err(MorseError::NotDivisible));
    }

    #[test]
    fn symmetry() {
        assert!(duality_symmetry_check(&p(&[1, 1]), &p(&[0, 1, 1]), 2));
        assert!(duality_symmetry_check(&p(&[1]), &p(&[0, 0, 1]), 2));
        assert!(!duality_symmetry_check(&p(&[1]), &p(&[1]), 2));
    }

    #[test]
    fn doubles() {
        let annulus = double_manifold_check(&[(0, 1, 0), (0, 1, 1), (0, 0, 1)], &p(&[1, 1]), &p(&[0, 1, 1]));
        assert!(annulus.sum_identity);
        assert_eq!(annulus.m_double, p(&[1, 2, 1]));
        assert_eq!(annulus.quotient, Some(p(&[])));
        let disk = double_manifold_check(&[(0, 1, 0), (0, 0, 0), (0, 0, 1)], &p(&[1]), &p(&[0, 0, 1]));
        assert_eq!(disk.quotient, Some(p(&[])));
    }

    #[test]
    fn display() {
        assert_eq!(p(&[1, 1, 1]).to_string(), "1 + T + T^2");
        assert_eq!(p(&[0, -2]).to_string(), "-2T");
        assert_eq!(p(&[]).to_string(), "0");
        assert_eq!(p(&[1, 2, 1]).eval(-1), 0);
    }
}
