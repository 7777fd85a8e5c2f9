//! Integer chain and cochain complexes and their (co)homology.

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::snf::{smith_normal_form, IntMatrix};
use crate::error::{MorseError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Differential of degree -1.
    Chain,
    /// Differential of degree +1.
    Cochain,
}

/// `maps[k]` has rows indexed by `F_k` and columns by `F_{k-1}` in both
/// directions: for a chain complex row `p` holds `∂<p>`, for a cochain
/// complex column `q` holds `d<q>` (the transpose of `d_{k-1}`).
#[derive(Debug, Clone, Serialize)]
pub struct IntegerChainComplex {
    pub top: usize,
    pub generators: Vec<Vec<usize>>,
    pub maps: Vec<IntMatrix>,
    pub direction: Direction,
}

impl IntegerChainComplex {
    /// `maps` is given for `k = 1..=top`; the zero maps at both ends are added.
    pub fn new(generators: Vec<Vec<usize>>, inner: Vec<IntMatrix>, direction: Direction) -> Result<Self> {
        let top = generators.len() - 1;
        assert_eq!(inner.len(), top, "one map per positive degree");
        let mut maps = Vec::with_capacity(top + 2);
        maps.push(IntMatrix::zeros(generators[0].len(), 0));
        for (k, m) in inner.into_iter().enumerate() {
            let k = k + 1;
            if m.rows() != generators[k].len() || m.cols() != generators[k - 1].len() {
                return Err(MorseError::DimensionMismatch(format!(
                    "map in degree {k} is {}x{}, expected {}x{}",
                    m.rows(),
                    m.cols(),
                    generators[k].len(),
                    generators[k - 1].len()
                )));
            }
            maps.push(m);
        }
        maps.push(IntMatrix::zeros(0, generators[top].len()));
        let cx = Self { top, generators, maps, direction };
        cx.check_square_zero()?;
        Ok(cx)
    }

    pub fn rank(&self, k: usize) -> usize {
        self.generators.get(k).map_or(0, Vec::len)
    }

    /// Map between degrees `k` and `k-1` (zero outside the range).
    pub fn map(&self, k: usize) -> &IntMatrix {
        &self.maps[k]
    }

    fn check_square_zero(&self) -> Result<()> {
        for k in 2..=self.top {
            let prod = self.maps[k].mul(&self.maps[k - 1]);
            for i in 0..prod.rows() {
                for j in 0..prod.cols() {
                    if !num_traits::Zero::is_zero(prod.get(i, j)) {
                        let hi = self.generators[k][i];
                        let lo = self.generators[k - 2][j];
                        let (from, to) = match self.direction {
                            Direction::Chain => (hi, lo),
                            Direction::Cochain => (lo, hi),
                        };
                        return Err(MorseError::BoundarySquareNonzero { from, to });
                    }
                }
            }
        }
        Ok(())
    }

    /// The complex whose differential is the transpose: a cochain complex
    /// becomes the dual chain complex on the same generators.
    pub fn dual(&self) -> Self {
        let direction = match self.direction {
            Direction::Chain => Direction::Cochain,
            Direction::Cochain => Direction::Chain,
        };
        Self { direction, ..self.clone() }
    }

    pub fn euler_characteristic(&self) -> i64 {
        (0..=self.top).map(|k| if k % 2 == 0 { 1 } else { -1 } * self.rank(k) as i64).sum()
    }
}

/// Betti numbers and torsion coefficients per degree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomologyResult {
    pub betti: Vec<usize>,
    pub torsion: Vec<Vec<u64>>,
}

impl HomologyResult {
    pub fn free(betti: &[usize]) -> Self {
        Self { betti: betti.to_vec(), torsion: vec![Vec::new(); betti.len()] }
    }

    pub fn with_torsion(mut self, degree: usize, coefficients: &[u64]) -> Self {
        self.torsion[degree] = coefficients.to_vec();
        self
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.betti.iter().enumerate().map(|(k, b)| if k % 2 == 0 { *b as i64 } else { -(*b as i64) }).sum()
    }
}

/// (Co)homology in the kept grading.
pub fn homology(cx: &IntegerChainComplex) -> HomologyResult {
    let snf: Vec<_> = cx.maps.iter().map(smith_normal_form).collect();
    let mut betti = Vec::new();
    let mut torsion = Vec::new();
    for k in 0..=cx.top {
        betti.push(cx.rank(k) - snf[k].rank - snf[k + 1].rank);
        let source = match cx.direction {
            Direction::Chain => &snf[k + 1],
            Direction::Cochain => &snf[k],
        };
        torsion.push(source.torsion().iter().map(|t| t.to_u64().expect("torsion fits in u64")).collect());
    }
    HomologyResult { betti, torsion }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_term(d: i64, dir: Direction) -> IntegerChainComplex {
        IntegerChainComplex::new(vec![vec![0], vec![1]], vec![IntMatrix::from_rows(&[vec![d]])], dir).unwrap()
    }

    #[test]
    fn two_term_chain_complexes() {
        assert_eq!(homology(&two_term(0, Direction::Chain)), HomologyResult::free(&[1, 1]));
        assert_eq!(homology(&two_term(2, Direction::Chain)), HomologyResult::free(&[0, 0]).with_torsion(0, &[2]));
        assert_eq!(homology(&two_term(1, Direction::Chain)), HomologyResult::free(&[0, 0]));
    }

    #[test]
    fn cochain_torsion_sits_above() {
        let h = homology(&two_term(2, Direction::Cochain));
        assert_eq!(h, HomologyResult::free(&[0, 0]).with_torsion(1, &[2]));
        let back = homology(&two_term(2, Direction::Cochain).dual());
        assert_eq!(back, HomologyResult::free(&[0, 0]).with_torsion(0, &[2]));
    }

    #[test]
    fn zero_complex() {
        let cx = IntegerChainComplex::new(
            vec![vec![], vec![], vec![]],
            vec![IntMatrix::zeros(0, 0), IntMatrix::zeros(0, 0)],
            Direction::Chain,
        )
        .unwrap();
        assert_eq!(homology(&cx), HomologyResult::free(&[0, 0, 0]));
    }

    #[test]
    fn square_nonzero_is_reported() {
        let err = IntegerChainComplex::new(
            vec![vec![10], vec![11], vec![12]],
            vec![IntMatrix::from_rows(&[vec![1]]), IntMatrix::from_rows(&[vec![1]])],
            Direction::Chain,
        )
        .unwrap_err();
        assert_eq!(err, MorseError::BoundarySquareNonzero { from: 12, to: 10 });
    }

    #[test]
    fn dual_of_dual_is_identity() {
        let cx = two_term(3, Direction::Cochain);
        let dd = cx.dual().dual();
        assert_eq!(dd.maps, cx.maps);
        assert_eq!(dd.direction, cx.direction);
    }
}
