//! Exact integer matrices and their Smith normal form.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::ser::{Serialize, SerializeSeq, Serializer};

/// Dense integer matrix, row major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged matrix");
            for (j, v) in row.iter().enumerate() {
                m.set(i, j, BigInt::from(*v));
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = BigInt::zero();
                for k in 0..self.cols {
                    acc += self.get(i, k) * other.get(k, j);
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    /// Conjugation helper: permutes and negates rows.
    pub fn signed_row_permutation(&self, perm: &[usize], signs: &[i64]) -> Self {
        let mut out = Self::zeros(self.rows, self.cols);
        for (new_i, &old_i) in perm.iter().enumerate() {
            for j in 0..self.cols {
                out.set(new_i, j, self.get(old_i, j) * signs[new_i]);
            }
        }
        out
    }

    pub fn to_i64_rows(&self) -> Vec<Vec<i64>> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| self.get(i, j).to_i64().expect("entry fits in i64")).collect()).collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// row[dst] -= q * row[src]
    fn row_axpy(&mut self, dst: usize, src: usize, q: &BigInt) {
        for j in 0..self.cols {
            let v = self.get(src, j) * q;
            self.data[dst * self.cols + j] -= v;
        }
    }

    /// col[dst] -= q * col[src]
    fn col_axpy(&mut self, dst: usize, src: usize, q: &BigInt) {
        for i in 0..self.rows {
            let v = self.get(i, src) * q;
            self.data[i * self.cols + dst] -= v;
        }
    }
}

impl Serialize for IntMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.rows))?;
        for i in 0..self.rows {
            let row: Vec<serde_json::Value> = (0..self.cols)
                .map(|j| match self.get(i, j).to_i64() {
                    Some(v) => serde_json::Value::from(v),
                    None => serde_json::Value::from(self.get(i, j).to_string()),
                })
                .collect();
            seq.serialize_element(&row)?;
        }
        seq.end()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithForm {
    /// Nonzero invariant factors `d_1 | d_2 | ... | d_r`, all positive.
    pub diagonal: Vec<BigInt>,
    pub rank: usize,
}

impl SmithForm {
    /// Invariant factors greater than one.
    pub fn torsion(&self) -> Vec<BigInt> {
        self.diagonal.iter().filter(|d| **d > BigInt::from(1)).cloned().collect()
    }
}

/// Invariant factors of an integer matrix.
pub fn smith_normal_form(a: &IntMatrix) -> SmithForm {
    let mut m = a.clone();
    let (rows, cols) = (m.rows, m.cols);
    let mut diagonal = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // smallest nonzero entry of the trailing block becomes the pivot
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                let v = m.get(i, j);
                if !v.is_zero() && best.is_none_or(|(bi, bj)| v.abs() < m.get(bi, bj).abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        m.swap_rows(t, pi);
        m.swap_cols(t, pj);
        loop {
            let mut dirty = false;
            for i in t + 1..rows {
                if !m.get(i, t).is_zero() {
                    let q = m.get(i, t).div_floor(m.get(t, t));
                    m.row_axpy(i, t, &q);
                    if !m.get(i, t).is_zero() {
                        dirty = true;
                    }
                }
            }
            for j in t + 1..cols {
                if !m.get(t, j).is_zero() {
                    let q = m.get(t, j).div_floor(m.get(t, t));
                    m.col_axpy(j, t, &q);
                    if !m.get(t, j).is_zero() {
                        dirty = true;
                    }
                }
            }
            if dirty {
                // a remainder is smaller than the pivot: move it into place
                let mut best = (t, t);
                for i in t..rows {
                    if !m.get(i, t).is_zero() && m.get(i, t).abs() < m.get(best.0, best.1).abs() {
                        best = (i, t);
                    }
                }
                for j in t..cols {
                    if !m.get(t, j).is_zero() && m.get(t, j).abs() < m.get(best.0, best.1).abs() {
                        best = (t, j);
                    }
                }
                m.swap_rows(t, best.0);
                m.swap_cols(t, best.1);
                continue;
            }
            // row and column cleared; enforce divisibility of the remaining block
            let p = m.get(t, t).clone();
            let offender = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !m.get(i, j).is_multiple_of(&p)));
            match offender {
                Some(i) => {
                    let minus_one = BigInt::from(-1);
                    m.row_axpy(t, i, &minus_one);
                }
                None => break,
            }
        }
        diagonal.push(m.get(t, t).abs());
        t += 1;
    }
    let rank = diagonal.len();
    SmithForm { diagonal, rank }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(rows: &[Vec<i64>]) -> Vec<i64> {
        smith_normal_form(&IntMatrix::from_rows(rows)).diagonal.iter().map(|d| d.to_i64().unwrap()).collect()
    }

    #[test]
    fn small_examples() {
        assert_eq!(diag(&[vec![2]]), vec![2]);
        assert_eq!(diag(&[vec![1, 0], vec![0, 0]]), vec![1]);
        assert_eq!(diag(&[vec![2, 4], vec![6, 8]]), vec![2, 4]);
        assert_eq!(diag(&[vec![0, 0], vec![0, 0]]), Vec::<i64>::new());
        assert_eq!(diag(&[vec![2, 0], vec![0, 3]]), vec![1, 6]);
        assert!(diag(&[]).is_empty());
    }

    #[test]
    fn empty_shapes() {
        let m = IntMatrix::zeros(0, 3);
        assert_eq!(smith_normal_form(&m).rank, 0);
        assert_eq!(IntMatrix::zeros(2, 0).transpose().rows(), 0);
    }

    #[test]
    fn serializes_as_nested_arrays() {
        let m = IntMatrix::from_rows(&[vec![1, -2]]);
        assert_eq!(serde_json::to_string(&m).unwrap(), "[[1,-2]]");
    }
}
