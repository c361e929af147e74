use std::collections::HashMap;
use std::ops::Range;

use faer::{Mat, MatRef};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Label of one basis vector: a 1D site index or a pair-lattice coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BasisLabel {
    Site(i64),
    Pair(i64, i64),
}

impl BasisLabel {
    pub fn site(&self) -> Option<i64> {
        match *self {
            BasisLabel::Site(j) => Some(j),
            BasisLabel::Pair(..) => None,
        }
    }

    pub fn pair(&self) -> Option<(i64, i64)> {
        match *self {
            BasisLabel::Pair(x, y) => Some((x, y)),
            BasisLabel::Site(_) => None,
        }
    }
}

impl std::fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BasisLabel::Site(j) => write!(f, "{j}"),
            BasisLabel::Pair(x, y) => write!(f, "({x},{y})"),
        }
    }
}

/// Dense square complex matrix on a labelled finite basis.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    entries: Mat<C64>,
    labels: Vec<BasisLabel>,
    index: HashMap<BasisLabel, usize>,
}

impl OperatorMatrix {
    pub fn new(entries: Mat<C64>, labels: Vec<BasisLabel>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::InvalidArgument(format!(
                "operator must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.nrows() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: labels.len(),
                got: entries.nrows(),
            });
        }
        for col in 0..entries.ncols() {
            for row in 0..entries.nrows() {
                let z = entries[(row, col)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::NonFinite { row, col });
                }
            }
        }
        let index = index_labels(&labels)?;
        Ok(Self {
            entries,
            labels,
            index,
        })
    }

    pub fn zeros(labels: Vec<BasisLabel>) -> Result<Self> {
        let n = labels.len();
        Self::new(Mat::zeros(n, n), labels)
    }

    /// Builds from nested rows, labelling the basis `0..n` as sites.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument("rows must form a square matrix".into()));
        }
        let entries = Mat::from_fn(n, n, |r, c| rows[r][c]);
        Self::new(entries, (0..n as i64).map(BasisLabel::Site).collect())
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn entries(&self) -> MatRef<'_, C64> {
        self.entries.as_ref()
    }

    pub fn labels(&self) -> &[BasisLabel] {
        &self.labels
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[(row, col)]
    }

    pub fn index_of(&self, label: BasisLabel) -> Option<usize> {
        self.index.get(&label).copied()
    }

    /// Entry between two labels, `None` if either label is outside the basis.
    pub fn element(&self, row: BasisLabel, col: BasisLabel) -> Option<C64> {
        Some(self.get(self.index_of(row)?, self.index_of(col)?))
    }

    pub(crate) fn set(&mut self, row: usize, col: usize, value: C64) {
        self.entries[(row, col)] = value;
    }

    pub(crate) fn add(&mut self, row: usize, col: usize, value: C64) {
        self.entries[(row, col)] += value;
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        let n = self.dim();
        Self {
            entries: Mat::from_fn(n, n, |r, c| self.entries[(r, c)].conj()),
            labels: self.labels.clone(),
            index: self.index.clone(),
        }
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        self.check_len(v.len())?;
        let n = self.dim();
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (c, &vc) in v.iter().enumerate() {
            if vc == C64::new(0.0, 0.0) {
                continue;
            }
            let col = self.entries.col(c);
            for (r, o) in out.iter_mut().enumerate() {
                *o += col[r] * vc;
            }
        }
        Ok(out)
    }

    pub fn max_abs_entry(&self) -> f64 {
        let mut m = 0.0f64;
        for c in 0..self.dim() {
            for r in 0..self.dim() {
                m = m.max(self.entries[(r, c)].norm());
            }
        }
        m
    }

    /// Largest `|A_ij - B_ij|` over the whole matrix. Labels must agree.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_basis(other)?;
        let n = self.dim();
        Ok(self.block_diff(other, 0..n, |a, b| a.max(b)))
    }

    /// Frobenius norm of `A - B` restricted to rows and columns in `block`.
    pub fn frobenius_diff_on(&self, other: &Self, block: Range<usize>) -> Result<f64> {
        self.check_same_basis(other)?;
        Ok(self
            .block_diff(other, block, |acc, d| acc + d * d)
            .sqrt())
    }

    fn block_diff(&self, other: &Self, block: Range<usize>, fold: impl Fn(f64, f64) -> f64) -> f64 {
        let mut acc = 0.0;
        for c in block.clone() {
            for r in block.clone() {
                acc = fold(acc, (self.entries[(r, c)] - other.entries[(r, c)]).norm());
            }
        }
        acc
    }

    /// Largest `|i - j|` over nonzero off-diagonal entries.
    pub fn bandwidth(&self) -> usize {
        let n = self.dim();
        let mut bw = 0;
        for c in 0..n {
            for r in 0..n {
                if self.entries[(r, c)] != C64::new(0.0, 0.0) {
                    bw = bw.max(r.abs_diff(c));
                }
            }
        }
        bw
    }

    pub fn to_rows(&self) -> Vec<Vec<C64>> {
        (0..self.dim())
            .map(|r| (0..self.dim()).map(|c| self.entries[(r, c)]).collect())
            .collect()
    }

    pub(crate) fn with_entries(&self, entries: Mat<C64>) -> Self {
        debug_assert_eq!(entries.nrows(), self.dim());
        Self {
            entries,
            labels: self.labels.clone(),
            index: self.index.clone(),
        }
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: len,
            });
        }
        Ok(())
    }

    fn check_same_basis(&self, other: &Self) -> Result<()> {
        if self.labels != other.labels {
            return Err(Error::BasisMismatch(format!(
                "operators on different bases (dims {} and {})",
                self.dim(),
                other.dim()
            )));
        }
        Ok(())
    }
}

fn index_labels(labels: &[BasisLabel]) -> Result<HashMap<BasisLabel, usize>> {
    let mut index = HashMap::with_capacity(labels.len());
    for (i, &l) in labels.iter().enumerate() {
        if index.insert(l, i).is_some() {
            return Err(Error::InvalidArgument(format!("duplicate basis label {l}")));
        }
    }
    Ok(index)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn rejects_non_finite_and_mismatched() {
        let bad = vec![vec![c(0.0, 0.0), c(f64::NAN, 0.0)], vec![c(0.0, 0.0); 2]];
        assert!(matches!(
            OperatorMatrix::from_rows(&bad),
            Err(Error::NonFinite { row: 0, col: 1 })
        ));
        let labels = vec![BasisLabel::Site(0)];
        assert!(OperatorMatrix::new(Mat::zeros(2, 2), labels).is_err());
        let dup = vec![BasisLabel::Site(0), BasisLabel::Site(0)];
        assert!(OperatorMatrix::new(Mat::zeros(2, 2), dup).is_err());
    }

    #[test]
    fn apply_matches_dense_product() {
        let m = OperatorMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(0.0, 2.0)],
            vec![c(3.0, 0.0), c(0.0, -1.0)],
        ])
        .unwrap();
        let v = m.apply(&[c(1.0, 1.0), c(2.0, 0.0)]).unwrap();
        assert_eq!(v[0], c(1.0, 1.0) + c(0.0, 4.0));
        assert_eq!(v[1], c(3.0, 3.0) + c(0.0, -2.0));
        assert_eq!(m.bandwidth(), 1);
    }
}
