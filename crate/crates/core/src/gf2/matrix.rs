use std::fmt;
use std::str::FromStr;

use super::echelon::{Insertion, RowReducer};
use super::BitVector;
use crate::error::{Error, Result};

/// Dense row-major matrix over GF(2).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<BitVector>,
}

impl BitMatrix {
    /// A matrix with `cols` columns and no rows.
    pub fn empty(cols: usize) -> Self {
        Self { cols, rows: Vec::new() }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            cols,
            rows: vec![BitVector::zeros(cols); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            cols: n,
            rows: (0..n).map(|i| BitVector::unit(n, i)).collect(),
        }
    }

    /// Builds a matrix from rows that must all have width `cols`.
    pub fn from_rows(cols: usize, rows: Vec<BitVector>) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch {
                expected: cols,
                actual: bad.len(),
            });
        }
        Ok(Self { cols, rows })
    }

    /// Parses rows given as `'0'/'1'` strings. Convenience for tests and fixtures.
    pub fn from_strs(rows: &[&str]) -> Result<Self> {
        let parsed = rows
            .iter()
            .map(|s| s.parse::<BitVector>())
            .collect::<Result<Vec<_>>>()?;
        let cols = parsed.first().map_or(0, BitVector::len);
        Self::from_rows(cols, parsed)
    }

    /// Rows given as integers, most significant bit first.
    pub fn from_u64_rows(cols: usize, values: &[u64]) -> Self {
        Self {
            cols,
            rows: values.iter().map(|&v| BitVector::from_u64(v, cols)).collect(),
        }
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, i: usize) -> &BitVector {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[BitVector] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<BitVector> {
        self.rows
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.rows[r].set(c, value);
    }

    pub fn push_row(&mut self, row: BitVector) -> Result<()> {
        if row.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: row.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn select_rows(&self, indices: &[usize]) -> BitMatrix {
        Self {
            cols: self.cols,
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    /// Keeps only the listed columns, in that order.
    pub fn select_columns(&self, columns: &[usize]) -> BitMatrix {
        Self {
            cols: columns.len(),
            rows: self.rows.iter().map(|r| r.gather(columns)).collect(),
        }
    }

    /// Row vector times matrix: the sum of the rows selected by `coeffs`.
    pub fn combine(&self, coeffs: &BitVector) -> Result<BitVector> {
        if coeffs.len() != self.rows.len() {
            return Err(Error::DimensionMismatch {
                expected: self.rows.len(),
                actual: coeffs.len(),
            });
        }
        Ok(self.sum_rows(coeffs.iter_ones()))
    }

    /// Sum of the rows at the given indices.
    pub fn sum_rows(&self, indices: impl IntoIterator<Item = usize>) -> BitVector {
        let mut acc = BitVector::zeros(self.cols);
        for i in indices {
            acc.xor_assign(&self.rows[i]);
        }
        acc
    }

    /// Matrix product `self * rhs`.
    pub fn mul(&self, rhs: &BitMatrix) -> Result<BitMatrix> {
        if self.cols != rhs.num_rows() {
            return Err(Error::DimensionMismatch {
                expected: rhs.num_rows(),
                actual: self.cols,
            });
        }
        Ok(Self {
            cols: rhs.cols,
            rows: self.rows.iter().map(|r| rhs.sum_rows(r.iter_ones())).collect(),
        })
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut out = BitMatrix::zeros(self.cols, self.rows.len());
        for (i, r) in self.rows.iter().enumerate() {
            for j in r.iter_ones() {
                out.rows[j].set(i, true);
            }
        }
        out
    }

    /// GF(2) rank.
    pub fn rank(&self) -> usize {
        let mut red = RowReducer::new(self.cols);
        for r in &self.rows {
            red.insert(r);
        }
        red.rank()
    }

    /// Finds `d` with `d * self = target`, or `None` when `target` is outside
    /// the row space. Rows that are dependent on earlier rows always receive
    /// coefficient 0, which makes the answer deterministic.
    pub fn solve_row(&self, target: &BitVector) -> Result<Option<BitVector>> {
        if target.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: target.len(),
            });
        }
        let mut red = RowReducer::tracking(self.cols, self.rows.len());
        for r in &self.rows {
            red.insert(r);
        }
        let (rem, combo) = red.reduce(target);
        Ok(rem
            .is_zero()
            .then(|| combo.expect("tracking reducer yields combinations")))
    }

    /// Indices of the rows kept by forward elimination, in first-seen order.
    pub fn basis_indices(&self) -> Vec<usize> {
        let mut red = RowReducer::new(self.cols);
        self.rows
            .iter()
            .enumerate()
            .filter(|(_, r)| red.insert(r) == Insertion::Independent)
            .map(|(i, _)| i)
            .collect()
    }

    /// A basis of the row space made of original rows.
    pub fn row_basis(&self) -> BitMatrix {
        self.select_rows(&self.basis_indices())
    }

    /// Support of the first nullspace vector met while scanning rows in order.
    ///
    /// The returned set is a circuit: its rows sum to zero and every proper
    /// subset is independent. Indices are sorted.
    pub fn find_circuit(&self) -> Option<Vec<usize>> {
        let mut red = RowReducer::tracking(self.cols, self.rows.len());
        for r in &self.rows {
            if let Insertion::Dependent(Some(support)) = red.insert(r) {
                return Some(support);
            }
        }
        None
    }

    /// Serialises in the shared text format: one `0/1` string per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for r in &self.rows {
            s.push_str(&r.to_string());
            s.push('\n');
        }
        s
    }

    /// Parses the shared matrix text format. Blank lines and `#` comments are
    /// skipped; every row must have the same length.
    pub fn parse_text(text: &str) -> Result<BitMatrix> {
        let mut rows = Vec::new();
        let mut cols = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row: BitVector = line.parse().map_err(|e: Error| Error::Parse {
                line: lineno + 1,
                message: e.to_string(),
            })?;
            match cols {
                None => cols = Some(row.len()),
                Some(c) if c != row.len() => {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        message: format!("row has {} columns, expected {c}", row.len()),
                    })
                }
                _ => {}
            }
            rows.push(row);
        }
        Ok(BitMatrix {
            cols: cols.unwrap_or(0),
            rows,
        })
    }
}

impl fmt::Display for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for BitMatrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_text(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&str]) -> BitMatrix {
        BitMatrix::from_strs(rows).unwrap()
    }

    fn v(s: &str) -> BitVector {
        s.parse().unwrap()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(BitMatrix::identity(4).rank(), 4);
        assert_eq!(m(&["1100", "0110", "1010"]).rank(), 2);
        assert_eq!(BitMatrix::zeros(3, 5).rank(), 0);
        assert_eq!(BitMatrix::empty(7).rank(), 0);
    }

    #[test]
    fn solve_row_examples() {
        let id = BitMatrix::identity(3);
        assert_eq!(id.solve_row(&v("101")).unwrap(), Some(v("101")));
        let two = m(&["110", "011"]);
        assert_eq!(two.solve_row(&v("101")).unwrap(), Some(v("11")));
        assert_eq!(two.solve_row(&v("100")).unwrap(), None);
        assert!(matches!(two.solve_row(&v("10")), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn solve_row_leaves_dependent_rows_unused() {
        // Row 2 duplicates row 0; its coefficient stays zero.
        let dup = m(&["100", "010", "100"]);
        assert_eq!(dup.solve_row(&v("110")).unwrap(), Some(v("110")));
    }

    #[test]
    fn row_basis_examples() {
        assert_eq!(BitMatrix::identity(3).row_basis(), BitMatrix::identity(3));
        assert_eq!(
            m(&["1100", "0110", "1010", "0001"]).row_basis(),
            m(&["1100", "0110", "0001"])
        );
        let z = BitMatrix::zeros(2, 4).row_basis();
        assert_eq!(z.num_rows(), 0);
        assert_eq!(z.num_cols(), 4);
    }

    #[test]
    fn find_circuit_examples() {
        assert_eq!(m(&["10", "01", "11"]).find_circuit(), Some(vec![0, 1, 2]));
        assert_eq!(BitMatrix::identity(4).find_circuit(), None);
        assert_eq!(
            m(&["100", "010", "110", "001", "011"]).find_circuit(),
            Some(vec![0, 1, 2])
        );
    }

    #[test]
    fn find_circuit_reports_duplicate_pair_and_zero_row() {
        assert_eq!(m(&["101", "011", "101"]).find_circuit(), Some(vec![0, 2]));
        assert_eq!(m(&["101", "000"]).find_circuit(), Some(vec![1]));
    }

    #[test]
    fn text_format_skips_comments_and_checks_width() {
        let parsed = BitMatrix::parse_text("# G\n\n101\n  010 \n").unwrap();
        assert_eq!(parsed, m(&["101", "010"]));
        let err = BitMatrix::parse_text("101\n01\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = BitMatrix::parse_text("101\n0a1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn product_and_transpose() {
        let p = m(&["10", "01", "11"]);
        let a = m(&["11000", "00110"]);
        assert_eq!(p.mul(&a).unwrap(), m(&["11000", "00110", "11110"]));
        assert_eq!(a.transpose().transpose(), a);
    }
}
