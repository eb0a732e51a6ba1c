use std::fmt;

use nalgebra::DMatrix;

use super::qvalue::{same_algebra, QValue};
use super::spec::Algebra;
use super::AlgebraError;

/// Dense row-major matrix of [`QValue`]s over a single algebra.
#[derive(Clone, PartialEq, Eq)]
pub struct QMatrix {
    alg: Algebra,
    rows: usize,
    cols: usize,
    data: Vec<QValue>,
}

impl QMatrix {
    pub fn from_rows(alg: &Algebra, rows: Vec<Vec<QValue>>) -> Result<Self, AlgebraError> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(AlgebraError::Shape("ragged matrix rows".into()));
        }
        let data: Vec<QValue> = rows.into_iter().flatten().collect();
        if data.iter().any(|v| !same_algebra(v.algebra(), alg)) {
            return Err(AlgebraError::Mismatch);
        }
        Ok(QMatrix { alg: alg.clone(), rows: n_rows, cols: n_cols, data })
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(alg: &Algebra, cols: &[Vec<QValue>]) -> Result<Self, AlgebraError> {
        let n_rows = cols.first().map_or(0, Vec::len);
        if cols.iter().any(|c| c.len() != n_rows) {
            return Err(AlgebraError::Shape("columns of different lengths".into()));
        }
        let rows = (0..n_rows).map(|r| cols.iter().map(|c| c[r].clone()).collect()).collect();
        Self::from_rows(alg, rows)
    }

    pub fn from_fn(
        alg: &Algebra,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> QValue,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        QMatrix { alg: alg.clone(), rows, cols, data }
    }

    pub fn identity(alg: &Algebra, n: usize) -> Self {
        Self::from_fn(alg, n, n, |r, c| QValue::from_int(alg, i64::from(r == c)))
    }

    pub fn from_integers(alg: &Algebra, rows: &[Vec<i64>]) -> Result<Self, AlgebraError> {
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|&x| QValue::from_int(alg, x)).collect())
            .collect();
        Self::from_rows(alg, rows)
    }

    pub fn algebra(&self) -> &Algebra {
        &self.alg
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &QValue {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: QValue) {
        self.data[r * self.cols + c] = v;
    }

    pub fn column(&self, c: usize) -> Vec<QValue> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn row(&self, r: usize) -> Vec<QValue> {
        self.data[r * self.cols..(r + 1) * self.cols].to_vec()
    }

    pub fn columns(&self) -> Vec<Vec<QValue>> {
        (0..self.cols).map(|c| self.column(c)).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(&self.alg, self.cols, self.rows, |r, c| self.get(c, r).clone())
    }

    pub fn mul(&self, other: &QMatrix) -> Result<QMatrix, AlgebraError> {
        if self.cols != other.rows {
            return Err(AlgebraError::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        if !same_algebra(&self.alg, &other.alg) {
            return Err(AlgebraError::Mismatch);
        }
        Ok(Self::from_fn(&self.alg, self.rows, other.cols, |r, c| {
            (0..self.cols).fold(QValue::zero(&self.alg), |acc, k| {
                acc + self.get(r, k) * other.get(k, c)
            })
        }))
    }

    pub fn mul_vec(&self, v: &[QValue]) -> Result<Vec<QValue>, AlgebraError> {
        if v.len() != self.cols {
            return Err(AlgebraError::Shape("vector length does not match columns".into()));
        }
        (0..self.rows)
            .map(|r| {
                (0..self.cols).try_fold(QValue::zero(&self.alg), |acc, k| {
                    acc.checked_add(&self.get(r, k).checked_mul(&v[k])?)
                })
            })
            .collect()
    }

    pub fn scale(&self, s: &QValue) -> QMatrix {
        Self::from_fn(&self.alg, self.rows, self.cols, |r, c| self.get(r, c) * s)
    }

    /// Sub-matrix keeping the listed rows and columns.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> QMatrix {
        Self::from_fn(&self.alg, rows.len(), cols.len(), |r, c| self.get(rows[r], cols[c]).clone())
    }

    /// Exact determinant by division-free Laplace expansion over column subsets.
    pub fn det(&self) -> Result<QValue, AlgebraError> {
        if !self.is_square() {
            return Err(AlgebraError::Shape("determinant of a non-square matrix".into()));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(QValue::one(&self.alg));
        }
        if n > 20 {
            return Err(AlgebraError::Shape("exact determinant limited to 20x20".into()));
        }
        // minors[mask] = det(rows 0..|mask|, columns in mask)
        let mut minors: Vec<Option<QValue>> = vec![None; 1 << n];
        minors[0] = Some(QValue::one(&self.alg));
        let mut masks: Vec<u32> = (1..(1u32 << n)).collect();
        masks.sort_by_key(|m| m.count_ones());
        for mask in masks {
            let r = mask.count_ones() as usize - 1;
            let mut acc = QValue::zero(&self.alg);
            let mut pos = 0;
            for j in 0..n {
                if mask & (1 << j) == 0 {
                    continue;
                }
                let entry = self.get(r, j);
                if !entry.is_zero() {
                    let sub = minors[(mask & !(1 << j)) as usize].as_ref().expect("filled");
                    if !sub.is_zero() {
                        let term = entry * sub;
                        acc = if (r + pos) % 2 == 0 { acc + term } else { acc - term };
                    }
                }
                pos += 1;
            }
            minors[mask as usize] = Some(acc);
        }
        Ok(minors[(1usize << n) - 1].take().expect("full minor"))
    }

    /// Classical adjugate, `adj(M) M = det(M) I`.
    pub fn adjugate(&self) -> Result<QMatrix, AlgebraError> {
        if !self.is_square() {
            return Err(AlgebraError::Shape("adjugate of a non-square matrix".into()));
        }
        let n = self.rows;
        if n == 1 {
            return Ok(QMatrix::identity(&self.alg, 1));
        }
        let mut out = QMatrix::identity(&self.alg, n);
        for r in 0..n {
            for c in 0..n {
                let rows: Vec<usize> = (0..n).filter(|&i| i != r).collect();
                let cols: Vec<usize> = (0..n).filter(|&j| j != c).collect();
                let minor = self.select(&rows, &cols).det()?;
                let cof = if (r + c) % 2 == 0 { minor } else { -minor };
                // adjugate is the transposed cofactor matrix
                out.set(c, r, cof);
            }
        }
        Ok(out)
    }

    /// Exact inverse via adjugate / determinant; fails when the determinant is
    /// not invertible in the algebra.
    pub fn inverse(&self) -> Result<QMatrix, AlgebraError> {
        let det_inv = self.det()?.inverse()?;
        Ok(self.adjugate()?.scale(&det_inv))
    }

    /// Inverse transpose, the basis of the dual lattice.
    pub fn inverse_transpose(&self) -> Result<QMatrix, AlgebraError> {
        Ok(self.inverse()?.transpose())
    }

    /// True when every entry is a rational integer.
    pub fn is_integral(&self) -> bool {
        self.data.iter().all(|v| v.as_integer().is_some())
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |r, c| self.get(r, c).to_f64())
    }
}

/// Exact determinant of a square matrix; see [`QMatrix::det`].
pub fn exact_det(m: &QMatrix) -> Result<QValue, AlgebraError> {
    m.det()
}

impl fmt::Debug for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(r).iter().map(ToString::to_string).collect();
            write!(f, "{}", row.join(", "))?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgebraSpec;

    fn m(alg: &Algebra, rows: &[&[&str]]) -> QMatrix {
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|s| QValue::parse(alg, s).unwrap()).collect())
            .collect();
        QMatrix::from_rows(alg, rows).unwrap()
    }

    #[test]
    fn identity_det() {
        let alg = AlgebraSpec::rationals();
        assert_eq!(exact_det(&QMatrix::identity(&alg, 3)).unwrap(), QValue::one(&alg));
    }

    #[test]
    fn two_by_two_in_biquadratic() {
        let alg = AlgebraSpec::biquadratic(2, 3).unwrap();
        let a = m(&alg, &[&["w1", "w2"], &["0", "1"]]);
        assert_eq!(exact_det(&a).unwrap(), QValue::basis(&alg, 1));
    }

    #[test]
    fn inverse_round_trip() {
        let alg = AlgebraSpec::quadratic(2).unwrap();
        let a = m(&alg, &[&["1 + w1", "-1"], &["-w1", "1"]]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv).unwrap(), QMatrix::identity(&alg, 2));
        assert_eq!(
            a.inverse_transpose().unwrap(),
            m(&alg, &[&["1", "w1"], &["1", "1 + w1"]])
        );
    }

    #[test]
    fn singular_inverse_fails() {
        let alg = AlgebraSpec::rationals();
        let a = QMatrix::from_integers(&alg, &[vec![1, 2], vec![2, 4]]).unwrap();
        assert!(a.inverse().is_err());
    }

    #[test]
    fn four_by_four_matches_numeric() {
        let alg = AlgebraSpec::biquadratic(2, 3).unwrap();
        let a = m(
            &alg,
            &[
                &["1", "w1", "0", "2"],
                &["w2", "1", "w3", "0"],
                &["0", "3", "1", "w1"],
                &["1", "0", "w2", "1"],
            ],
        );
        let exact = exact_det(&a).unwrap().to_f64();
        let numeric = a.to_f64().determinant();
        assert!((exact - numeric).abs() < 1e-10, "{exact} vs {numeric}");
    }
}
