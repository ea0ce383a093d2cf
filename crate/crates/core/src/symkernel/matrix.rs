use std::fmt;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::oppoly::OpPoly;
use super::oprat::OpRat;
use super::SymError;

/// Entry ring for [`OpMatrix`].
pub trait Entry: Clone + PartialEq + fmt::Display {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn adjoint(&self) -> Self;
    fn to_rat(&self) -> OpRat;
    fn substitute(&self, param: &str, value: &BigRational) -> Result<Self, SymError>;
    fn kernel_text(&self) -> String;
}

impl Entry for OpPoly {
    fn zero() -> Self {
        OpPoly::zero()
    }
    fn one() -> Self {
        OpPoly::one()
    }
    fn is_zero(&self) -> bool {
        OpPoly::is_zero(self)
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn adjoint(&self) -> Self {
        OpPoly::adjoint(self)
    }
    fn to_rat(&self) -> OpRat {
        OpRat::from_poly(self.clone())
    }
    fn substitute(&self, param: &str, value: &BigRational) -> Result<Self, SymError> {
        OpPoly::substitute(self, param, value)
    }
    fn kernel_text(&self) -> String {
        OpPoly::kernel_text(self)
    }
}

impl Entry for OpRat {
    fn zero() -> Self {
        OpRat::zero()
    }
    fn one() -> Self {
        OpRat::one()
    }
    fn is_zero(&self) -> bool {
        OpRat::is_zero(self)
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn adjoint(&self) -> Self {
        OpRat::adjoint(self)
    }
    fn to_rat(&self) -> OpRat {
        self.clone()
    }
    fn substitute(&self, param: &str, value: &BigRational) -> Result<Self, SymError> {
        OpRat::substitute(self, param, value)
    }
    fn kernel_text(&self) -> String {
        OpRat::kernel_text(self)
    }
}

/// Rectangular matrix of operator kernels with labelled rows and columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct OpMatrix<T> {
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    entries: Vec<Vec<T>>,
}

impl<T: Entry> OpMatrix<T> {
    pub fn new(
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        entries: Vec<Vec<T>>,
    ) -> Result<Self, SymError> {
        if entries.len() != row_labels.len() || entries.iter().any(|r| r.len() != col_labels.len())
        {
            return Err(SymError::DimensionMismatch);
        }
        Ok(OpMatrix {
            row_labels,
            col_labels,
            entries,
        })
    }

    /// Square matrix with the same labels on rows and columns.
    pub fn square(labels: Vec<String>, entries: Vec<Vec<T>>) -> Result<Self, SymError> {
        OpMatrix::new(labels.clone(), labels, entries)
    }

    pub fn zeros(row_labels: Vec<String>, col_labels: Vec<String>) -> Self {
        let entries = vec![vec![T::zero(); col_labels.len()]; row_labels.len()];
        OpMatrix {
            row_labels,
            col_labels,
            entries,
        }
    }

    pub fn identity(labels: Vec<String>) -> Self {
        let mut m = OpMatrix::zeros(labels.clone(), labels);
        for i in 0..m.rows() {
            m.entries[i][i] = T::one();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.row_labels.len()
    }

    pub fn cols(&self) -> usize {
        self.col_labels.len()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.entries[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.entries[i][j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.entries[i]
    }

    pub fn transpose(&self) -> OpMatrix<T> {
        let entries = (0..self.cols())
            .map(|j| {
                (0..self.rows())
                    .map(|i| self.entries[i][j].clone())
                    .collect()
            })
            .collect();
        OpMatrix {
            row_labels: self.col_labels.clone(),
            col_labels: self.row_labels.clone(),
            entries,
        }
    }

    /// Kernel composition: `(A B)_ij = sum_k A_ik(D) B_kj(D)`.
    pub fn mul(&self, rhs: &OpMatrix<T>) -> Result<OpMatrix<T>, SymError> {
        if self.cols() != rhs.rows() {
            return Err(SymError::DimensionMismatch);
        }
        let entries = (0..self.rows())
            .map(|i| {
                (0..rhs.cols())
                    .map(|j| {
                        (0..self.cols()).fold(T::zero(), |acc, k| {
                            acc.add(&self.entries[i][k].mul(&rhs.entries[k][j]))
                        })
                    })
                    .collect()
            })
            .collect();
        Ok(OpMatrix {
            row_labels: self.row_labels.clone(),
            col_labels: rhs.col_labels.clone(),
            entries,
        })
    }

    pub fn to_rat(&self) -> OpMatrix<OpRat> {
        OpMatrix {
            row_labels: self.row_labels.clone(),
            col_labels: self.col_labels.clone(),
            entries: self
                .entries
                .iter()
                .map(|r| r.iter().map(Entry::to_rat).collect())
                .collect(),
        }
    }

    pub fn substitute(&self, param: &str, value: &BigRational) -> Result<OpMatrix<T>, SymError> {
        let entries = self
            .entries
            .iter()
            .map(|r| {
                r.iter()
                    .map(|e| e.substitute(param, value))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(OpMatrix {
            row_labels: self.row_labels.clone(),
            col_labels: self.col_labels.clone(),
            entries,
        })
    }

    /// `M_ij(D) == -M_ji(-D)` for every entry.
    pub fn is_bracket_antisymmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows()).all(|i| {
                (0..self.cols()).all(|j| self.entries[i][j] == self.entries[j][i].adjoint().neg())
            })
    }

    /// Determinant over the fraction field.
    pub fn det(&self) -> Result<OpRat, SymError> {
        if !self.is_square() {
            return Err(SymError::NonSquare {
                rows: self.rows(),
                cols: self.cols(),
            });
        }
        let mut a: Vec<Vec<OpRat>> = self.to_rat().entries;
        let n = a.len();
        let mut det = OpRat::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&r| !a[r][c].is_zero()) else {
                return Ok(OpRat::zero());
            };
            if p != c {
                a.swap(p, c);
                det = -&det;
            }
            det = &det * &a[c][c];
            let inv = a[c][c].recip()?;
            for r in c + 1..n {
                if a[r][c].is_zero() {
                    continue;
                }
                let f = &a[r][c] * &inv;
                for k in c..n {
                    let t = &f * &a[c][k];
                    a[r][k] = &a[r][k] - &t;
                }
            }
        }
        Ok(det)
    }

    /// Inverse over the fraction field by Gauss-Jordan elimination.
    pub fn inverse(&self) -> Result<OpMatrix<OpRat>, SymError> {
        if !self.is_square() {
            return Err(SymError::NonSquare {
                rows: self.rows(),
                cols: self.cols(),
            });
        }
        let n = self.rows();
        let mut a = self.to_rat().entries;
        let mut inv = OpMatrix::<OpRat>::identity(self.row_labels.clone()).entries;
        for c in 0..n {
            let p = (c..n)
                .find(|&r| !a[r][c].is_zero())
                .ok_or(SymError::SingularMatrix)?;
            a.swap(p, c);
            inv.swap(p, c);
            let piv = a[c][c].recip()?;
            for k in 0..n {
                a[c][k] = &a[c][k] * &piv;
                inv[c][k] = &inv[c][k] * &piv;
            }
            for r in 0..n {
                if r == c || a[r][c].is_zero() {
                    continue;
                }
                let f = a[r][c].clone();
                for k in 0..n {
                    let t = &f * &a[c][k];
                    a[r][k] = &a[r][k] - &t;
                    let t = &f * &inv[c][k];
                    inv[r][k] = &inv[r][k] - &t;
                }
            }
        }
        // Rows of the inverse are indexed by the original columns.
        Ok(OpMatrix {
            row_labels: self.col_labels.clone(),
            col_labels: self.row_labels.clone(),
            entries: inv,
        })
    }

    /// Basis of `{ v : v M = 0 }` with polynomial entries.
    ///
    /// Vectors come from the free columns of the reduced echelon form of `M^T`,
    /// in increasing index order. Each is scaled to clear denominators, divided
    /// by the gcd of its entries, and made monic in its first nonzero entry.
    pub fn left_kernel(&self) -> Vec<Vec<OpPoly>> {
        let t = self.transpose().to_rat();
        let (rows, cols) = (t.rows(), t.cols());
        let mut a = t.entries;
        let mut pivots: Vec<usize> = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
                continue;
            };
            a.swap(p, r);
            let inv = a[r][c].recip().expect("pivot is nonzero");
            for k in 0..cols {
                a[r][k] = &a[r][k] * &inv;
            }
            for i in 0..rows {
                if i == r || a[i][c].is_zero() {
                    continue;
                }
                let f = a[i][c].clone();
                for k in 0..cols {
                    let t = &f * &a[r][k];
                    a[i][k] = &a[i][k] - &t;
                }
            }
            pivots.push(c);
            r += 1;
            if r == rows {
                break;
            }
        }
        let mut basis = Vec::new();
        for free in (0..cols).filter(|c| !pivots.contains(c)) {
            let mut v = vec![OpRat::zero(); cols];
            v[free] = OpRat::one();
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = -&a[i][free];
            }
            basis.push(normalize_vector(&v));
        }
        basis
    }

    /// Render with row labels, one kernel per cell.
    pub fn render(&self) -> String {
        let cells: Vec<Vec<String>> = self
            .entries
            .iter()
            .map(|r| r.iter().map(|e| e.to_string()).collect())
            .collect();
        let width = cells
            .iter()
            .flatten()
            .map(|s| s.len())
            .max()
            .unwrap_or(1)
            .max(1);
        let lw = self.row_labels.iter().map(|s| s.len()).max().unwrap_or(0);
        let mut out = String::new();
        out.push_str(&format!("{:lw$}  ", ""));
        for l in &self.col_labels {
            out.push_str(&format!(" {l:>width$}"));
        }
        out.push('\n');
        for (label, row) in self.row_labels.iter().zip(&cells) {
            out.push_str(&format!("{label:lw$}  "));
            for s in row {
                out.push_str(&format!(" {s:>width$}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Clear denominators, remove the common polynomial factor, make the first
/// nonzero entry monic.
pub fn normalize_vector(v: &[OpRat]) -> Vec<OpPoly> {
    let l = v
        .iter()
        .filter(|e| !e.is_zero())
        .fold(OpPoly::one(), |acc, e| OpPoly::lcm(&acc, e.den()));
    let mut out: Vec<OpPoly> = v
        .iter()
        .map(|e| {
            if e.is_zero() {
                OpPoly::zero()
            } else {
                e.num() * &l.div_exact(e.den()).expect("lcm is a multiple")
            }
        })
        .collect();
    let g = out
        .iter()
        .fold(OpPoly::zero(), |acc, e| OpPoly::gcd(&acc, e));
    if !g.is_zero() {
        for e in &mut out {
            *e = e.div_exact(&g).expect("gcd divides");
        }
    }
    if let Some(first) = out.iter().find(|e| !e.is_zero()) {
        let inv = first.leading_coeff().recip().expect("nonzero");
        for e in &mut out {
            *e = e.scale(&inv);
        }
    }
    out
}

impl<T: Entry> fmt::Display for OpMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}
