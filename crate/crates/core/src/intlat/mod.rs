//! Exact integer/rational lattice linear algebra.
//!
//! Bases are stored column-wise: the lattice `L(B)` is the set of integer
//! combinations of the columns of `B`. All arithmetic is over arbitrary
//! precision rationals, so determinants, duals and Gram–Schmidt data carry
//! no rounding error.

mod cvp;
mod format;
mod hnf;
mod lll;

pub use cvp::{brute_force_cvp, coefficient_box_for_radius, CvpResult};
pub use format::{format_matrix, parse_matrix, parse_rational, rational_to_string};
pub use hnf::{hnf, is_hnf, HnfDecomposition};
pub use lll::{gram_schmidt, is_lll_reduced, lll_reduce, nearest_plane, GramSchmidtData, NearestPlane};

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Dense matrix of arbitrary precision rationals, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct ExactMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigRational>,
}

impl fmt::Debug for ExactMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExactMatrix{:?}", self.to_string_rows())
    }
}

impl ExactMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension("matrix dimensions must be positive".into()));
        }
        Ok(Self { rows, cols, data: vec![BigRational::zero(); rows * cols] })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m.set(i, i, BigRational::one());
        }
        Ok(m)
    }

    pub fn from_rows(rows: Vec<Vec<BigRational>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map(Vec::len).unwrap_or(0);
        if r == 0 || c == 0 {
            return Err(Error::Dimension("matrix dimensions must be positive".into()));
        }
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Ok(Self { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_int_rows(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        Self::from_rows(
            rows.into_iter()
                .map(|row| row.into_iter().map(BigRational::from_integer).collect())
                .collect(),
        )
    }

    pub fn from_i64_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        Self::from_int_rows(
            rows.iter()
                .map(|row| row.as_ref().iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        )
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<BigRational>]) -> Result<Self> {
        let c = cols.len();
        let r = cols.first().map(Vec::len).unwrap_or(0);
        let mut m = Self::zeros(r, c)?;
        for (j, col) in cols.iter().enumerate() {
            if col.len() != r {
                return Err(Error::Dimension("ragged columns".into()));
            }
            for (i, x) in col.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: BigRational) {
        self.data[i * self.cols + j] = x;
    }

    pub fn row(&self, i: usize) -> Vec<BigRational> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn column(&self, j: usize) -> Vec<BigRational> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<BigRational>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn is_integer(&self) -> bool {
        self.data.iter().all(|x| x.is_integer())
    }

    /// Integer entries, row by row; fails if any entry is fractional.
    pub fn to_int_rows(&self) -> Result<Vec<Vec<BigInt>>> {
        if !self.is_integer() {
            return Err(Error::Parameter("matrix has non-integer entries".into()));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).into_iter().map(|x| x.to_integer()).collect())
            .collect())
    }

    pub fn int_column(&self, j: usize) -> Result<Vec<BigInt>> {
        self.column(j)
            .into_iter()
            .map(|x| {
                if x.is_integer() {
                    Ok(x.to_integer())
                } else {
                    Err(Error::Parameter("matrix has non-integer entries".into()))
                }
            })
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j).clone());
            }
        }
        Self { rows: self.cols, cols: self.rows, data }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols)?;
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let idx = i * out.cols + j;
                        out.data[idx] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[BigRational]) -> Result<Vec<BigRational>> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                let mut acc = BigRational::zero();
                for (j, x) in v.iter().enumerate() {
                    let a = self.get(i, j);
                    if !a.is_zero() && !x.is_zero() {
                        acc += a * x;
                    }
                }
                acc
            })
            .collect())
    }

    pub fn mul_int_vec(&self, v: &[BigInt]) -> Result<Vec<BigRational>> {
        let v: Vec<BigRational> = v.iter().cloned().map(BigRational::from_integer).collect();
        self.mul_vec(&v)
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension("shape mismatch in subtraction".into()));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn frobenius_norm_sq(&self) -> BigRational {
        self.data.iter().fold(BigRational::zero(), |acc, x| acc + x * x)
    }

    fn require_square(&self) -> Result<()> {
        if !self.is_square() {
            return Err(Error::Rank(format!("matrix is {}x{}, not square", self.rows, self.cols)));
        }
        Ok(())
    }

    /// Exact determinant by rational Gaussian elimination.
    pub fn rational_determinant(&self) -> Result<BigRational> {
        self.require_square()?;
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = BigRational::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&r| !a[r * n + c].is_zero()) else {
                return Ok(BigRational::zero());
            };
            if p != c {
                for j in 0..n {
                    a.swap(p * n + j, c * n + j);
                }
                det = -det;
            }
            let pivot = a[c * n + c].clone();
            det *= &pivot;
            for r in c + 1..n {
                if a[r * n + c].is_zero() {
                    continue;
                }
                let f = &a[r * n + c] / &pivot;
                for j in c..n {
                    let t = &f * &a[c * n + j];
                    a[r * n + j] -= t;
                }
            }
        }
        Ok(det)
    }

    /// Exact inverse by Gauss–Jordan elimination.
    pub fn inverse(&self) -> Result<Self> {
        self.require_square()?;
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n)?;
        for c in 0..n {
            let p = (c..n)
                .find(|&r| !a.get(r, c).is_zero())
                .ok_or_else(|| Error::Rank("matrix is singular".into()))?;
            if p != c {
                for j in 0..n {
                    a.data.swap(p * n + j, c * n + j);
                    inv.data.swap(p * n + j, c * n + j);
                }
            }
            let pivot = a.get(c, c).recip();
            for j in 0..n {
                a.data[c * n + j] *= &pivot;
                inv.data[c * n + j] *= &pivot;
            }
            for r in 0..n {
                if r == c || a.get(r, c).is_zero() {
                    continue;
                }
                let f = a.get(r, c).clone();
                for j in 0..n {
                    let t = &f * &a.data[c * n + j];
                    a.data[r * n + j] -= t;
                    let t = &f * &inv.data[c * n + j];
                    inv.data[r * n + j] -= t;
                }
            }
        }
        Ok(inv)
    }

    fn to_string_rows(&self) -> Vec<Vec<String>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(rational_to_string).collect())
            .collect()
    }
}

/// Exact signed determinant of a square integer matrix (fraction-free Bareiss).
pub fn determinant(m: &ExactMatrix) -> Result<BigInt> {
    m.require_square()?;
    let mut a = m.to_int_rows()?;
    let n = a.len();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&r| !a[r][k].is_zero()) else {
                return Ok(BigInt::zero());
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    Ok(sign * &a[n - 1][n - 1])
}

fn require_full_rank(b: &ExactMatrix) -> Result<()> {
    b.require_square()?;
    if b.rational_determinant()?.is_zero() {
        return Err(Error::Rank("basis is singular".into()));
    }
    Ok(())
}

/// `B^{-T}`, whose columns generate the dual lattice.
pub fn dual_basis(b: &ExactMatrix) -> Result<ExactMatrix> {
    require_full_rank(b)?;
    Ok(b.inverse()?.transpose())
}

/// Solves `B·z = v` over the rationals.
fn solve(b: &ExactMatrix, v: &[BigInt]) -> Result<Vec<BigRational>> {
    require_full_rank(b)?;
    b.inverse()?.mul_int_vec(v)
}

/// True iff `v` is an integer combination of the columns of `b`.
pub fn membership(b: &ExactMatrix, v: &[BigInt]) -> Result<bool> {
    Ok(solve(b, v)?.iter().all(|z| z.is_integer()))
}

/// Integer coordinates `z` with `B·z = v`.
pub fn coefficients_in_basis(b: &ExactMatrix, v: &[BigInt]) -> Result<Vec<BigInt>> {
    let z = solve(b, v)?;
    if z.iter().any(|x| !x.is_integer()) {
        return Err(Error::Membership("vector is not in the lattice".into()));
    }
    Ok(z.into_iter().map(|x| x.to_integer()).collect())
}

pub fn dot(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter().zip(b).fold(BigRational::zero(), |acc, (x, y)| acc + x * y)
}

pub fn norm_sq(a: &[BigRational]) -> BigRational {
    dot(a, a)
}

pub fn int_norm_sq(a: &[BigInt]) -> BigInt {
    a.iter().fold(BigInt::zero(), |acc, x| acc + x * x)
}

pub fn to_rationals(v: &[BigInt]) -> Vec<BigRational> {
    v.iter().cloned().map(BigRational::from_integer).collect()
}

pub fn rational_to_f64(x: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or_else(|| if x.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> ExactMatrix {
        ExactMatrix::from_i64_rows(rows).unwrap()
    }

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn determinant_examples() {
        assert_eq!(determinant(&ExactMatrix::identity(4).unwrap()).unwrap(), BigInt::from(1));
        assert_eq!(determinant(&m(&[&[2, 1], &[0, 1]])).unwrap(), BigInt::from(2));
        // SysNF, N = 7, b = (3, 5)
        assert_eq!(
            determinant(&m(&[&[7, 3, 5], &[0, 1, 0], &[0, 0, 1]])).unwrap(),
            BigInt::from(7)
        );
        assert_eq!(determinant(&m(&[&[0, 1], &[1, 0]])).unwrap(), BigInt::from(-1));
        assert_eq!(determinant(&m(&[&[1, 2], &[2, 4]])).unwrap(), BigInt::from(0));
    }

    #[test]
    fn bareiss_matches_rational_elimination() {
        let a = m(&[&[3, -2, 5, 1], &[0, 4, -1, 2], &[7, 1, 1, -3], &[2, 2, -6, 9]]);
        assert_eq!(
            BigRational::from_integer(determinant(&a).unwrap()),
            a.rational_determinant().unwrap()
        );
    }

    #[test]
    fn dual_of_sysnf() {
        let b = m(&[&[5, 1], &[0, 1]]);
        let nd = dual_basis(&b).unwrap().scale(&BigRational::from_integer(5.into()));
        assert_eq!(nd, m(&[&[1, 0], &[-1, 5]]));
        assert_eq!(dual_basis(&ExactMatrix::identity(3).unwrap()).unwrap(), ExactMatrix::identity(3).unwrap());
    }

    #[test]
    fn dual_rejects_singular() {
        assert!(matches!(dual_basis(&m(&[&[1, 2], &[2, 4]])), Err(Error::Rank(_))));
        assert!(matches!(dual_basis(&m(&[&[1, 2, 3], &[2, 4, 5]])), Err(Error::Rank(_))));
    }

    #[test]
    fn membership_examples() {
        let b = m(&[&[5, 1], &[0, 1]]);
        assert!(membership(&b, &ints(&[0, 0])).unwrap());
        assert!(membership(&b, &ints(&[3, 3])).unwrap());
        assert!(!membership(&b, &ints(&[1, 0])).unwrap());
        assert!(membership(&b, &ints(&[5, 0])).unwrap());
        assert!(membership(&b, &ints(&[1, 1])).unwrap());
    }

    #[test]
    fn coefficients_of_basis_column() {
        let b = m(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        assert_eq!(coefficients_in_basis(&b, &ints(&[2, 1, 0])).unwrap(), ints(&[1, 0, 0]));
        assert!(matches!(
            coefficients_in_basis(&m(&[&[5, 1], &[0, 1]]), &ints(&[1, 0])),
            Err(Error::Membership(_))
        ));
    }

    #[test]
    fn inverse_round_trip() {
        let a = m(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv).unwrap(), ExactMatrix::identity(3).unwrap());
    }
}
