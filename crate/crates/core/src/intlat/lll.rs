use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{dot, norm_sq, ExactMatrix};
use crate::error::{Error, Result};

/// Exact Gram–Schmidt data of a column basis: `b_i = b̃_i + Σ_{j<i} μ_{i,j} b̃_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GramSchmidtData {
    pub ortho: Vec<Vec<BigRational>>,
    /// `mu[i][j]` for `j < i`; the diagonal and upper part are unused.
    pub mu: Vec<Vec<BigRational>>,
    pub norms_sq: Vec<BigRational>,
}

impl GramSchmidtData {
    /// Rebuilds the original basis (as columns) from the orthogonal vectors.
    pub fn reconstruct(&self) -> Result<ExactMatrix> {
        let n = self.ortho.len();
        let cols: Vec<Vec<BigRational>> = (0..n)
            .map(|i| {
                let mut v = self.ortho[i].clone();
                for j in 0..i {
                    for (vk, bk) in v.iter_mut().zip(&self.ortho[j]) {
                        *vk += &self.mu[i][j] * bk;
                    }
                }
                v
            })
            .collect();
        ExactMatrix::from_columns(&cols)
    }
}

fn gram_schmidt_columns(cols: &[Vec<BigRational>]) -> Result<GramSchmidtData> {
    let n = cols.len();
    let mut ortho: Vec<Vec<BigRational>> = Vec::with_capacity(n);
    let mut norms_sq: Vec<BigRational> = Vec::with_capacity(n);
    let mut mu = vec![vec![BigRational::zero(); n]; n];
    for i in 0..n {
        let mut v = cols[i].clone();
        for j in 0..i {
            let m = dot(&cols[i], &ortho[j]) / &norms_sq[j];
            for (vk, ok) in v.iter_mut().zip(&ortho[j]) {
                *vk -= &m * ok;
            }
            mu[i][j] = m;
        }
        let ns = norm_sq(&v);
        if ns.is_zero() {
            return Err(Error::Rank("basis vectors are linearly dependent".into()));
        }
        ortho.push(v);
        norms_sq.push(ns);
    }
    Ok(GramSchmidtData { ortho, mu, norms_sq })
}

/// Gram–Schmidt orthogonalisation of the columns of `b`, in column order.
pub fn gram_schmidt(b: &ExactMatrix) -> Result<GramSchmidtData> {
    if !b.is_square() {
        return Err(Error::Rank("basis must be square".into()));
    }
    gram_schmidt_columns(&b.columns())
}

fn round(x: &BigRational) -> BigRational {
    // half-way cases away from zero
    x.round()
}

/// Exact LLL reduction of a full-rank basis with Lovász parameter `delta`.
pub fn lll_reduce(b: &ExactMatrix, delta: &BigRational) -> Result<ExactMatrix> {
    let quarter = BigRational::new(1.into(), 4.into());
    if *delta <= quarter || *delta > BigRational::one() {
        return Err(Error::Parameter("LLL delta must lie in (1/4, 1]".into()));
    }
    if !b.is_square() {
        return Err(Error::Rank("basis must be square".into()));
    }
    let mut cols = b.columns();
    let n = cols.len();
    let mut gs = gram_schmidt_columns(&cols)?;
    let mut k = 1;
    while k < n {
        for j in (0..k).rev() {
            let q = round(&gs.mu[k][j]);
            if q.is_zero() {
                continue;
            }
            let bj = cols[j].clone();
            for (x, y) in cols[k].iter_mut().zip(&bj) {
                *x -= &q * y;
            }
            for i in 0..j {
                let t = &q * &gs.mu[j][i];
                gs.mu[k][i] -= t;
            }
            gs.mu[k][j] -= &q;
        }
        let m = &gs.mu[k][k - 1];
        let lhs = &gs.norms_sq[k];
        let rhs = (delta - m * m) * &gs.norms_sq[k - 1];
        if *lhs >= rhs {
            k += 1;
        } else {
            cols.swap(k, k - 1);
            gs = gram_schmidt_columns(&cols)?;
            k = (k - 1).max(1);
        }
    }
    ExactMatrix::from_columns(&cols)
}

/// Checks size reduction `|μ_{i,j}| <= 1/2` and the Lovász condition.
pub fn is_lll_reduced(b: &ExactMatrix, delta: &BigRational) -> Result<bool> {
    let gs = gram_schmidt(b)?;
    let half = BigRational::new(1.into(), 2.into());
    let n = gs.ortho.len();
    for i in 0..n {
        for j in 0..i {
            if gs.mu[i][j].abs() > half {
                return Ok(false);
            }
        }
        if i > 0 {
            let m = &gs.mu[i][i - 1];
            if gs.norms_sq[i] < (delta - m * m) * &gs.norms_sq[i - 1] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Babai's nearest-plane decoder with the Gram–Schmidt data precomputed.
///
/// The approximation guarantee needs an LLL-reduced basis; reduction is
/// left to the caller.
#[derive(Clone, Debug)]
pub struct NearestPlane {
    cols: Vec<Vec<BigRational>>,
    gs: GramSchmidtData,
}

impl NearestPlane {
    pub fn new(b: &ExactMatrix) -> Result<Self> {
        let gs = gram_schmidt(b)?;
        Ok(Self { cols: b.columns(), gs })
    }

    pub fn basis_columns(&self) -> &[Vec<BigRational>] {
        &self.cols
    }

    /// Returns the lattice vector and its integer coordinates.
    pub fn decode_with_coefficients(&self, u: &[BigRational]) -> Result<(Vec<BigRational>, Vec<BigRational>)> {
        let n = self.cols.len();
        if u.len() != n {
            return Err(Error::Dimension(format!("target of length {} against rank {}", u.len(), n)));
        }
        let mut w = u.to_vec();
        let mut coeffs = vec![BigRational::zero(); n];
        for j in (0..n).rev() {
            let c = round(&(dot(&w, &self.gs.ortho[j]) / &self.gs.norms_sq[j]));
            if !c.is_zero() {
                for (wk, bk) in w.iter_mut().zip(&self.cols[j]) {
                    *wk -= &c * bk;
                }
            }
            coeffs[j] = c;
        }
        let v = u.iter().zip(&w).map(|(a, b)| a - b).collect();
        Ok((v, coeffs))
    }

    pub fn decode(&self, u: &[BigRational]) -> Result<Vec<BigRational>> {
        Ok(self.decode_with_coefficients(u)?.0)
    }
}

/// One-shot nearest-plane: a lattice vector close to `u`.
pub fn nearest_plane(b: &ExactMatrix, u: &[BigRational]) -> Result<Vec<BigRational>> {
    NearestPlane::new(b)?.decode(u)
}
