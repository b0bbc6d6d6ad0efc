//! Systematic Normal Form bases and the finite groups they induce.
//!
//! A SysNF basis is the column basis
//!
//! ```text
//! [ N  b_2  b_3 ... b_n ]
//! [    1                ]
//! [         1           ]
//! [              ...    ]
//! [                   1 ]
//! ```
//!
//! whose lattice is `{ x ∈ Z^n : x_1 ≡ Σ_{j≥2} b_j x_j (mod N) }`. We
//! require `gcd(Σ b_j² + 1, N) = 1`; both the quotient-to-dual bijection
//! and the lattice QFT invert `Σ b_j² + 1` modulo `N`.

mod modvec;
mod reduce;

pub use modvec::{center, inner_mod, mod_inverse, ModVector};
pub use reduce::{reduce_to_sysnf, reduce_to_sysnf_with, ReductionCertificate, ReductionOptions};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::intlat::ExactMatrix;

/// Default cap on the number of points an enumeration may produce.
pub const ENUMERATION_GUARD: u128 = 1 << 24;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SysNFBasis {
    modulus: BigInt,
    b: Vec<BigInt>,
}

impl SysNFBasis {
    /// Builds and validates a SysNF basis; `b` is reduced into `[0, N)`.
    pub fn new(modulus: BigInt, b: Vec<BigInt>) -> Result<Self> {
        let s = Self::from_parts_unchecked(modulus, b)?;
        let g = s.condition_gcd();
        if !g.is_one() {
            return Err(Error::Condition { gcd: g });
        }
        Ok(s)
    }

    pub fn from_small(modulus: u64, b: &[u64]) -> Result<Self> {
        Self::new(BigInt::from(modulus), b.iter().map(|&x| BigInt::from(x)).collect())
    }

    /// Builds the SysNF shape without the coprimality check. Only meant for
    /// negative controls; downstream operations assume a validated basis.
    pub fn from_parts_unchecked(modulus: BigInt, b: Vec<BigInt>) -> Result<Self> {
        if !modulus.is_positive() {
            return Err(Error::Structure(format!("modulus must be positive, got {modulus}")));
        }
        let b = b.into_iter().map(|x| x.mod_floor(&modulus)).collect();
        Ok(Self { modulus, b })
    }

    /// Lattice dimension `n`.
    pub fn dim(&self) -> usize {
        self.b.len() + 1
    }

    pub fn modulus(&self) -> &BigInt {
        &self.modulus
    }

    /// `(b_2, …, b_n)`, each in `[0, N)`.
    pub fn b(&self) -> &[BigInt] {
        &self.b
    }

    /// `Σ b_j² + 1`.
    pub fn condition_value(&self) -> BigInt {
        self.b.iter().fold(BigInt::one(), |acc, x| acc + x * x)
    }

    pub fn condition_gcd(&self) -> BigInt {
        self.condition_value().gcd(&self.modulus)
    }

    pub fn is_valid(&self) -> bool {
        self.condition_gcd().is_one()
    }

    pub fn to_matrix(&self) -> ExactMatrix {
        let n = self.dim();
        let mut m = ExactMatrix::identity(n).expect("n >= 1");
        m.set(0, 0, BigRational::from_integer(self.modulus.clone()));
        for (j, bj) in self.b.iter().enumerate() {
            m.set(0, j + 1, BigRational::from_integer(bj.clone()));
        }
        m
    }

    /// `N·B^{-T}`: first column `(1, -b_2, …, -b_n)`, then `N·e_j`.
    pub fn scaled_dual_matrix(&self) -> ExactMatrix {
        let n = self.dim();
        let mut m = ExactMatrix::zeros(n, n).expect("n >= 1");
        m.set(0, 0, BigRational::one());
        for (j, bj) in self.b.iter().enumerate() {
            m.set(j + 1, 0, BigRational::from_integer(-bj.clone()));
            m.set(j + 1, j + 1, BigRational::from_integer(self.modulus.clone()));
        }
        m
    }

    /// The modulus as a machine word, for operations over `Z_N^n`.
    pub fn word_modulus(&self) -> Result<u64> {
        self.modulus
            .to_u64()
            .filter(|&n| n < (1 << 62))
            .ok_or(Error::SizeGuard { size: u128::MAX, guard: 1 << 62 })
    }

    pub fn word_b(&self) -> Result<Vec<u64>> {
        self.word_modulus()?;
        Ok(self.b.iter().map(|x| x.to_u64().expect("reduced below N")).collect())
    }

    /// `|L_N| = N^{n-1}`, if it fits in a `u128`.
    pub fn ln_order(&self) -> Option<u128> {
        let n = self.modulus.to_u128()?;
        n.checked_pow(self.b.len() as u32)
    }
}

/// Accepts `b` iff it has the SysNF shape and `gcd(Σ b_j² + 1, N) = 1`.
pub fn validate(b: &ExactMatrix) -> Result<SysNFBasis> {
    if !b.is_square() {
        return Err(Error::Structure(format!("matrix is {}x{}, not square", b.rows(), b.cols())));
    }
    if !b.is_integer() {
        return Err(Error::Structure("matrix has non-integer entries".into()));
    }
    let rows = b.to_int_rows()?;
    let n = rows.len();
    for (i, row) in rows.iter().enumerate().skip(1) {
        for (j, x) in row.iter().enumerate() {
            let want = if i == j { BigInt::one() } else { BigInt::zero() };
            if *x != want {
                return Err(Error::Structure(format!("entry ({}, {}) is {x}, expected {want}", i + 1, j + 1)));
            }
        }
    }
    SysNFBasis::new(rows[0][0].clone(), rows[0][1..n].to_vec())
}

fn check_modulus(s: &SysNFBasis, x: &ModVector) -> Result<(u64, Vec<u64>)> {
    let n = s.word_modulus()?;
    if x.modulus() != n {
        return Err(Error::ModulusMismatch { expected: n, found: x.modulus() });
    }
    if x.dim() != s.dim() {
        return Err(Error::Dimension(format!("vector of length {} in dimension {}", x.dim(), s.dim())));
    }
    Ok((n, s.word_b()?))
}

/// `Σ_{j≥2} b_j x_j mod N`.
fn phi(n: u64, b: &[u64], tail: &[u64]) -> u64 {
    b.iter().zip(tail).fold(0u64, |acc, (&bj, &xj)| ((acc as u128 + bj as u128 * xj as u128) % n as u128) as u64)
}

/// True iff `x_1 ≡ Σ_{j≥2} b_j x_j (mod N)`.
pub fn ln_membership(s: &SysNFBasis, x: &ModVector) -> Result<bool> {
    let (n, b) = check_modulus(s, x)?;
    let c = x.coords();
    Ok(c[0] == phi(n, &b, &c[1..]))
}

fn guard(size: Option<u128>, limit: u128) -> Result<u128> {
    match size {
        Some(s) if s <= limit => Ok(s),
        other => Err(Error::SizeGuard { size: other.unwrap_or(u128::MAX), guard: limit }),
    }
}

/// The point of `L_N` with tail `(x_2, …, x_n)`.
pub fn ln_point(n: u64, b: &[u64], tail: &[u64]) -> ModVector {
    let mut coords = Vec::with_capacity(tail.len() + 1);
    coords.push(phi(n, b, tail));
    coords.extend_from_slice(tail);
    ModVector::from_reduced(n, coords)
}

/// All of `L_N`, lexicographic in `(x_2, …, x_n)`.
pub fn enumerate_ln(s: &SysNFBasis) -> Result<Vec<ModVector>> {
    enumerate_ln_with_guard(s, ENUMERATION_GUARD)
}

pub fn enumerate_ln_with_guard(s: &SysNFBasis, limit: u128) -> Result<Vec<ModVector>> {
    let count = guard(s.ln_order(), limit)? as usize;
    let n = s.word_modulus()?;
    let b = s.word_b()?;
    let mut tail = vec![0u64; b.len()];
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        out.push(ln_point(n, &b, &tail));
        for d in tail.iter_mut().rev() {
            *d += 1;
            if *d < n {
                break;
            }
            *d = 0;
        }
    }
    Ok(out)
}

/// The `N` points `(a, -b_2 a, …, -b_n a) mod N` of `(NL*)_N`, by `a`.
pub fn enumerate_scaled_dual(s: &SysNFBasis) -> Result<Vec<ModVector>> {
    let n = s.word_modulus()?;
    guard(Some(n as u128), ENUMERATION_GUARD)?;
    let b = s.word_b()?;
    Ok((0..n).map(|a| scaled_dual_point(n, &b, a)).collect())
}

fn scaled_dual_point(n: u64, b: &[u64], a: u64) -> ModVector {
    let mut coords = Vec::with_capacity(b.len() + 1);
    coords.push(a);
    for &bj in b {
        let t = (bj as u128 * a as u128 % n as u128) as u64;
        coords.push((n - t) % n);
    }
    ModVector::from_reduced(n, coords)
}

/// The quotient-to-dual bijection with `(Σ b_j² + 1)^{-1} mod N` precomputed.
#[derive(Clone, Debug)]
pub struct Phi3 {
    n: u64,
    b: Vec<u64>,
    inv_c: u64,
}

impl Phi3 {
    pub fn new(s: &SysNFBasis) -> Result<Self> {
        let g = s.condition_gcd();
        if !g.is_one() {
            return Err(Error::Condition { gcd: g });
        }
        let n = s.word_modulus()?;
        let c = s.condition_value().mod_floor(&BigInt::from(n)).to_u64().expect("reduced");
        let inv_c = mod_inverse(c, n).ok_or(Error::Condition { gcd: g })?;
        Ok(Self { n, b: s.word_b()?, inv_c })
    }

    /// The `a ∈ Z_N` labelling `Φ₃(x)`.
    pub fn label(&self, x: &[u64]) -> u64 {
        let n = self.n as u128;
        let r = (x[0] as u128 + n - phi(self.n, &self.b, &x[1..]) as u128) % n;
        // a = -(Σb²+1)^{-1}·(x_1 - φ(x))
        let t = (self.inv_c as u128 * r % n) as u64;
        (self.n - t) % self.n
    }

    pub fn apply(&self, x: &ModVector) -> Result<ModVector> {
        if x.modulus() != self.n {
            return Err(Error::ModulusMismatch { expected: self.n, found: x.modulus() });
        }
        if x.dim() != self.b.len() + 1 {
            return Err(Error::Dimension("vector length does not match basis".into()));
        }
        Ok(scaled_dual_point(self.n, &self.b, self.label(x.coords())))
    }
}

/// The unique `y ∈ (NL*)_N` with `x + y ∈ L_N`.
pub fn phi3(s: &SysNFBasis, x: &ModVector) -> Result<ModVector> {
    Phi3::new(s)?.apply(x)
}
