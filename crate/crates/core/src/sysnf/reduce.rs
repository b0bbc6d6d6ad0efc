//! Reduction of an arbitrary full-rank integer basis to a nearby SysNF basis.
//!
//! With `H = B·U` the HNF of `B` and a scale `T`, the integer matrix
//! `C = T·H + S` (where `S` has ones on the sub-diagonal) is column-reduced
//! to SysNF shape, its top-right entry is nudged by `δ` to satisfy the
//! coprimality condition, and the resulting basis `B'` comes with a linear
//! map `σ = B'·P·B^{-1}` sending `L(B)` into `L(B')` with `σ/T ≈ I`.
//!
//! For `v = H·c` one has `σ(v)/T - v = (S·c + δ·c_n·e_1)/T` exactly, so the
//! error shrinks like `1/T`. The scale starts at `⌈n·det(B)/ε⌉` and is
//! doubled until `‖σ/T - I‖_F <= ε`, which bounds `‖σ(v)/T - v‖ <= ε‖v‖`
//! for every `v`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::SysNFBasis;
use crate::error::{Error, Result};
use crate::intlat::{determinant, hnf, norm_sq, parse_rational, rational_to_string, to_rationals, ExactMatrix};

#[derive(Clone, Debug)]
pub struct ReductionOptions {
    /// Largest `δ` tried when restoring coprimality.
    pub delta_search_cap: u64,
    /// The scale search stops once `T` exceeds `2^max_scale_bits`.
    pub max_scale_bits: u64,
}

impl Default for ReductionOptions {
    fn default() -> Self {
        Self { delta_search_cap: 1 << 20, max_scale_bits: 512 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionCertificate {
    /// The input basis `B`.
    pub input: ExactMatrix,
    /// The SysNF basis `B'`.
    pub bprime: SysNFBasis,
    /// Integer unimodular `P` with `σ = B'·P·B^{-1}`.
    pub transport: ExactMatrix,
    pub sigma: ExactMatrix,
    /// The scale `T`.
    pub scale: BigInt,
    /// The shift `δ >= 1` added to the top-left entry.
    pub shift: BigInt,
    pub epsilon: BigRational,
}

type IntMat = Vec<Vec<BigInt>>;

fn ident(n: usize) -> IntMat {
    (0..n).map(|i| (0..n).map(|j| BigInt::from((i == j) as u8)).collect()).collect()
}

/// `col_dst -= q·col_src` on every matrix in `mats`.
fn col_axpy(mats: &mut [&mut IntMat], dst: usize, src: usize, q: &BigInt) {
    for m in mats.iter_mut() {
        for row in m.iter_mut() {
            let t = q * &row[src];
            row[dst] -= t;
        }
    }
}

fn to_exact(m: IntMat) -> ExactMatrix {
    ExactMatrix::from_int_rows(m).expect("square integer matrix")
}

struct Attempt {
    bprime: SysNFBasis,
    transport: ExactMatrix,
    shift: BigInt,
}

/// One reduction at a fixed scale; `None` if `C` happens to be singular.
fn attempt(h: &IntMat, u: &IntMat, t: &BigInt, opts: &ReductionOptions) -> Result<Option<Attempt>> {
    let n = h.len();
    let mut c: IntMat = h.iter().map(|row| row.iter().map(|x| x * t).collect()).collect();
    for i in 1..n {
        c[i][i - 1] = BigInt::one();
    }
    let mut m = ident(n);
    // row i has its pivot 1 in column i-1; clear the rest of the row
    for i in 1..n {
        for j in i..n {
            let q = c[i][j].clone();
            if !q.is_zero() {
                col_axpy(&mut [&mut c, &mut m], j, i - 1, &q);
            }
        }
    }
    let top = c[0][n - 1].clone();
    if top.is_zero() {
        return Ok(None);
    }
    let sign = if top.is_negative() { -BigInt::one() } else { BigInt::one() };

    // R moves column n-1 to the front and fixes its sign
    let mut r = vec![vec![BigInt::zero(); n]; n];
    r[n - 1][0] = sign.clone();
    for j in 1..n {
        r[j - 1][j] = BigInt::one();
    }
    let mut b4 = mul_int(&c, &r);
    let n0 = b4[0][0].clone();
    debug_assert!(n0.is_positive());

    let s = (1..n).fold(BigInt::one(), |acc, j| acc + &b4[0][j] * &b4[0][j]);
    let shift = (1..=opts.delta_search_cap)
        .map(BigInt::from)
        .find(|d| s.gcd(&(&n0 + d)).is_one())
        .ok_or_else(|| {
            Error::SearchExhausted(format!("no shift in [1, {}] restores coprimality", opts.delta_search_cap))
        })?;
    let modulus = &n0 + &shift;
    b4[0][0] = modulus.clone();

    let mut k = ident(n);
    for j in 1..n {
        let q = b4[0][j].div_floor(&modulus);
        if !q.is_zero() {
            col_axpy(&mut [&mut b4, &mut k], j, 0, &q);
        }
    }
    let bprime = SysNFBasis::new(modulus, b4[0][1..].to_vec())?;
    debug_assert_eq!(bprime.to_matrix(), to_exact(b4));

    // P = K^{-1} R^{-1} M^{-1} U^{-1}, all unimodular
    let prod = to_exact(mul_int(&mul_int(u, &m), &mul_int(&r, &k)));
    let transport = prod.inverse()?;
    Ok(Some(Attempt { bprime, transport, shift }))
}

fn mul_int(a: &IntMat, b: &IntMat) -> IntMat {
    let n = a.len();
    let p = b[0].len();
    (0..n)
        .map(|i| (0..p).map(|j| (0..b.len()).fold(BigInt::zero(), |acc, k| acc + &a[i][k] * &b[k][j])).collect())
        .collect()
}

/// Smallest integer `>= x` for a non-negative rational.
fn ceil(x: &BigRational) -> BigInt {
    x.ceil().to_integer()
}

pub fn reduce_to_sysnf(b: &ExactMatrix, epsilon: &BigRational) -> Result<ReductionCertificate> {
    reduce_to_sysnf_with(b, epsilon, &ReductionOptions::default())
}

pub fn reduce_to_sysnf_with(
    b: &ExactMatrix,
    epsilon: &BigRational,
    opts: &ReductionOptions,
) -> Result<ReductionCertificate> {
    if !epsilon.is_positive() || *epsilon >= BigRational::one() {
        return Err(Error::Parameter("epsilon must lie in (0, 1)".into()));
    }
    if !b.is_square() {
        return Err(Error::Rank(format!("basis is {}x{}, not square", b.rows(), b.cols())));
    }
    if !b.is_integer() {
        return Err(Error::Parameter("basis must have integer entries".into()));
    }
    let det = determinant(b)?;
    if det.is_zero() {
        return Err(Error::Rank("basis is singular".into()));
    }
    let n = b.rows();
    let dec = hnf(b)?;
    let h = dec.hnf.to_int_rows()?;
    let u = dec.transform.to_int_rows()?;
    let b_inv = b.inverse()?;
    let eps_sq = epsilon * epsilon;

    let mut t = ceil(&(BigRational::from_integer(BigInt::from(n) * det.abs()) / epsilon)).max(BigInt::one());
    while t.bits() <= opts.max_scale_bits {
        if let Some(a) = attempt(&h, &u, &t, opts)? {
            let sigma = a.bprime.to_matrix().mul(&a.transport)?.mul(&b_inv)?;
            let cert = ReductionCertificate {
                input: b.clone(),
                bprime: a.bprime,
                transport: a.transport,
                sigma,
                scale: t.clone(),
                shift: a.shift,
                epsilon: epsilon.clone(),
            };
            if cert.frobenius_error_sq() <= eps_sq {
                return Ok(cert);
            }
        }
        t *= 2;
    }
    Err(Error::SearchExhausted(format!("no scale below 2^{} meets the bound", opts.max_scale_bits)))
}

impl ReductionCertificate {
    pub fn dim(&self) -> usize {
        self.bprime.dim()
    }

    /// `‖σ/T - I‖_F²`.
    pub fn frobenius_error_sq(&self) -> BigRational {
        let inv_t = BigRational::new(BigInt::one(), self.scale.clone());
        let d = self
            .sigma
            .scale(&inv_t)
            .sub(&ExactMatrix::identity(self.dim()).expect("n >= 1"))
            .expect("square");
        d.frobenius_norm_sq()
    }

    /// `max_i ‖σ(b_i)/T - b_i‖ / ‖b_i‖` over the input basis columns.
    pub fn max_basis_relative_error(&self) -> Result<f64> {
        let mut worst = 0f64;
        for j in 0..self.dim() {
            let col = self.input.int_column(j)?;
            let e = crate::intlat::rational_to_f64(&self.relative_error_sq(&col)?).sqrt();
            worst = worst.max(e);
        }
        Ok(worst)
    }

    /// `σ(v)` for `v ∈ L(B)`.
    pub fn map(&self, v: &[BigInt]) -> Result<Vec<BigInt>> {
        let w = self.sigma.mul_int_vec(v)?;
        if w.iter().any(|x| !x.is_integer()) {
            return Err(Error::Membership("vector is not in the input lattice".into()));
        }
        Ok(w.into_iter().map(|x| x.to_integer()).collect())
    }

    /// `σ^{-1}(w)` for `w ∈ L(B')`.
    pub fn map_inverse(&self, w: &[BigInt]) -> Result<Vec<BigInt>> {
        let v = self.sigma.inverse()?.mul_int_vec(w)?;
        if v.iter().any(|x| !x.is_integer()) {
            return Err(Error::Membership("vector is not in the SysNF lattice".into()));
        }
        Ok(v.into_iter().map(|x| x.to_integer()).collect())
    }

    /// `‖σ(v)/T - v‖² / ‖v‖²` for nonzero `v ∈ L(B)`.
    pub fn relative_error_sq(&self, v: &[BigInt]) -> Result<BigRational> {
        let w = self.map(v)?;
        let t = BigRational::from_integer(self.scale.clone());
        let diff: Vec<BigRational> = to_rationals(&w)
            .into_iter()
            .zip(to_rationals(v))
            .map(|(a, b)| a / &t - b)
            .collect();
        let nv = norm_sq(&to_rationals(v));
        if nv.is_zero() {
            return Err(Error::Parameter("relative error of the zero vector".into()));
        }
        Ok(norm_sq(&diff) / nv)
    }

    /// Re-derives every claim of the certificate from its parts.
    pub fn verify(&self) -> Result<()> {
        if !self.bprime.is_valid() {
            return Err(Error::Condition { gcd: self.bprime.condition_gcd() });
        }
        if !self.transport.is_integer() || determinant(&self.transport)?.abs() != BigInt::one() {
            return Err(Error::Structure("transport matrix is not unimodular".into()));
        }
        let sigma = self.bprime.to_matrix().mul(&self.transport)?.mul(&self.input.inverse()?)?;
        if sigma != self.sigma {
            return Err(Error::Structure("sigma does not match B'·P·B^-1".into()));
        }
        if self.frobenius_error_sq() > &self.epsilon * &self.epsilon {
            return Err(Error::Parameter("sigma/T is not within epsilon of the identity".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&CertificateJson::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: CertificateJson = serde_json::from_str(s)?;
        j.try_into()
    }
}

/// Serialized form; big integers and rationals travel as decimal strings.
#[derive(Serialize, Deserialize)]
struct CertificateJson {
    n: usize,
    #[serde(rename = "N")]
    modulus: String,
    b: Vec<String>,
    #[serde(rename = "T")]
    scale: String,
    #[serde(rename = "delta")]
    shift: String,
    epsilon: String,
    input: Vec<Vec<String>>,
    transport: Vec<Vec<String>>,
    sigma: Vec<Vec<String>>,
}

fn matrix_strings(m: &ExactMatrix) -> Vec<Vec<String>> {
    (0..m.rows()).map(|i| m.row(i).iter().map(rational_to_string).collect()).collect()
}

fn matrix_from_strings(rows: &[Vec<String>]) -> Result<ExactMatrix> {
    let parsed = rows
        .iter()
        .map(|r| r.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    ExactMatrix::from_rows(parsed)
}

fn parse_int(s: &str) -> Result<BigInt> {
    s.trim().parse().map_err(|_| Error::Parse(format!("invalid integer {s:?}")))
}

impl From<&ReductionCertificate> for CertificateJson {
    fn from(c: &ReductionCertificate) -> Self {
        Self {
            n: c.dim(),
            modulus: c.bprime.modulus().to_string(),
            b: c.bprime.b().iter().map(|x| x.to_string()).collect(),
            scale: c.scale.to_string(),
            shift: c.shift.to_string(),
            epsilon: rational_to_string(&c.epsilon),
            input: matrix_strings(&c.input),
            transport: matrix_strings(&c.transport),
            sigma: matrix_strings(&c.sigma),
        }
    }
}

impl TryFrom<CertificateJson> for ReductionCertificate {
    type Error = Error;

    fn try_from(j: CertificateJson) -> Result<Self> {
        let bprime = SysNFBasis::new(parse_int(&j.modulus)?, j.b.iter().map(|s| parse_int(s)).collect::<Result<_>>()?)?;
        if bprime.dim() != j.n {
            return Err(Error::Dimension(format!("n = {} but b has {} entries", j.n, j.b.len())));
        }
        Ok(Self {
            input: matrix_from_strings(&j.input)?,
            bprime,
            transport: matrix_from_strings(&j.transport)?,
            sigma: matrix_from_strings(&j.sigma)?,
            scale: parse_int(&j.scale)?,
            shift: parse_int(&j.shift)?,
            epsilon: parse_rational(&j.epsilon)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intlat::membership;
    use proptest::prelude::*;

    fn m(rows: &[&[i64]]) -> ExactMatrix {
        ExactMatrix::from_i64_rows(rows).unwrap()
    }

    fn r(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    #[test]
    fn identity_basis_reduces() {
        let c = reduce_to_sysnf(&ExactMatrix::identity(2).unwrap(), &r(1, 10)).unwrap();
        c.verify().unwrap();
        assert!(c.scale >= BigInt::from(20));
    }

    #[test]
    fn small_example_is_close() {
        let b = m(&[&[2, 1], &[0, 1]]);
        let eps = r(1, 16);
        let c = reduce_to_sysnf(&b, &eps).unwrap();
        c.verify().unwrap();
        for v in [[2i64, 0], [1, 1], [3, -1], [-5, 7]] {
            let v: Vec<BigInt> = v.iter().map(|&x| x.into()).collect();
            let w = c.map(&v).unwrap();
            assert!(membership(&c.bprime.to_matrix(), &w).unwrap());
            assert!(c.relative_error_sq(&v).unwrap() <= &eps * &eps);
            assert_eq!(c.map_inverse(&w).unwrap(), v);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(reduce_to_sysnf(&m(&[&[1, 2], &[2, 4]]), &r(1, 4)), Err(Error::Rank(_))));
        assert!(matches!(reduce_to_sysnf(&m(&[&[1, 0], &[0, 1]]), &r(0, 1)), Err(Error::Parameter(_))));
        assert!(matches!(reduce_to_sysnf(&m(&[&[1, 0], &[0, 1]]), &r(3, 2)), Err(Error::Parameter(_))));
    }

    #[test]
    fn json_round_trip() {
        let c = reduce_to_sysnf(&m(&[&[3, 1, 0], &[1, 4, 1], &[0, -2, 5]]), &r(1, 8)).unwrap();
        let back = ReductionCertificate::from_json(&c.to_json().unwrap()).unwrap();
        assert_eq!(back, c);
        back.verify().unwrap();
    }

    #[test]
    fn tampered_certificate_fails_verification() {
        let mut c = reduce_to_sysnf(&m(&[&[2, 1], &[0, 3]]), &r(1, 8)).unwrap();
        c.scale *= 3;
        assert!(c.verify().is_err());
    }

    fn basis(n: usize) -> impl Strategy<Value = ExactMatrix> {
        proptest::collection::vec(-9i64..=9, n * n)
            .prop_map(move |v| ExactMatrix::from_i64_rows(&v.chunks(n).collect::<Vec<_>>()).unwrap())
            .prop_filter("full rank", |a| !determinant(a).unwrap().is_zero())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn reduction_invariants(b in prop_oneof![basis(2), basis(3)], v in proptest::collection::vec(-50i64..=50, 3)) {
            let eps = r(1, 16);
            let c = reduce_to_sysnf(&b, &eps).unwrap();
            c.verify().unwrap();
            let n = b.rows();
            let coeffs: Vec<BigInt> = v[..n].iter().map(|&x| x.into()).collect();
            prop_assume!(coeffs.iter().any(|x| !x.is_zero()));
            let lv: Vec<BigInt> = b.mul_int_vec(&coeffs).unwrap().into_iter().map(|x| x.to_integer()).collect();
            let w = c.map(&lv).unwrap();
            prop_assert!(membership(&c.bprime.to_matrix(), &w).unwrap());
            prop_assert!(c.relative_error_sq(&lv).unwrap() <= &eps * &eps);
        }
    }
}
