//! Exact-amplitude simulation of the lattice sampling algorithm.
//!
//! Steps, for a target `f` whose transform `F` is given as a [`QESSpec`]:
//!
//! 1. reduce `B` to a SysNF basis `B'` with parameter `ε/(√n·det B)`;
//! 2. prepare `Σ_u F(T·u/N)|u⟩` over the centred box of `Z_N^n`, truncated
//!    to the declared support;
//! 3. move each `u` to `x' = u + Φ₃(u) ∈ L'_N`, ancilla `Φ₃(u)`;
//! 4. subtract the nearest-plane decoding of `x'` against `N·B'^{-T}` from
//!    the ancilla, which is zero whenever the decode recovers `Φ₃(u)`;
//! 5. apply the lattice QFT on the first register, separately for each
//!    ancilla value since distinct ancillas never interfere;
//! 6. read off `P(z) = Σ_a |A_a(z)|²` over `L'_N` and map each `z`, through
//!    its centred representative, back to `σ^{-1}(z) ∈ L(B)`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{DiscreteDistribution, QESKind, QESSpec};
use crate::error::{Error, Result};
use crate::intlat::{determinant, gram_schmidt, lll_reduce, rational_to_f64, rational_to_string, ExactMatrix};
use crate::oracle::dual_shortest_vector_norm;
use crate::qcirc::qft_on_lattice_sparse;
use crate::sysnf::{center, ln_point, reduce_to_sysnf, ModVector, Phi3, ReductionCertificate};

/// Normalised amplitude above which a grid point counts as carrying mass.
pub const CARRYING_AMPLITUDE: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct SampleOptions {
    /// Cap on the number of candidate grid points in the centred box.
    pub max_grid_points: u128,
    /// Cap on `|L'_N|` for the dense register array of the QFT.
    pub ln_guard: u128,
    /// Decode-mismatch rate above which a warning is emitted.
    pub mismatch_threshold: f64,
}

impl Default for SampleOptions {
    fn default() -> Self {
        Self { max_grid_points: 1 << 24, ln_guard: 1 << 24, mismatch_threshold: 0.0 }
    }
}

/// The boundedness hypothesis `t <= λ₁(L*)/2^{n/2+2}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub t: f64,
    pub lambda1_dual: f64,
    pub bound: f64,
    pub satisfied: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleDiagnostics {
    pub spec: String,
    pub reduction_epsilon: String,
    #[serde(rename = "N")]
    pub modulus: String,
    #[serde(rename = "T")]
    pub scale: String,
    pub delta: String,
    pub grid_points: usize,
    pub carrying_points: usize,
    pub decode_mismatches: usize,
    pub decode_mismatch_rate: f64,
    pub ancilla_groups: usize,
    /// Probability mass left on nonzero ancilla values before the QFT.
    pub ancilla_residual: f64,
    pub normalization_error: f64,
    pub hypothesis: Option<HypothesisCheck>,
    pub sigma_inverse_applied: bool,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct SampleOutcome {
    pub samples: Vec<Vec<i64>>,
    pub distribution: DiscreteDistribution,
    pub certificate: ReductionCertificate,
    pub diagnostics: SampleDiagnostics,
}

/// `⌈1000·√n⌉/1000`, a rational upper bound on `√n`.
fn sqrt_upper(n: usize) -> BigRational {
    let target = BigInt::from(n) * BigInt::from(1_000_000u64);
    let mut r = target.sqrt();
    if &r * &r < target {
        r += 1;
    }
    BigRational::new(r, BigInt::from(1000))
}

/// The reduction parameter `ε/(√n·det B)`, with `√n` rounded up.
pub fn reduction_parameter(b: &ExactMatrix, epsilon: &BigRational) -> Result<BigRational> {
    let det = determinant(b)?.abs();
    if det.is_zero() {
        return Err(Error::Rank("basis is singular".into()));
    }
    Ok(epsilon / (sqrt_upper(b.rows()) * BigRational::from_integer(det)))
}

/// Babai's nearest plane over an integer basis in pure integer arithmetic.
///
/// Each Gram–Schmidt vector `b̃_j` is stored as `g_j / d_j` with `g_j`
/// integral, so `⟨w, b̃_j⟩/‖b̃_j‖² = d_j·⟨w, g_j⟩ / ‖g_j‖²`.
#[derive(Clone, Debug)]
pub struct IntNearestPlane {
    cols: Vec<Vec<BigInt>>,
    g: Vec<Vec<BigInt>>,
    d: Vec<BigInt>,
    gg: Vec<BigInt>,
}

/// `p/q` rounded half away from zero, `q > 0`.
fn round_div(p: &BigInt, q: &BigInt) -> BigInt {
    let two = BigInt::from(2);
    if p.is_negative() {
        -((-p * &two + q).div_floor(&(q * &two)))
    } else {
        (p * &two + q).div_floor(&(q * &two))
    }
}

impl IntNearestPlane {
    pub fn new(b: &ExactMatrix) -> Result<Self> {
        if !b.is_integer() {
            return Err(Error::Parameter("integer basis required".into()));
        }
        let gs = gram_schmidt(b)?;
        let n = b.rows();
        let cols = (0..n).map(|j| b.int_column(j)).collect::<Result<Vec<_>>>()?;
        let mut g = Vec::with_capacity(n);
        let mut d = Vec::with_capacity(n);
        let mut gg = Vec::with_capacity(n);
        for o in &gs.ortho {
            let dj = o.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            let gj: Vec<BigInt> = o.iter().map(|x| (x * BigRational::from_integer(dj.clone())).to_integer()).collect();
            gg.push(gj.iter().map(|x| x * x).sum());
            g.push(gj);
            d.push(dj);
        }
        Ok(Self { cols, g, d, gg })
    }

    pub fn decode(&self, w: &[BigInt]) -> Vec<BigInt> {
        let mut r = w.to_vec();
        for j in (0..self.cols.len()).rev() {
            let p: BigInt = r.iter().zip(&self.g[j]).map(|(a, b)| a * b).sum::<BigInt>() * &self.d[j];
            let c = round_div(&p, &self.gg[j]);
            if !c.is_zero() {
                for (ri, bi) in r.iter_mut().zip(&self.cols[j]) {
                    *ri -= &c * bi;
                }
            }
        }
        w.iter().zip(&r).map(|(a, b)| a - b).collect()
    }
}

/// Points of the centred box `(-N/2, N/2]^n` within `radius` of the origin.
fn centred_box(n: u64, dim: usize, radius: f64, max_points: u128) -> Result<Vec<Vec<i64>>> {
    let lo_full = -(((n - 1) / 2) as i64);
    let hi_full = (n / 2) as i64;
    let k = if radius.is_finite() { radius.floor().min(hi_full as f64) as i64 } else { hi_full };
    let (lo, hi) = (lo_full.max(-k), hi_full.min(k));
    let side = (hi - lo + 1).max(0) as u128;
    let count = side.checked_pow(dim as u32).unwrap_or(u128::MAX);
    if count > max_points {
        return Err(Error::SizeGuard { size: count, guard: max_points });
    }
    let r2 = radius * radius;
    let mut out = Vec::new();
    let mut u = vec![lo; dim];
    if side == 0 {
        return Ok(out);
    }
    loop {
        if u.iter().map(|&v| (v as f64).powi(2)).sum::<f64>() <= r2 {
            out.push(u.clone());
        }
        let mut pos = dim;
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            if u[pos] < hi {
                u[pos] += 1;
                break;
            }
            u[pos] = lo;
        }
    }
}

struct Aligned {
    x: ModVector,
    amp: Complex64,
    ancilla: Vec<u64>,
}

/// `σ^{-1}` on `L'` as `B·P^{-1}·B'^{-1}` in integer arithmetic.
struct InverseMap {
    n: BigInt,
    b: Vec<BigInt>,
    q: Vec<Vec<BigInt>>,
    adj: Vec<Vec<BigInt>>,
    det: BigInt,
}

impl InverseMap {
    fn new(cert: &ReductionCertificate) -> Result<Self> {
        let pinv = cert.transport.inverse()?;
        let q = cert.input.mul(&pinv)?.to_int_rows()?;
        let det = determinant(&cert.input)?;
        let adj = cert.input.inverse()?.scale(&BigRational::from_integer(det.clone())).to_int_rows()?;
        Ok(Self { n: cert.bprime.modulus().clone(), b: cert.bprime.b().to_vec(), q, adj, det })
    }

    fn apply(&self, w: &[i64]) -> Result<Vec<i64>> {
        let w: Vec<BigInt> = w.iter().map(|&v| BigInt::from(v)).collect();
        let phi: BigInt = self.b.iter().zip(&w[1..]).map(|(a, b)| a * b).sum();
        let (c1, rem) = (&w[0] - phi).div_rem(&self.n);
        if !rem.is_zero() {
            return Err(Error::Membership("point is not in the SysNF lattice".into()));
        }
        let mut c = w;
        c[0] = c1;
        let x: Vec<BigInt> = self.q.iter().map(|row| row.iter().zip(&c).map(|(a, b)| a * b).sum()).collect();
        for row in &self.adj {
            let t: BigInt = row.iter().zip(&x).map(|(a, b)| a * b).sum();
            if !t.is_multiple_of(&self.det) {
                return Err(Error::Membership("σ^-1 image is not in the input lattice".into()));
            }
        }
        x.iter()
            .map(|v| v.to_i64().ok_or_else(|| Error::Parameter("sample coordinate overflows i64".into())))
            .collect()
    }
}

fn hypothesis(spec: &QESSpec, b: &ExactMatrix) -> Result<Option<HypothesisCheck>> {
    let n = b.rows();
    let t = match (spec.bound_radius, &spec.kind) {
        (Some(t), _) => t,
        // Gaussians of parameter s are (s√n, 2^-n)-bounded
        (None, QESKind::Gaussian { s }) => s * (n as f64).sqrt(),
        _ => return Ok(None),
    };
    let lambda1_dual = dual_shortest_vector_norm(b)?;
    let bound = lambda1_dual / 2f64.powf(n as f64 / 2.0 + 2.0);
    Ok(Some(HypothesisCheck { t, lambda1_dual, bound, satisfied: t <= bound }))
}

pub fn sample(spec: &QESSpec, b: &ExactMatrix, epsilon: &BigRational, shots: usize, seed: u64) -> Result<SampleOutcome> {
    sample_with(spec, b, epsilon, shots, seed, &SampleOptions::default())
}

pub fn sample_with(
    spec: &QESSpec,
    b: &ExactMatrix,
    epsilon: &BigRational,
    shots: usize,
    seed: u64,
    opts: &SampleOptions,
) -> Result<SampleOutcome> {
    let dim = b.rows();
    let mut warnings = Vec::new();
    let hyp = hypothesis(spec, b)?;
    if let Some(h) = &hyp {
        if !h.satisfied {
            warnings.push(format!("boundedness radius {:.4} exceeds λ₁(L*)/2^(n/2+2) = {:.4}", h.t, h.bound));
        }
    }

    let eps_red = reduction_parameter(b, epsilon)?;
    let cert = reduce_to_sysnf(b, &eps_red)?;
    let sp = &cert.bprime;
    let n = sp.word_modulus()?;
    let t_over_n = rational_to_f64(&BigRational::new(cert.scale.clone(), sp.modulus().clone()));

    // step 2: truncated ψ₁
    let grid = centred_box(n, dim, spec.support_radius / t_over_n, opts.max_grid_points)?;
    let amps: Vec<Complex64> = grid
        .par_iter()
        .map(|u| {
            let arg: Vec<f64> = u.iter().map(|&v| v as f64 * t_over_n).collect();
            spec.amplitude(&arg)
        })
        .collect();
    let total: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if total <= 0.0 {
        return Err(Error::EmptySupport("QES spec has no mass on the sampling grid".into()));
    }
    let norm = total.sqrt();

    // steps 3 and 4
    let phi3 = Phi3::new(sp)?;
    let dual = lll_reduce(&sp.scaled_dual_matrix(), &BigRational::new(3.into(), 4.into()))?;
    let decoder = IntNearestPlane::new(&dual)?;
    let aligned: Vec<Option<Aligned>> = grid
        .par_iter()
        .zip(&amps)
        .map(|(u, &amp)| {
            if amp == Complex64::new(0.0, 0.0) {
                return None;
            }
            let x = ModVector::new(n, u);
            let y = phi3.apply(&x).expect("basis and vector agree");
            let xp = x.add(&y);
            let w: Vec<BigInt> = xp.coords().iter().map(|&c| BigInt::from(c)).collect();
            let m = decoder.decode(&w);
            let m_mod: Vec<u64> = m.iter().map(|c| c.mod_floor(&BigInt::from(n)).to_u64().expect("reduced")).collect();
            let ancilla = y.sub(&ModVector::from_reduced(n, m_mod));
            Some(Aligned { x: xp, amp, ancilla: ancilla.coords().to_vec() })
        })
        .collect();

    let zero = vec![0u64; dim];
    let (mut grid_points, mut carrying, mut mismatches) = (0usize, 0usize, 0usize);
    let mut groups: BTreeMap<Vec<u64>, Vec<(ModVector, Complex64)>> = BTreeMap::new();
    for a in aligned.into_iter().flatten() {
        grid_points += 1;
        if a.amp.norm() / norm >= CARRYING_AMPLITUDE {
            carrying += 1;
            if a.ancilla != zero {
                mismatches += 1;
            }
        }
        groups.entry(a.ancilla).or_default().push((a.x, a.amp));
    }
    let mismatch_rate = if carrying == 0 { 0.0 } else { mismatches as f64 / carrying as f64 };
    if mismatch_rate > opts.mismatch_threshold {
        warnings.push(format!("decode mismatch rate {mismatch_rate:.3e} on {carrying} carrying grid points"));
    }
    let ancilla_residual: f64 = groups
        .iter()
        .filter(|(k, _)| **k != zero)
        .map(|(_, g)| g.iter().map(|(_, a)| a.norm_sqr()).sum::<f64>())
        .fold(0.0, |acc, m| acc + m)
        / total;
    if ancilla_residual > 1e-10 {
        warnings.push(format!("ancilla not returned to |0⟩: residual mass {ancilla_residual:.3e}"));
    }

    // step 5, one QFT per ancilla value
    let mut prob = vec![0f64; sp.ln_order().unwrap_or(0) as usize];
    for g in groups.values() {
        let out = qft_on_lattice_sparse(sp, g, opts.ln_guard)?;
        for (p, a) in prob.iter_mut().zip(&out) {
            *p += a.norm_sqr() / total;
        }
    }
    let normalization_error = (prob.iter().sum::<f64>() - 1.0).abs();

    // step 6
    let inv = InverseMap::new(&cert)?;
    let bw = sp.word_b()?;
    let mapped: Vec<(Vec<i64>, f64)> = prob
        .par_iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(i, &p)| {
            let tail = ModVector::from_index(n, dim - 1, i);
            let z = ln_point(n, &bw, tail.coords());
            let w: Vec<i64> = z.coords().iter().map(|&c| center(c, n)).collect();
            inv.apply(&w).map(|x| (x, p))
        })
        .collect::<Result<_>>()?;
    let distribution = DiscreteDistribution::from_weights(mapped)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let samples = distribution.sample(shots, &mut rng)?;

    let diagnostics = SampleDiagnostics {
        spec: spec.label.clone(),
        reduction_epsilon: rational_to_string(&eps_red),
        modulus: sp.modulus().to_string(),
        scale: cert.scale.to_string(),
        delta: cert.shift.to_string(),
        grid_points,
        carrying_points: carrying,
        decode_mismatches: mismatches,
        decode_mismatch_rate: mismatch_rate,
        ancilla_groups: groups.len(),
        ancilla_residual,
        normalization_error,
        hypothesis: hyp,
        sigma_inverse_applied: true,
        warnings,
    };
    Ok(SampleOutcome { samples, distribution, certificate: cert, diagnostics })
}
