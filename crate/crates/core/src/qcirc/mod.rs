//! Statevector simulation of the lattice QFT circuit on `Z_N` registers.
//!
//! For a SysNF basis the circuit is
//!
//! 1. shear: `|x⟩ ↦ |x_1, x_2 + b_2 x_1, …, x_n + b_n x_1⟩`;
//! 2. uncompute the first register, using `x_1 = c^{-1}·Σ b_j y_j` on
//!    sheared `L_N` states, with `c = Σ b_j² + 1`;
//! 3. an `N`-point QFT on each of the remaining `n-1` registers;
//! 4. re-attach `Σ b_j z_j` as the first register, landing in `L_N`.
//!
//! Amplitude arrays are row-major with register 1 most significant.

mod snapshot;

pub use snapshot::{read_snapshot, write_snapshot, SnapshotHeader};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::sysnf::{ln_membership, mod_inverse, ModVector, SysNFBasis};

/// Amplitudes below this are treated as zero by support checks.
pub const SUPPORT_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Statevector {
    modulus: u64,
    registers: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    pub fn new(modulus: u64, registers: usize, amps: Vec<Complex64>) -> Result<Self> {
        let size = (modulus as u128).checked_pow(registers as u32);
        if modulus == 0 || size != Some(amps.len() as u128) {
            return Err(Error::Dimension(format!("{} amplitudes for {registers} registers mod {modulus}", amps.len())));
        }
        Ok(Self { modulus, registers, amps })
    }

    pub fn zeros(modulus: u64, registers: usize) -> Result<Self> {
        let size = (modulus as usize)
            .checked_pow(registers as u32)
            .ok_or(Error::SizeGuard { size: u128::MAX, guard: usize::MAX as u128 })?;
        Self::new(modulus, registers, vec![Complex64::new(0.0, 0.0); size])
    }

    pub fn basis_state(x: &ModVector) -> Result<Self> {
        let mut s = Self::zeros(x.modulus(), x.dim())?;
        s.amps[x.index()] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn registers(&self) -> usize {
        self.registers
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amp(&self, x: &ModVector) -> Complex64 {
        self.amps[x.index()]
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    fn point(&self, index: usize) -> ModVector {
        ModVector::from_index(self.modulus, self.registers, index)
    }
}

fn check_basis(s: &SysNFBasis, psi: &Statevector, registers: usize) -> Result<(u64, Vec<u64>)> {
    let n = s.word_modulus()?;
    if psi.modulus != n {
        return Err(Error::ModulusMismatch { expected: n, found: psi.modulus });
    }
    if psi.registers != registers {
        return Err(Error::Dimension(format!("state has {} registers, expected {registers}", psi.registers)));
    }
    Ok((n, s.word_b()?))
}

fn mulmod(a: u64, b: u64, n: u64) -> u64 {
    (a as u128 * b as u128 % n as u128) as u64
}

/// `Σ b_j y_j mod N`.
fn weighted_sum(n: u64, b: &[u64], y: &[u64]) -> u64 {
    b.iter().zip(y).fold(0u64, |acc, (&bj, &yj)| (acc + mulmod(bj, yj, n)) % n)
}

fn shear_by(psi: &Statevector, b: &[u64], sign_negative: bool) -> Statevector {
    let n = psi.modulus;
    let mut out = vec![Complex64::new(0.0, 0.0); psi.amps.len()];
    for (i, a) in psi.amps.iter().enumerate() {
        let x = psi.point(i);
        let c = x.coords();
        let mut y = c.to_vec();
        for (yj, &bj) in y[1..].iter_mut().zip(b) {
            let t = mulmod(bj, c[0], n);
            *yj = if sign_negative { (*yj + n - t) % n } else { (*yj + t) % n };
        }
        out[ModVector::from_reduced(n, y).index()] = *a;
    }
    Statevector { modulus: n, registers: psi.registers, amps: out }
}

/// `|x⟩ ↦ |x_1, x_j + b_j x_1⟩`.
pub fn step_shear(s: &SysNFBasis, psi: &Statevector) -> Result<Statevector> {
    let (_, b) = check_basis(s, psi, s.dim())?;
    Ok(shear_by(psi, &b, false))
}

/// Inverse of [`step_shear`].
pub fn step_unshear(s: &SysNFBasis, psi: &Statevector) -> Result<Statevector> {
    let (_, b) = check_basis(s, psi, s.dim())?;
    Ok(shear_by(psi, &b, true))
}

/// `(Σ b_j² + 1)^{-1} mod N`.
fn inverse_condition(s: &SysNFBasis, n: u64, b: &[u64]) -> Result<u64> {
    let c = (1 + b.iter().fold(0u64, |acc, &x| (acc + mulmod(x, x, n)) % n)) % n;
    mod_inverse(c, n).ok_or_else(|| Error::Condition { gcd: s.condition_gcd() })
}

/// Drops register 1, which on sheared `L_N` states equals `c^{-1}·Σ b_j y_j`.
pub fn step_uncompute_first(s: &SysNFBasis, psi: &Statevector) -> Result<Statevector> {
    let (n, b) = check_basis(s, psi, s.dim())?;
    let inv_c = inverse_condition(s, n, &b)?;
    let tail_size = psi.amps.len() / n as usize;
    let mut out = vec![Complex64::new(0.0, 0.0); tail_size];
    for (i, a) in psi.amps.iter().enumerate() {
        if a.norm() <= SUPPORT_TOLERANCE {
            continue;
        }
        let (x1, tail) = (i / tail_size, i % tail_size);
        let y = ModVector::from_index(n, s.dim() - 1, tail);
        let want = mulmod(inv_c, weighted_sum(n, &b, y.coords()), n);
        if x1 as u64 != want {
            return Err(Error::Uncompute(format!(
                "amplitude {:.3e} on register value {x1}, expected {want} for tail {:?}",
                a.norm(),
                y.coords()
            )));
        }
        out[tail] = *a;
    }
    Statevector::new(n, s.dim() - 1, out)
}

/// `N`-point QFT with kernel `e^{-2πi y z/N}/√N` on one register.
pub fn qft_mod_n(psi: &Statevector, register: usize) -> Result<Statevector> {
    if register >= psi.registers {
        return Err(Error::Dimension(format!("register {register} out of range 0..{}", psi.registers)));
    }
    let n = psi.modulus as usize;
    let stride = n.pow((psi.registers - 1 - register) as u32);
    let block = stride * n;
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let scale = 1.0 / (n as f64).sqrt();
    let mut amps = psi.amps.clone();
    amps.par_chunks_mut(block).for_each(|chunk| {
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for off in 0..stride {
            for (k, c) in line.iter_mut().enumerate() {
                *c = chunk[off + k * stride];
            }
            fft.process(&mut line);
            for (k, c) in line.iter().enumerate() {
                chunk[off + k * stride] = c * scale;
            }
        }
    });
    Ok(Statevector { modulus: psi.modulus, registers: psi.registers, amps })
}

/// Prepends register 1 holding `Σ b_j z_j mod N`.
pub fn step_apply_basis(s: &SysNFBasis, psi: &Statevector) -> Result<Statevector> {
    let (n, b) = check_basis(s, psi, s.dim() - 1)?;
    let tail_size = psi.amps.len();
    let mut out = vec![Complex64::new(0.0, 0.0); tail_size * n as usize];
    for (i, a) in psi.amps.iter().enumerate() {
        let z = psi.point(i);
        out[weighted_sum(n, &b, z.coords()) as usize * tail_size + i] = *a;
    }
    Statevector::new(n, s.dim(), out)
}

/// Every intermediate state of the circuit, labelled, on an `L_N`-supported input.
pub fn circuit_trace(s: &SysNFBasis, psi: &Statevector) -> Result<Vec<(String, Statevector)>> {
    let mut trace = vec![("input".to_string(), psi.clone())];
    let sheared = step_shear(s, psi)?;
    let mut cur = step_uncompute_first(s, &sheared)?;
    trace.push(("shear".into(), sheared));
    trace.push(("uncompute".into(), cur.clone()));
    for r in 0..cur.registers {
        cur = qft_mod_n(&cur, r)?;
        trace.push((format!("qft{}", r + 2), cur.clone()));
    }
    trace.push(("apply_basis".into(), step_apply_basis(s, &cur)?));
    Ok(trace)
}

/// The full circuit; amplitude off `L_N` is passed through unchanged.
pub fn simulate_sysnf_qft(s: &SysNFBasis, psi: &Statevector) -> Result<Statevector> {
    let (n, _) = check_basis(s, psi, s.dim())?;
    let mut on = Statevector::zeros(n, s.dim())?;
    let mut off = on.clone();
    for (i, a) in psi.amps.iter().enumerate() {
        let target = if ln_membership(s, &psi.point(i))? { &mut on } else { &mut off };
        target.amps[i] = *a;
    }
    let mut out = circuit_trace(s, &on)?.pop().expect("non-empty trace").1;
    for (o, a) in out.amps.iter_mut().zip(&off.amps) {
        *o += a;
    }
    Ok(out)
}

/// The circuit applied to a sparse superposition of `L_N` points, without
/// materialising the `N^n` register space.
///
/// Returns amplitudes over `L_N` in the DFT index order (lexicographic in
/// the tail), i.e. the output of step 4 read off its support.
pub fn qft_on_lattice_sparse(s: &SysNFBasis, points: &[(ModVector, Complex64)], guard: u128) -> Result<Vec<Complex64>> {
    let n = s.word_modulus()?;
    let b = s.word_b()?;
    let size = s.ln_order().filter(|&m| m <= guard).ok_or(Error::SizeGuard {
        size: s.ln_order().unwrap_or(u128::MAX),
        guard,
    })?;
    let inv_c = inverse_condition(s, n, &b)?;
    let mut reg = Statevector::zeros(n, s.dim() - 1)?;
    debug_assert_eq!(reg.amps.len() as u128, size);
    for (x, a) in points {
        if x.modulus() != n {
            return Err(Error::ModulusMismatch { expected: n, found: x.modulus() });
        }
        let c = x.coords();
        let y: Vec<u64> = c[1..].iter().zip(&b).map(|(&xj, &bj)| (xj + mulmod(bj, c[0], n)) % n).collect();
        if a.norm() > SUPPORT_TOLERANCE && mulmod(inv_c, weighted_sum(n, &b, &y), n) != c[0] {
            return Err(Error::Uncompute(format!("point {c:?} is not in L_N")));
        }
        reg.amps[ModVector::from_reduced(n, y).index()] += a;
    }
    for r in 0..reg.registers {
        reg = qft_mod_n(&reg, r)?;
    }
    // step 4 is a relabelling z ↦ (Σ b_j z_j, z), so the tail order is kept
    Ok(reg.amps)
}
