use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::GridFunction;
use crate::error::{Error, Result};
use crate::sysnf::{enumerate_ln_with_guard, ModVector, SysNFBasis, ENUMERATION_GUARD};

/// Monte Carlo estimate of the smallest `ε` with
/// `Σ_{x∈L_N} |f̂(x-v)|² >= (1-ε)·Σ_{x∈L_N} |f̂(x)|²` over shifts `v`.
///
/// The integer points of the fundamental parallelotope of a SysNF basis are
/// `(k, 0, …, 0)` for `k ∈ [0, N)`; `samples` of them are drawn uniformly
/// from a ChaCha20 stream seeded with `seed`, and the largest shortfall is
/// returned, clamped to `[0, 1]`.
pub fn smoothness_estimate(s: &SysNFBasis, fhat: &GridFunction, samples: usize, seed: u64) -> Result<f64> {
    let n = s.word_modulus()?;
    if fhat.modulus() != n {
        return Err(Error::ModulusMismatch { expected: n, found: fhat.modulus() });
    }
    if fhat.dim() != s.dim() {
        return Err(Error::Dimension("grid dimension does not match basis".into()));
    }
    if samples == 0 {
        return Err(Error::Parameter("need at least one sample".into()));
    }
    let lattice = enumerate_ln_with_guard(s, ENUMERATION_GUARD)?;
    let mass = |v: &ModVector| -> f64 { lattice.iter().map(|x| fhat.at(&x.sub(v)).norm_sqr()).sum() };
    let base = mass(&ModVector::zero(n, s.dim()));
    if base <= 0.0 {
        return Err(Error::Parameter("f-hat has no mass on L_N".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut cache = vec![None; n as usize];
    let mut worst = 0f64;
    for _ in 0..samples {
        let k = rng.gen_range(0..n);
        let shortfall = *cache[k as usize].get_or_insert_with(|| {
            let mut v = vec![0u64; s.dim()];
            v[0] = k;
            1.0 - mass(&ModVector::from_reduced(n, v)) / base
        });
        worst = worst.max(shortfall);
    }
    Ok(worst.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn basis() -> SysNFBasis {
        SysNFBasis::from_small(8, &[2]).unwrap()
    }

    #[test]
    fn constant_is_perfectly_smooth() {
        let g = GridFunction::from_fn(8, 2, |_| Complex64::new(1.0, 0.0)).unwrap();
        assert!(smoothness_estimate(&basis(), &g, 100, 1).unwrap() < 1e-12);
    }

    #[test]
    fn delta_is_maximally_rough() {
        let g = GridFunction::from_fn(8, 2, |x| Complex64::new((x.index() == 0) as u8 as f64, 0.0)).unwrap();
        assert!(smoothness_estimate(&basis(), &g, 100, 1).unwrap() > 0.99);
    }

    #[test]
    fn deterministic_and_rejects_zero() {
        let g = GridFunction::from_fn(8, 2, |x| Complex64::new(x.coords()[0] as f64, 0.0)).unwrap();
        let a = smoothness_estimate(&basis(), &g, 50, 9).unwrap();
        assert_eq!(a, smoothness_estimate(&basis(), &g, 50, 9).unwrap());
        let z = GridFunction::from_fn(8, 2, |_| Complex64::new(0.0, 0.0)).unwrap();
        assert!(smoothness_estimate(&basis(), &z, 10, 0).is_err());
    }
}
