//! Independent brute-force oracles used to cross-check the fast paths.
//!
//! Nothing here shares code with the routines it checks: the full-grid DFT
//! runs axis-wise FFTs over `Z_N^n` instead of evaluating characters on
//! `L_N`, and shortest vectors are found by exhaustive enumeration.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use rustfft::FftPlanner;

use crate::dft::{GridFunction, LatticeFunction};
use crate::error::{Error, Result};
use crate::intlat::{coefficient_box_for_radius, lll_reduce, norm_sq, rational_to_f64, ExactMatrix};
use crate::sysnf::SysNFBasis;

/// Unnormalized `Ĝ(x) = Σ_{z∈Z_N^n} g(z)·e^{-2πi⟨x,z⟩/N}` by FFTs along each axis.
pub fn full_grid_dft(g: &GridFunction) -> Result<GridFunction> {
    let n = g.modulus() as usize;
    let dim = g.dim();
    let mut data = g.values().to_vec();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        let block = stride * n;
        for start in (0..data.len()).step_by(block) {
            for off in 0..stride {
                let base = start + off;
                for (k, c) in line.iter_mut().enumerate() {
                    *c = data[base + k * stride];
                }
                fft.process(&mut line);
                for (k, c) in line.iter().enumerate() {
                    data[base + k * stride] = *c;
                }
            }
        }
    }
    GridFunction::new(g.modulus(), dim, data)
}

/// Extends `f` by zero to `Z_N^n`, takes the full DFT, restricts to `L_N`
/// and rescales by `1/√(N^{n-1})`.
pub fn dft_then_restrict(s: &SysNFBasis, f: &LatticeFunction) -> Result<LatticeFunction> {
    let full = full_grid_dft(&GridFunction::extend(f)?)?;
    let r = full.restrict(s)?;
    let scale = 1.0 / (r.values().len() as f64).sqrt();
    LatticeFunction::new(s, r.values().iter().map(|v| v * scale).collect())
}

/// Exact `λ₁(L(B))²` by enumeration, for any full-rank rational basis.
pub fn shortest_vector_sq(b: &ExactMatrix) -> Result<BigRational> {
    let red = lll_reduce(b, &BigRational::new(3.into(), 4.into()))?;
    let n = red.rows();
    // the first reduced vector bounds λ₁ from above
    let bound = red.columns().iter().map(|c| norm_sq(c)).min().expect("n >= 1");
    let origin = vec![BigRational::zero(); n];
    let k = coefficient_box_for_radius(&red, &origin, rational_to_f64(&bound).sqrt() * (1.0 + 1e-9))? as i64;
    let mut best = bound;
    let mut z = vec![-k; n];
    loop {
        if z.iter().any(|&c| c != 0) {
            let coeffs: Vec<BigInt> = z.iter().map(|&c| BigInt::from(c)).collect();
            let v = red.mul_int_vec(&coeffs)?;
            let d = norm_sq(&v);
            if d < best {
                best = d;
            }
        }
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok(best);
            }
            pos -= 1;
            if z[pos] < k {
                z[pos] += 1;
                break;
            }
            z[pos] = -k;
        }
    }
}

pub fn shortest_vector_norm(b: &ExactMatrix) -> Result<f64> {
    Ok(rational_to_f64(&shortest_vector_sq(b)?).sqrt())
}

/// `λ₁(L*)` via the dual basis `B^{-T}`.
pub fn dual_shortest_vector_norm(b: &ExactMatrix) -> Result<f64> {
    shortest_vector_norm(&crate::intlat::dual_basis(b)?)
}

/// Relative L2 distance `‖a - b‖ / ‖b‖`.
pub fn relative_l2(a: &[Complex64], b: &[Complex64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension("vectors differ in length".into()));
    }
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    Ok(if den == 0.0 { num.sqrt() } else { (num / den).sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dft::{apply_dft, twiddle};
    use crate::sysnf::ModVector;

    #[test]
    fn grid_dft_matches_direct_sum() {
        let g = GridFunction::from_fn(3, 2, |x| Complex64::new(x.index() as f64, 1.0)).unwrap();
        let fast = full_grid_dft(&g).unwrap();
        for xi in 0..9 {
            let x = ModVector::from_index(3, 2, xi);
            let direct: Complex64 =
                (0..9).map(|zi| g.values()[zi] * twiddle(x.inner(&ModVector::from_index(3, 2, zi)), 3)).sum();
            assert!((fast.values()[xi] - direct).norm() < 1e-12);
        }
    }

    #[test]
    fn restriction_matches_dense() {
        let s = SysNFBasis::from_small(5, &[1]).unwrap();
        let f = LatticeFunction::new(&s, (0..5).map(|i| Complex64::new(i as f64, (i * i) as f64)).collect()).unwrap();
        let a = apply_dft(&s, &f).unwrap();
        let b = dft_then_restrict(&s, &f).unwrap();
        assert!(relative_l2(a.values(), b.values()).unwrap() < 1e-12);
    }

    #[test]
    fn shortest_vectors() {
        let b = ExactMatrix::from_i64_rows(&[[2, 1], [0, 1]]).unwrap();
        assert_eq!(shortest_vector_sq(&b).unwrap(), BigRational::from_integer(2.into()));
        let d = dual_shortest_vector_norm(&b).unwrap();
        assert!((d - 0.5f64.sqrt()).abs() < 1e-12);
        let skew = ExactMatrix::from_i64_rows(&[[1, 0], [100, 1]]).unwrap();
        assert_eq!(shortest_vector_sq(&skew).unwrap(), BigRational::from_integer(1.into()));
    }
}
