use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{rational_to_f64, ExactMatrix};
use crate::error::{Error, Result};

/// Closest lattice vector found by exhaustive enumeration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CvpResult {
    pub point: Vec<BigRational>,
    pub coefficients: Vec<BigInt>,
    pub distance_sq: BigRational,
}

impl CvpResult {
    pub fn distance(&self) -> f64 {
        rational_to_f64(&self.distance_sq).sqrt()
    }
}

/// Exact closest vector among all `B·z` with `|z_i| <= coeff_bound`.
///
/// Test oracle; cost is `(2·coeff_bound + 1)^n`. Ties resolve to the first
/// candidate in lexicographic order of `z`.
pub fn brute_force_cvp(b: &ExactMatrix, u: &[BigRational], coeff_bound: u64) -> Result<CvpResult> {
    if !b.is_square() {
        return Err(Error::Rank("basis must be square".into()));
    }
    let n = b.rows();
    if u.len() != n {
        return Err(Error::Dimension(format!("target of length {} against rank {}", u.len(), n)));
    }
    // Common denominator so the search runs over integers.
    let mut d = BigInt::one();
    for x in u.iter().chain((0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| b.get(i, j))) {
        d = d.lcm(x.denom());
    }
    let scale = |x: &BigRational| (x * BigRational::from_integer(d.clone())).to_integer();
    let bs: Vec<Vec<BigInt>> = (0..n).map(|i| (0..n).map(|j| scale(b.get(i, j))).collect()).collect();
    let us: Vec<BigInt> = u.iter().map(scale).collect();

    let k = coeff_bound as i64;
    let mut z = vec![-k; n];
    let mut best: Option<(BigInt, Vec<i64>)> = None;
    loop {
        let mut dist = BigInt::zero();
        for i in 0..n {
            let mut acc = -us[i].clone();
            for j in 0..n {
                if z[j] != 0 {
                    acc += &bs[i][j] * z[j];
                }
            }
            dist += &acc * &acc;
        }
        if best.as_ref().is_none_or(|(bd, _)| dist < *bd) {
            best = Some((dist, z.clone()));
        }
        // odometer, last coordinate fastest
        let mut pos = n;
        loop {
            if pos == 0 {
                let (dist, z) = best.expect("non-empty box");
                let coefficients: Vec<BigInt> = z.iter().map(|&c| BigInt::from(c)).collect();
                let point = b.mul_int_vec(&coefficients)?;
                let d2 = BigRational::from_integer(&d * &d);
                return Ok(CvpResult { point, coefficients, distance_sq: BigRational::from_integer(dist) / d2 });
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

/// Coefficient bound guaranteeing that every lattice point within distance
/// `radius` of `u` is inside the enumeration box of [`brute_force_cvp`].
pub fn coefficient_box_for_radius(b: &ExactMatrix, u: &[BigRational], radius: f64) -> Result<u64> {
    let inv = b.inverse()?;
    let center = inv.mul_vec(u)?;
    let mut bound = 0u64;
    for (i, c) in center.iter().enumerate() {
        let row_norm = inv.row(i).iter().map(|x| rational_to_f64(x).powi(2)).sum::<f64>().sqrt();
        let reach = rational_to_f64(&c.abs()) + radius * row_norm;
        let need = reach.ceil().to_u64().unwrap_or(u64::MAX).saturating_add(1);
        bound = bound.max(need);
    }
    Ok(bound)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    #[test]
    fn origin_target() {
        let b = ExactMatrix::from_i64_rows(&[[3, 1], [1, 2]]).unwrap();
        let res = brute_force_cvp(&b, &[r(0, 1), r(0, 1)], 3).unwrap();
        assert!(res.distance_sq.is_zero());
        assert!(res.point.iter().all(Zero::is_zero));
    }

    #[test]
    fn growing_box_never_increases_distance() {
        let b = ExactMatrix::from_i64_rows(&[[7, 2], [1, 9]]).unwrap();
        let u = [r(101, 3), r(-77, 5)];
        let mut prev: Option<BigRational> = None;
        for k in 0..8 {
            let d = brute_force_cvp(&b, &u, k).unwrap().distance_sq;
            if let Some(p) = &prev {
                assert!(d <= *p);
            }
            prev = Some(d);
        }
    }

    #[test]
    fn box_bound_covers_the_answer() {
        let b = ExactMatrix::from_i64_rows(&[[5, 1], [0, 1]]).unwrap();
        let u = [r(12, 5), r(14, 5)];
        let k = coefficient_box_for_radius(&b, &u, 3.0).unwrap();
        let res = brute_force_cvp(&b, &u, k).unwrap();
        assert!(res.coefficients.iter().all(|c| c.abs() < BigInt::from(k)));
        // (2.4, 2.8) is closest to (3, 3) in the lattice x1 ≡ x2 (mod 5)
        assert_eq!(res.point, vec![r(3, 1), r(3, 1)]);
    }
}
