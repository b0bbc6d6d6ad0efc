use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{determinant, ExactMatrix};
use crate::error::{Error, Result};

/// Hermite normal form of a column basis together with the unimodular
/// transform: `hnf = input · transform`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HnfDecomposition {
    pub hnf: ExactMatrix,
    pub transform: ExactMatrix,
}

/// Column-style HNF of a full-rank square integer matrix.
///
/// The result is upper-triangular with a positive diagonal and every
/// entry to the right of a pivot reduced into `[0, pivot)`. Rows are
/// processed bottom-up; each row is cleared left of the diagonal by
/// extended-Euclid column operations, which are mirrored on `transform`.
pub fn hnf(m: &ExactMatrix) -> Result<HnfDecomposition> {
    if !m.is_square() {
        return Err(Error::Rank(format!("HNF needs a square matrix, got {}x{}", m.rows(), m.cols())));
    }
    if determinant(m)?.is_zero() {
        return Err(Error::Rank("HNF needs a full-rank matrix".into()));
    }
    let n = m.rows();
    let mut a = m.to_int_rows()?;
    let mut u: Vec<Vec<BigInt>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();

    for i in (0..n).rev() {
        for k in 0..i {
            if a[i][k].is_zero() {
                continue;
            }
            let (x, y) = (a[i][k].clone(), a[i][i].clone());
            let eg = x.extended_gcd(&y);
            let (g, s, t) = (eg.gcd, eg.x, eg.y);
            let (xg, yg) = (&x / &g, &y / &g);
            // [col_k, col_i] <- [col_k, col_i] · [[y/g, s], [-x/g, t]], det = 1
            for mat in [&mut a, &mut u] {
                for row in mat.iter_mut() {
                    let ck = row[k].clone();
                    let ci = row[i].clone();
                    row[i] = &s * &ck + &t * &ci;
                    row[k] = &yg * &ck - &xg * &ci;
                }
            }
        }
        if a[i][i].is_negative() {
            for mat in [&mut a, &mut u] {
                for row in mat.iter_mut() {
                    row[i] = -row[i].clone();
                }
            }
        }
        let pivot = a[i][i].clone();
        for j in i + 1..n {
            let q = a[i][j].div_floor(&pivot);
            if q.is_zero() {
                continue;
            }
            for mat in [&mut a, &mut u] {
                for row in mat.iter_mut() {
                    let t = &q * &row[i];
                    row[j] -= t;
                }
            }
        }
    }

    Ok(HnfDecomposition { hnf: ExactMatrix::from_int_rows(a)?, transform: ExactMatrix::from_int_rows(u)? })
}

/// Checks the HNF predicate: upper-triangular, `h_ii > h_ij >= 0` for `j > i`.
pub fn is_hnf(h: &ExactMatrix) -> bool {
    if !h.is_square() || !h.is_integer() {
        return false;
    }
    let n = h.rows();
    let zero = BigRational::zero();
    for i in 0..n {
        let d = h.get(i, i);
        if *d <= zero {
            return false;
        }
        for j in 0..n {
            let x = h.get(i, j);
            if (j < i && !x.is_zero()) || (j > i && (*x < zero || x >= d)) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: &[&[i64]]) -> ExactMatrix {
        ExactMatrix::from_i64_rows(rows).unwrap()
    }

    fn check(input: &ExactMatrix) -> HnfDecomposition {
        let d = hnf(input).unwrap();
        assert!(is_hnf(&d.hnf), "not HNF: {:?}", d.hnf);
        assert_eq!(input.mul(&d.transform).unwrap(), d.hnf);
        assert_eq!(determinant(&d.transform).unwrap().abs(), BigInt::one());
        d
    }

    #[test]
    fn identity_is_fixed() {
        let i3 = ExactMatrix::identity(3).unwrap();
        let d = check(&i3);
        assert_eq!(d.hnf, i3);
        assert_eq!(d.transform, i3);
    }

    #[test]
    fn two_by_two_example() {
        let d = check(&m(&[&[2, 0], &[1, 1]]));
        assert_eq!(determinant(&d.hnf).unwrap(), BigInt::from(2));
        assert_eq!(d.hnf, m(&[&[2, 0], &[0, 1]]));
    }

    #[test]
    fn sysnf_is_its_own_hnf() {
        let b = m(&[&[7, 3, 5], &[0, 1, 0], &[0, 0, 1]]);
        assert_eq!(check(&b).hnf, b);
    }

    #[test]
    fn rejects_singular_and_rectangular() {
        assert!(matches!(hnf(&m(&[&[1, 2], &[2, 4]])), Err(Error::Rank(_))));
        assert!(matches!(hnf(&m(&[&[1, 2, 3], &[0, 1, 1]])), Err(Error::Rank(_))));
    }

    fn matrix3() -> impl Strategy<Value = ExactMatrix> {
        proptest::collection::vec(-5i64..=5, 9)
            .prop_map(|v| ExactMatrix::from_i64_rows(&[&v[0..3], &v[3..6], &v[6..9]]).unwrap())
            .prop_filter("full rank", |a| !determinant(a).unwrap().is_zero())
    }

    fn permutation3() -> impl Strategy<Value = ExactMatrix> {
        Just(vec![0usize, 1, 2]).prop_shuffle().prop_map(|p| {
            let mut out = ExactMatrix::zeros(3, 3).unwrap();
            for (j, &i) in p.iter().enumerate() {
                out.set(i, j, BigRational::one());
            }
            out
        })
    }

    /// Random unimodular matrix as a product of elementary column operations.
    fn unimodular3() -> impl Strategy<Value = ExactMatrix> {
        proptest::collection::vec((0usize..3, 0usize..3, -3i64..=3), 1..8).prop_map(|ops| {
            let mut u = ExactMatrix::identity(3).unwrap();
            for (a, b, q) in ops {
                if a == b {
                    continue;
                }
                for r in 0..3 {
                    let v = u.get(r, b) + u.get(r, a) * BigRational::from_integer(q.into());
                    u.set(r, b, v);
                }
            }
            u
        })
    }

    proptest! {
        #[test]
        fn column_permutation_gives_same_hnf(a in matrix3(), p in permutation3()) {
            let h1 = check(&a).hnf;
            let h2 = check(&a.mul(&p).unwrap()).hnf;
            prop_assert_eq!(h1, h2);
        }

        #[test]
        fn unimodular_right_action_gives_same_hnf(a in matrix3(), u in unimodular3()) {
            let h1 = check(&a).hnf;
            let h2 = check(&a.mul(&u).unwrap()).hnf;
            prop_assert_eq!(&h1, &h2);
            prop_assert_eq!(determinant(&h1).unwrap(), determinant(&a).unwrap().abs());
        }
    }
}
