use serde::{Deserialize, Serialize};

/// A vector of `Z_N^n`, coordinates kept in `[0, N)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModVector {
    modulus: u64,
    coords: Vec<u64>,
}

impl ModVector {
    /// Reduces arbitrary signed coordinates modulo `modulus`.
    pub fn new(modulus: u64, coords: &[i64]) -> Self {
        assert!(modulus > 0, "modulus must be positive");
        let m = modulus as i128;
        let coords = coords.iter().map(|&c| (c as i128).rem_euclid(m) as u64).collect();
        Self { modulus, coords }
    }

    /// Wraps coordinates that are already in `[0, modulus)`.
    pub fn from_reduced(modulus: u64, coords: Vec<u64>) -> Self {
        debug_assert!(coords.iter().all(|&c| c < modulus));
        Self { modulus, coords }
    }

    pub fn zero(modulus: u64, dim: usize) -> Self {
        Self { modulus, coords: vec![0; dim] }
    }

    /// Decodes a row-major index of `Z_N^dim`, first coordinate most significant.
    pub fn from_index(modulus: u64, dim: usize, mut index: usize) -> Self {
        let mut coords = vec![0u64; dim];
        for c in coords.iter_mut().rev() {
            *c = index as u64 % modulus;
            index /= modulus as usize;
        }
        Self { modulus, coords }
    }

    pub fn index(&self) -> usize {
        self.coords.iter().fold(0usize, |acc, &c| acc * self.modulus as usize + c as usize)
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    fn zip_with(&self, other: &Self, f: impl Fn(u64, u64) -> u64) -> Self {
        assert_eq!(self.modulus, other.modulus, "modulus mismatch");
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        let coords = self.coords.iter().zip(&other.coords).map(|(&a, &b)| f(a, b)).collect();
        Self { modulus: self.modulus, coords }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.modulus;
        self.zip_with(other, |a, b| ((a as u128 + b as u128) % n as u128) as u64)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.modulus;
        self.zip_with(other, |a, b| ((a as u128 + n as u128 - b as u128) % n as u128) as u64)
    }

    pub fn neg(&self) -> Self {
        let n = self.modulus;
        Self { modulus: n, coords: self.coords.iter().map(|&a| (n - a) % n).collect() }
    }

    /// `⟨self, other⟩ mod N`.
    pub fn inner(&self, other: &Self) -> u64 {
        assert_eq!(self.modulus, other.modulus, "modulus mismatch");
        inner_mod(self.modulus, &self.coords, &other.coords)
    }

    /// Representatives in `(-N/2, N/2]`.
    pub fn centered(&self) -> Vec<i64> {
        self.coords.iter().map(|&c| center(c, self.modulus)).collect()
    }
}

/// `⟨a, b⟩ mod n` for reduced coordinates.
pub fn inner_mod(n: u64, a: &[u64], b: &[u64]) -> u64 {
    let n = n as u128;
    a.iter().zip(b).fold(0u128, |acc, (&x, &y)| (acc + x as u128 * y as u128 % n) % n) as u64
}

/// The representative of `c mod n` in `(-n/2, n/2]`.
pub fn center(c: u64, n: u64) -> i64 {
    if c > n / 2 {
        c as i64 - n as i64
    } else {
        c as i64
    }
}

/// Inverse of `a` modulo `n`, if it exists.
pub fn mod_inverse(a: u64, n: u64) -> Option<u64> {
    if n == 1 {
        return Some(0);
    }
    let (mut r0, mut r1) = (n as i128, (a % n) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    (r0 == 1).then(|| t0.rem_euclid(n as i128) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reduction_and_centering() {
        let v = ModVector::new(5, &[-1, 7, 0]);
        assert_eq!(v.coords(), &[4, 2, 0]);
        assert_eq!(v.centered(), vec![-1, 2, 0]);
        assert_eq!(ModVector::new(4, &[2]).centered(), vec![2]);
    }

    #[test]
    fn index_round_trip() {
        for i in 0..125 {
            assert_eq!(ModVector::from_index(5, 3, i).index(), i);
        }
        assert_eq!(ModVector::from_index(5, 2, 7).coords(), &[1, 2]);
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(mod_inverse(2, 5), Some(3));
        assert_eq!(mod_inverse(2, 4), None);
        assert_eq!(mod_inverse(0, 1), Some(0));
    }

    proptest! {
        #[test]
        fn group_laws(n in 1u64..50, a in proptest::collection::vec(-100i64..100, 3), b in proptest::collection::vec(-100i64..100, 3)) {
            let x = ModVector::new(n, &a);
            let y = ModVector::new(n, &b);
            prop_assert_eq!(x.add(&y).sub(&y), x.clone());
            prop_assert_eq!(x.add(&x.neg()), ModVector::zero(n, 3));
            let want = a.iter().zip(&b).map(|(p, q)| p * q).sum::<i64>().rem_euclid(n as i64) as u64;
            prop_assert_eq!(x.inner(&y), want);
        }

        #[test]
        fn inverse_is_inverse(n in 2u64..1000, a in 0u64..1000) {
            match mod_inverse(a, n) {
                Some(i) => prop_assert_eq!(a % n * i % n, 1),
                None => prop_assert!(num_integer::gcd(a, n) != 1),
            }
        }
    }
}
