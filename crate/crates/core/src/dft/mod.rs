//! The lattice DFT on `L_N` as a dense unitary.
//!
//! Rows and columns are indexed by the points of `L_N` in lexicographic
//! order of `(x_2, …, x_n)`, and `F[x][z] = e^{-2πi⟨x,z⟩/N} / √(N^{n-1})`.
//! Phases are reduced modulo `N` in integer arithmetic, so the only floating
//! point error is in the final twiddle.

mod checks;
mod export;
mod smooth;

pub use checks::{
    check_fourth_power, check_shift_phase, check_shift_phase_with, classical_multiplicities, eigen_explore,
    spectrum, EigenReport, Eigenspace, FOURTH_ROOTS,
};
pub use smooth::smoothness_estimate;

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sysnf::{enumerate_ln_with_guard, inner_mod, ln_membership, ModVector, SysNFBasis};

/// Default cap on `|L_N|` for dense matrices.
pub const DFT_SIZE_GUARD: u128 = 4096;

/// `e^{-2πi k/N}`.
pub fn twiddle(k: u64, n: u64) -> Complex64 {
    Complex64::from_polar(1.0, -2.0 * PI * (k as f64) / (n as f64))
}

/// `χ_x(z) = e^{-2πi⟨x,z⟩/N}` for `x, z ∈ L_N`.
pub fn character(s: &SysNFBasis, x: &ModVector, z: &ModVector) -> Result<Complex64> {
    for p in [x, z] {
        if !ln_membership(s, p)? {
            return Err(Error::Membership(format!("{:?} is not in L_N", p.coords())));
        }
    }
    Ok(twiddle(x.inner(z), x.modulus()))
}

/// Lookup from points of `L_N` to their index, via the tail `(x_2, …, x_n)`.
fn tail_index(n: u64, x: &ModVector) -> usize {
    x.coords()[1..].iter().fold(0usize, |acc, &c| acc * n as usize + c as usize)
}

#[derive(Clone, Debug)]
pub struct CharacterMatrix {
    basis: SysNFBasis,
    index: Vec<ModVector>,
    /// Row-major, `order × order`.
    entries: Vec<Complex64>,
}

impl CharacterMatrix {
    pub fn basis(&self) -> &SysNFBasis {
        &self.basis
    }

    /// `|L_N|`.
    pub fn order(&self) -> usize {
        self.index.len()
    }

    pub fn index(&self) -> &[ModVector] {
        &self.index
    }

    /// Position of `x ∈ L_N` in the index.
    pub fn position(&self, x: &ModVector) -> Result<usize> {
        if !ln_membership(&self.basis, x)? {
            return Err(Error::Membership(format!("{:?} is not in L_N", x.coords())));
        }
        Ok(tail_index(x.modulus(), x))
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.order() + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn to_dmatrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.order(), self.order(), &self.entries)
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        let m = self.order();
        if v.len() != m {
            return Err(Error::Dimension(format!("vector of length {} against order {m}", v.len())));
        }
        Ok(self
            .entries
            .par_chunks(m)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `‖F†F - I‖_max`.
    pub fn unitarity_deviation(&self) -> f64 {
        let f = self.to_dmatrix();
        let g = f.adjoint() * &f;
        max_deviation_from_identity(&g)
    }
}

pub(crate) fn max_deviation_from_identity(g: &DMatrix<Complex64>) -> f64 {
    let mut worst = 0f64;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let want = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            worst = worst.max((g[(i, j)] - want).norm());
        }
    }
    worst
}

/// Dense DFT matrix, refusing `|L_N| > 4096`.
pub fn dft_matrix(s: &SysNFBasis) -> Result<CharacterMatrix> {
    dft_matrix_with_guard(s, DFT_SIZE_GUARD)
}

/// Dense DFT matrix with an explicit size guard. The basis is not
/// re-validated, so coprimality-violating instances can be built as
/// negative controls.
pub fn dft_matrix_with_guard(s: &SysNFBasis, guard: u128) -> Result<CharacterMatrix> {
    let index = enumerate_ln_with_guard(s, guard)?;
    let m = index.len();
    let n = s.word_modulus()?;
    let norm = 1.0 / (m as f64).sqrt();
    let mut entries = vec![Complex64::new(0.0, 0.0); m * m];
    entries.par_chunks_mut(m).enumerate().for_each(|(i, row)| {
        let x = index[i].coords();
        for (cell, z) in row.iter_mut().zip(&index) {
            *cell = twiddle(inner_mod(n, x, z.coords()), n) * norm;
        }
    });
    Ok(CharacterMatrix { basis: s.clone(), index, entries })
}

/// A complex function on `L_N`, in the index order of the DFT matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeFunction {
    basis: SysNFBasis,
    values: Vec<Complex64>,
}

impl LatticeFunction {
    pub fn new(basis: &SysNFBasis, values: Vec<Complex64>) -> Result<Self> {
        let order = basis.ln_order().unwrap_or(u128::MAX);
        if values.len() as u128 != order {
            return Err(Error::Dimension(format!("{} values for |L_N| = {order}", values.len())));
        }
        Ok(Self { basis: basis.clone(), values })
    }

    /// The indicator of `0 ∈ L_N`.
    pub fn delta_zero(basis: &SysNFBasis) -> Result<Self> {
        let order = basis.ln_order().ok_or(Error::SizeGuard { size: u128::MAX, guard: DFT_SIZE_GUARD })?;
        let mut values = vec![Complex64::new(0.0, 0.0); order as usize];
        values[0] = Complex64::new(1.0, 0.0);
        Self::new(basis, values)
    }

    pub fn basis(&self) -> &SysNFBasis {
        &self.basis
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// The value at `x ∈ L_N`.
    pub fn at(&self, x: &ModVector) -> Result<Complex64> {
        if !ln_membership(&self.basis, x)? {
            return Err(Error::Membership(format!("{:?} is not in L_N", x.coords())));
        }
        Ok(self.values[tail_index(x.modulus(), x)])
    }
}

/// `F·f` through the dense matrix.
pub fn apply_dft(s: &SysNFBasis, f: &LatticeFunction) -> Result<LatticeFunction> {
    if f.basis() != s {
        return Err(Error::Dimension("function lives on a different basis".into()));
    }
    let m = dft_matrix(s)?;
    LatticeFunction::new(s, m.mul_vec(f.values())?)
}

/// A complex function on all of `Z_N^n`, row-major with `x_1` most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    modulus: u64,
    dim: usize,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(modulus: u64, dim: usize, values: Vec<Complex64>) -> Result<Self> {
        let size = (modulus as u128).checked_pow(dim as u32);
        if size != Some(values.len() as u128) {
            return Err(Error::Dimension(format!("{} values for a {modulus}^{dim} grid", values.len())));
        }
        Ok(Self { modulus, dim, values })
    }

    /// Tabulates `f` over the grid.
    pub fn from_fn(modulus: u64, dim: usize, f: impl Fn(&ModVector) -> Complex64) -> Result<Self> {
        let size = (modulus as usize).pow(dim as u32);
        let values = (0..size).map(|i| f(&ModVector::from_index(modulus, dim, i))).collect();
        Self::new(modulus, dim, values)
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn at(&self, x: &ModVector) -> Complex64 {
        self.values[x.index()]
    }

    /// Extends a function on `L_N` by zero.
    pub fn extend(f: &LatticeFunction) -> Result<Self> {
        let s = f.basis();
        let n = s.word_modulus()?;
        let dim = s.dim();
        let points = enumerate_ln_with_guard(s, DFT_SIZE_GUARD)?;
        let mut values = vec![Complex64::new(0.0, 0.0); (n as usize).pow(dim as u32)];
        for (p, v) in points.iter().zip(f.values()) {
            values[p.index()] = *v;
        }
        Self::new(n, dim, values)
    }

    /// Restricts to `L_N`, in the DFT index order.
    pub fn restrict(&self, s: &SysNFBasis) -> Result<LatticeFunction> {
        if s.word_modulus()? != self.modulus || s.dim() != self.dim {
            return Err(Error::Dimension("grid and basis disagree".into()));
        }
        let points = enumerate_ln_with_guard(s, DFT_SIZE_GUARD)?;
        LatticeFunction::new(s, points.iter().map(|p| self.at(p)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(n: u64, b: &[u64]) -> SysNFBasis {
        SysNFBasis::from_small(n, b).unwrap()
    }

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn character_examples() {
        let s = basis(5, &[1]);
        let one = ModVector::new(5, &[1, 1]);
        let zero = ModVector::zero(5, 2);
        assert!(close(character(&s, &zero, &one).unwrap(), Complex64::new(1.0, 0.0)));
        assert!(close(character(&s, &one, &one).unwrap(), Complex64::from_polar(1.0, -4.0 * PI / 5.0)));
        let a = ModVector::new(5, &[2, 2]);
        let b = ModVector::new(5, &[4, 4]);
        assert!(close(character(&s, &a, &b).unwrap(), character(&s, &b, &a).unwrap()));
        assert!(matches!(character(&s, &ModVector::new(5, &[1, 0]), &one), Err(Error::Membership(_))));
    }

    #[test]
    fn entries_have_uniform_modulus() {
        let m = dft_matrix(&basis(7, &[1, 3])).unwrap();
        let want = 1.0 / 7.0;
        assert!(m.entries().iter().all(|e| (e.norm() - want).abs() < 1e-12));
        assert_eq!(m.order(), 49);
    }

    #[test]
    fn zero_b_is_tensor_dft() {
        let n = 4u64;
        let m = dft_matrix(&basis(n, &[0, 0])).unwrap();
        for (i, x) in m.index().iter().enumerate() {
            for (j, z) in m.index().iter().enumerate() {
                let k = (x.coords()[1] * z.coords()[1] + x.coords()[2] * z.coords()[2]) % n;
                assert!(close(m.entry(i, j), twiddle(k, n) / 4.0));
            }
        }
    }

    #[test]
    fn five_point_example_is_unitary() {
        let m = dft_matrix(&basis(5, &[1])).unwrap();
        for t in 0..5usize {
            for u in 0..5usize {
                let want = twiddle((2 * t * u % 5) as u64, 5) / 5f64.sqrt();
                assert!(close(m.entry(t, u), want));
            }
        }
        assert!(m.unitarity_deviation() < 1e-12);
    }

    #[test]
    fn invalid_basis_is_not_unitary() {
        let bad = SysNFBasis::from_parts_unchecked(4.into(), vec![1.into()]).unwrap();
        let m = dft_matrix(&bad).unwrap();
        // rows for t = 0 and t = 2 coincide
        for j in 0..4 {
            assert!(close(m.entry(0, j), m.entry(2, j)));
        }
        assert!(m.unitarity_deviation() >= 0.5);
    }

    #[test]
    fn size_guard() {
        let s = basis(65, &[0, 0]);
        assert!(matches!(dft_matrix(&s), Err(Error::SizeGuard { .. })));
    }

    #[test]
    fn delta_and_constant_are_dual() {
        let s = basis(9, &[2]);
        let d = LatticeFunction::delta_zero(&s).unwrap();
        let fd = apply_dft(&s, &d).unwrap();
        assert!(fd.values().iter().all(|v| close(*v, Complex64::new(1.0 / 3.0, 0.0))));
        let back = apply_dft(&s, &fd).unwrap();
        assert!(close(back.values()[0], Complex64::new(1.0, 0.0)));
        assert!(back.values()[1..].iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn extend_restrict_round_trip() {
        let s = basis(5, &[1, 2]);
        let vals: Vec<_> = (0..25).map(|i| Complex64::new(i as f64, -(i as f64))).collect();
        let f = LatticeFunction::new(&s, vals).unwrap();
        let g = GridFunction::extend(&f).unwrap();
        assert_eq!(g.restrict(&s).unwrap(), f);
        let x = ModVector::new(5, &[(3 + 2 * 4) % 5, 3, 4]);
        assert_eq!(f.at(&x).unwrap(), Complex64::new(19.0, -19.0));
    }
}
