use nalgebra::{linalg::Schur, DMatrix, DVector};
use num_complex::Complex64;

use super::{dft_matrix, max_deviation_from_identity, twiddle, CharacterMatrix};
use crate::error::{Error, Result};
use crate::sysnf::{ln_membership, ModVector, SysNFBasis};

/// The fourth roots of unity with labels, in reporting order.
pub const FOURTH_ROOTS: [(&str, Complex64); 4] = [
    ("1", Complex64::new(1.0, 0.0)),
    ("-1", Complex64::new(-1.0, 0.0)),
    ("-i", Complex64::new(0.0, -1.0)),
    ("i", Complex64::new(0.0, 1.0)),
];

/// `‖F∘U_v - W_v∘F‖_max` with `U_v|x⟩ = |x+v⟩` and `W_v|z⟩ = e^{-2πi⟨v,z⟩/N}|z⟩`.
pub fn check_shift_phase(s: &SysNFBasis, v: &ModVector) -> Result<f64> {
    check_shift_phase_with(&dft_matrix(s)?, v)
}

/// As [`check_shift_phase`], reusing a prebuilt matrix.
pub fn check_shift_phase_with(f: &CharacterMatrix, v: &ModVector) -> Result<f64> {
    let s = f.basis();
    if !ln_membership(s, v)? {
        return Err(Error::Membership(format!("shift {:?} is not in L_N", v.coords())));
    }
    let n = v.modulus();
    let mut worst = 0f64;
    for (col, x) in f.index().iter().enumerate() {
        let shifted = f.position(&x.add(v))?;
        for (row, z) in f.index().iter().enumerate() {
            let lhs = f.entry(row, shifted);
            let rhs = twiddle(v.inner(z), n) * f.entry(row, col);
            worst = worst.max((lhs - rhs).norm());
        }
    }
    Ok(worst)
}

fn negation_permutation(f: &CharacterMatrix) -> Result<DMatrix<Complex64>> {
    let m = f.order();
    let mut p = DMatrix::zeros(m, m);
    for (i, x) in f.index().iter().enumerate() {
        p[(f.position(&x.neg())?, i)] = Complex64::new(1.0, 0.0);
    }
    Ok(p)
}

fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `(‖F² - P_neg‖_max, ‖F⁴ - I‖_max)` where `P_neg|x⟩ = |-x⟩`.
pub fn check_fourth_power(s: &SysNFBasis) -> Result<(f64, f64)> {
    let f = dft_matrix(s)?;
    let fm = f.to_dmatrix();
    let f2 = &fm * &fm;
    let f4 = &f2 * &f2;
    Ok((max_abs_diff(&f2, &negation_permutation(&f)?), max_deviation_from_identity(&f4)))
}

/// Eigenvalues of `F` from a complex Schur decomposition.
pub fn spectrum(s: &SysNFBasis) -> Result<Vec<Complex64>> {
    let fm = dft_matrix(s)?.to_dmatrix();
    let schur = Schur::try_new(fm, 1e-14, 10_000)
        .ok_or_else(|| Error::SearchExhausted("Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

#[derive(Clone, Debug)]
pub struct Eigenspace {
    pub label: &'static str,
    pub eigenvalue: Complex64,
    pub multiplicity: usize,
    /// Orthonormal basis, vectors in the DFT index order.
    pub basis: Vec<Vec<Complex64>>,
    /// `max ‖F·v - λ·v‖` over the basis.
    pub max_residual: f64,
}

#[derive(Clone, Debug)]
pub struct EigenReport {
    pub order: usize,
    pub spaces: Vec<Eigenspace>,
}

impl EigenReport {
    /// Multiplicities in [`FOURTH_ROOTS`] order.
    pub fn multiplicities(&self) -> [usize; 4] {
        let mut out = [0; 4];
        for (o, sp) in out.iter_mut().zip(&self.spaces) {
            *o = sp.multiplicity;
        }
        out
    }

    pub fn max_residual(&self) -> f64 {
        self.spaces.iter().map(|s| s.max_residual).fold(0.0, f64::max)
    }
}

/// Pivoted Gram–Schmidt on the columns of `p`, keeping `count` vectors.
fn column_basis(p: &DMatrix<Complex64>, count: usize) -> Vec<DVector<Complex64>> {
    let mut residual: Vec<DVector<Complex64>> = p.column_iter().map(|c| c.into_owned()).collect();
    let mut out: Vec<DVector<Complex64>> = Vec::with_capacity(count);
    while out.len() < count {
        let (best, norm) = residual
            .iter()
            .enumerate()
            .map(|(i, r)| (i, r.norm()))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if norm <= 1e-9 {
            break;
        }
        let q = residual[best].unscale(norm);
        for r in residual.iter_mut() {
            let c = q.dotc(r);
            r.axpy(-c, &q, Complex64::new(1.0, 0.0));
        }
        out.push(q);
    }
    out
}

/// Eigenspaces of `F` via the spectral projectors `P_λ = ¼ Σ_k λ^{-k} F^k`.
pub fn eigen_explore(s: &SysNFBasis) -> Result<EigenReport> {
    let f = dft_matrix(s)?.to_dmatrix();
    let m = f.nrows();
    let mut powers = vec![DMatrix::<Complex64>::identity(m, m)];
    for k in 1..4 {
        powers.push(&powers[k - 1] * &f);
    }
    let mut spaces = Vec::with_capacity(4);
    for (label, lambda) in FOURTH_ROOTS {
        let mut p = DMatrix::<Complex64>::zeros(m, m);
        for (k, fk) in powers.iter().enumerate() {
            p += fk * lambda.conj().powu(k as u32);
        }
        p.scale_mut(0.25);
        let multiplicity = p.trace().re.round().max(0.0) as usize;
        let basis = column_basis(&p, multiplicity);
        let max_residual = basis.iter().map(|v| (&f * v - v * lambda).norm()).fold(0.0, f64::max);
        spaces.push(Eigenspace {
            label,
            eigenvalue: lambda,
            multiplicity,
            basis: basis.into_iter().map(|v| v.iter().copied().collect()).collect(),
            max_residual,
        });
    }
    Ok(EigenReport { order: m, spaces })
}

/// Eigenvalue multiplicities of the classical DFT on `Z_N^registers`, in
/// [`FOURTH_ROOTS`] order.
pub fn classical_multiplicities(n: u64, registers: usize) -> [usize; 4] {
    let m = (n / 4) as usize;
    // counts for (-i)^k, k = 0..4
    let single = match n % 4 {
        0 => [m + 1, m, m, m - 1],
        1 => [m + 1, m, m, m],
        2 => [m + 1, m, m + 1, m],
        _ => [m + 1, m + 1, m + 1, m],
    };
    let mut acc = [1usize, 0, 0, 0];
    for _ in 0..registers {
        let mut next = [0usize; 4];
        for a in 0..4 {
            for b in 0..4 {
                next[(a + b) % 4] += acc[a] * single[b];
            }
        }
        acc = next;
    }
    // exponent order (1, -i, -1, i) to reporting order (1, -1, -i, i)
    [acc[0], acc[2], acc[1], acc[3]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sysnf::enumerate_ln;

    fn basis(n: u64, b: &[u64]) -> SysNFBasis {
        SysNFBasis::from_small(n, b).unwrap()
    }

    #[test]
    fn shift_phase_examples() {
        let s = basis(5, &[1]);
        assert_eq!(check_shift_phase(&s, &ModVector::zero(5, 2)).unwrap(), 0.0);
        assert!(check_shift_phase(&s, &ModVector::new(5, &[1, 1])).unwrap() <= 1e-10);
        assert!(check_shift_phase(&s, &ModVector::new(5, &[1, 0])).is_err());
        let s3 = basis(7, &[1, 3]);
        let f = dft_matrix(&s3).unwrap();
        for v in enumerate_ln(&s3).unwrap().iter().step_by(5) {
            assert!(check_shift_phase_with(&f, v).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn fourth_power_examples() {
        for s in [basis(5, &[1]), basis(6, &[0, 0]), basis(9, &[2])] {
            let (d2, d4) = check_fourth_power(&s).unwrap();
            assert!(d2 <= 1e-10 && d4 <= 1e-10, "{d2} {d4}");
        }
    }

    #[test]
    fn spectrum_is_fourth_roots() {
        let ev = spectrum(&basis(7, &[1, 3])).unwrap();
        assert_eq!(ev.len(), 49);
        for e in ev {
            let d = FOURTH_ROOTS.iter().map(|(_, r)| (e - r).norm()).fold(f64::INFINITY, f64::min);
            assert!(d <= 1e-8, "{e}");
        }
    }

    #[test]
    fn classical_table_small_cases() {
        assert_eq!(classical_multiplicities(1, 1), [1, 0, 0, 0]);
        assert_eq!(classical_multiplicities(2, 1), [1, 1, 0, 0]);
        assert_eq!(classical_multiplicities(3, 1), [1, 1, 1, 0]);
        assert_eq!(classical_multiplicities(4, 1), [2, 1, 1, 0]);
        assert_eq!(classical_multiplicities(5, 0), [1, 0, 0, 0]);
        for n in 1..20u64 {
            for r in 1..3 {
                assert_eq!(classical_multiplicities(n, r).iter().sum::<usize>(), (n as usize).pow(r as u32));
            }
        }
    }

    #[test]
    fn eigenspaces_of_zero_b_match_classical_pattern() {
        for (n, regs) in [(5u64, 1usize), (8, 1), (3, 2), (4, 2)] {
            let s = basis(n, &vec![0; regs]);
            let rep = eigen_explore(&s).unwrap();
            assert_eq!(rep.multiplicities(), classical_multiplicities(n, regs), "N={n}");
            assert!(rep.max_residual() <= 1e-8);
            for sp in &rep.spaces {
                assert_eq!(sp.basis.len(), sp.multiplicity);
            }
        }
    }

    #[test]
    fn eigenspaces_of_general_basis() {
        let rep = eigen_explore(&basis(7, &[1, 3])).unwrap();
        assert_eq!(rep.multiplicities().iter().sum::<usize>(), 49);
        assert!(rep.max_residual() <= 1e-8);
    }
}
