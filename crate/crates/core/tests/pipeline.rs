//! Cross-module checks: reduction feeds the transform, the circuit agrees
//! with the character sums, and the sampler lands on the input lattice.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;

use latdft::dft::{apply_dft, dft_matrix, LatticeFunction};
use latdft::intlat::{hnf, membership, ExactMatrix};
use latdft::oracle::{dft_then_restrict, relative_l2};
use latdft::qcirc::{qft_on_lattice_sparse, simulate_sysnf_qft, Statevector};
use latdft::sampler::{constant_spec, run_experiment, sample, SpecConfig};
use latdft::selftest::random_basis;
use latdft::sysnf::{enumerate_ln, reduce_to_sysnf, validate, ReductionCertificate, SysNFBasis};

fn random_function(rng: &mut ChaCha20Rng, len: usize) -> Vec<Complex64> {
    (0..len).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

#[test]
fn three_routes_to_the_lattice_dft_agree() {
    let mut rng = ChaCha20Rng::seed_from_u64(21);
    for (n, b) in [(5u64, vec![1u64]), (8, vec![2]), (7, vec![1, 3]), (3, vec![1, 1, 1])] {
        let s = SysNFBasis::from_small(n, &b).unwrap();
        let lattice = enumerate_ln(&s).unwrap();
        let values = random_function(&mut rng, lattice.len());
        let f = LatticeFunction::new(&s, values.clone()).unwrap();

        let direct = apply_dft(&s, &f).unwrap();
        let oracle = dft_then_restrict(&s, &f).unwrap();
        let points: Vec<_> = lattice.iter().cloned().zip(values.iter().copied()).collect();
        let sparse = qft_on_lattice_sparse(&s, &points, 1 << 20).unwrap();

        let mut dense_in = Statevector::zeros(n, s.dim()).unwrap();
        let mut amps = dense_in.amps().to_vec();
        for (x, a) in &points {
            amps[x.index()] = *a;
        }
        dense_in = Statevector::new(n, s.dim(), amps).unwrap();
        let dense = simulate_sysnf_qft(&s, &dense_in).unwrap();
        let dense_on: Vec<Complex64> = lattice.iter().map(|z| dense.amp(z)).collect();

        assert!(relative_l2(direct.values(), oracle.values()).unwrap() < 1e-10);
        assert!(relative_l2(direct.values(), &sparse).unwrap() < 1e-10);
        assert!(relative_l2(direct.values(), &dense_on).unwrap() < 1e-10);
    }
}

#[test]
fn reduced_small_lattice_yields_a_unitary_transform() {
    // a lattice with tiny determinant and coarse epsilon keeps N small
    let b = ExactMatrix::from_i64_rows(&[[1, 0], [0, 3]]).unwrap();
    let cert = reduce_to_sysnf(&b, &BigRational::new(1.into(), 2.into())).unwrap();
    cert.verify().unwrap();
    let s = validate(&cert.bprime.to_matrix()).unwrap();
    if s.ln_order().unwrap() <= 4096 {
        assert!(dft_matrix(&s).unwrap().unitarity_deviation() < 1e-10);
    }
}

#[test]
fn constant_spec_recovers_the_origin_on_a_reduced_lattice() {
    let b = ExactMatrix::from_i64_rows(&[[2, 1], [0, 1]]).unwrap();
    let out = sample(&constant_spec(f64::INFINITY).unwrap(), &b, &BigRational::new(1.into(), 2.into()), 50, 3).unwrap();
    // roundoff leaves other points with negligible mass
    assert!((out.distribution.probability_of(&[0, 0]) - 1.0).abs() < 1e-9);
    let stray: f64 = out.distribution.probabilities().iter().sum::<f64>() - out.distribution.probability_of(&[0, 0]);
    assert!(stray < 1e-9);
    assert!(out.samples.iter().all(|x| x == &vec![0, 0]));
}

#[test]
fn gaussian_sampling_is_deterministic_and_on_lattice() {
    let b = ExactMatrix::from_i64_rows(&[[2, 1], [0, 1]]).unwrap();
    let spec = SpecConfig { kind: "gaussian".into(), s: Some(16.0), grid_radius: None };
    let eps = BigRational::new(1.into(), 16.into());
    let (a, report) = run_experiment(&b, &spec, &eps, 100, 77).unwrap();
    let (c, _) = run_experiment(&b, &spec, &eps, 100, 77).unwrap();
    assert_eq!(a.samples, c.samples);
    assert_eq!(a.distribution, c.distribution);
    let total: f64 = a.distribution.probabilities().iter().sum();
    assert!((total - 1.0).abs() < 1e-10);
    for x in a.distribution.support().iter().take(2000) {
        let v: Vec<BigInt> = x.iter().map(|&c| BigInt::from(c)).collect();
        assert!(membership(&b, &v).unwrap());
    }
    assert!(report.tv_distance <= 0.05);
    assert_eq!(report.decode_mismatch_rate, 0.0);
}

#[test]
fn unknown_spec_kind_is_rejected() {
    let b = ExactMatrix::from_i64_rows(&[[2, 1], [0, 1]]).unwrap();
    let spec = SpecConfig { kind: "laplace".into(), s: Some(1.0), grid_radius: None };
    assert!(run_experiment(&b, &spec, &BigRational::new(1.into(), 16.into()), 1, 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn certificates_survive_json_and_preserve_the_lattice(seed in any::<u64>(), dim in 2usize..=3) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let b = random_basis(&mut rng, dim, 9);
        let cert = reduce_to_sysnf(&b, &BigRational::new(1.into(), 16.into())).unwrap();
        let back = ReductionCertificate::from_json(&cert.to_json().unwrap()).unwrap();
        prop_assert_eq!(&back, &cert);
        back.verify().unwrap();
        // sigma maps L(B) onto L(B'): images of the columns generate the same HNF
        let cols: Vec<Vec<BigInt>> = (0..dim).map(|j| cert.map(&b.int_column(j).unwrap()).unwrap()).collect();
        let cols: Vec<Vec<BigRational>> = cols.into_iter().map(|c| c.into_iter().map(BigRational::from_integer).collect()).collect();
        let image = ExactMatrix::from_columns(&cols).unwrap();
        prop_assert_eq!(hnf(&image).unwrap().hnf, hnf(&cert.bprime.to_matrix()).unwrap().hnf);
    }
}
