use cocycle_lab::cocycle::{iterate, BunchingCertificate, Cocycle, LocallyConstantCocycle, HOLONOMY_TOL};
use cocycle_lab::linalg::Mat;
use cocycle_lab::markov::MarkovMeasure;
use cocycle_lab::symbolic::{SubshiftSpec, Symbol};
use cocycle_lab::{Rational, Scalar};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn code(w: &[Symbol]) -> usize {
    w.iter().fold(0, |acc, &s| 2 * acc + s as usize)
}

/// Random bunched cocycle `I + scale * G` on the full 2-shift.
fn near_identity(d: usize, window: usize, scale: f64, seed: u64) -> (LocallyConstantCocycle<f64>, BunchingCertificate) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let table: Vec<DMatrix<f64>> = (0..1 << (2 * window + 1))
            .map(|_| DMatrix::identity(d, d) + DMatrix::from_fn(d, d, |_, _| { let g: f64 = StandardNormal.sample(&mut rng); scale * g }))
            .collect();
        let c = LocallyConstantCocycle::from_matrix_fn(SubshiftSpec::full_shift(2), window, |w| table[code(w)].clone()).unwrap();
        let cert = c.certify_bunching(1.0);
        if cert.is_valid() {
            return (c, cert);
        }
    }
}

fn fair() -> MarkovMeasure<f64> {
    MarkovMeasure::bernoulli(vec![0.5, 0.5]).unwrap()
}

fn rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn iterates_compose(seed in any::<u64>(), n in -500i64..500, m in -500i64..500) {
        let (c, _) = near_identity(2, 1, 0.3, seed);
        let x = fair().sample_orbit(2001, seed);
        let whole = iterate(&c, &x, n + m).unwrap();
        let first = iterate(&c, &x, n).unwrap();
        let second = iterate(&c, &x.shifted(n), m).unwrap();
        let prod = &second.matrix * &first.matrix;
        let rescaled = &whole.matrix * (whole.log_scale - second.log_scale - first.log_scale).exp();
        // Opposite signs cancel, so only a normwise bound is meaningful there.
        let reference = if n.signum() * m.signum() < 0 { second.matrix.norm() * first.matrix.norm() } else { rescaled.norm() };
        prop_assert!((prod - &rescaled).norm() <= 1e-12 * reference);
    }

    #[test]
    fn stable_holonomy_axioms(seed in any::<u64>(), window in 1usize..3, d in 2usize..4, depth in 0usize..6) {
        let (c, cert) = near_identity(d, window, 0.1, seed);
        let mu = fair();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = mu.sample_orbit_with(101, &mut rng);
        let y = mu.sample_stable_partner(&x, depth, &mut rng);
        let z = mu.sample_stable_partner(&x, depth + 3, &mut rng);
        prop_assert!(c.stable_holonomy_defects(&cert, &x, &y, &z).unwrap().max() < 1e-10);
    }

    #[test]
    fn exact_holonomies_satisfy_the_axioms_exactly(entries in prop::collection::vec(-2i64..3, 32), seed in any::<u64>()) {
        let spec = SubshiftSpec::full_shift(2);
        let tables: Vec<Mat<Rational>> = entries
            .chunks(4)
            .map(|e| {
                let q = |i: usize, diag: i64| Rational::from_ratio(diag * 10 + e[i], 10);
                Mat::from_rows(&[vec![q(0, 1), q(1, 0)], vec![q(2, 0), q(3, 1)]])
            })
            .collect();
        let built = LocallyConstantCocycle::from_fn(spec, 1, |w| tables[code(w)].clone());
        prop_assume!(built.is_ok());
        let c = built.unwrap();
        let mu = fair();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = mu.sample_orbit_with(41, &mut rng);
        let y = mu.sample_stable_partner(&x, 2, &mut rng);
        let z = mu.sample_stable_partner(&x, 4, &mut rng);
        let h = |a, b| c.stable_holonomy_exact(a, b).unwrap();
        prop_assert_eq!(h(&x, &x), Mat::identity(2));
        prop_assert_eq!(h(&y, &z).mul(&h(&x, &y)), h(&x, &z));
        let (sx, sy) = (x.shifted(1), y.shifted(1));
        let ax = c.exact_matrix_at_index(&x, 0).unwrap();
        let ay = c.exact_matrix_at_index(&y, 0).unwrap();
        prop_assert_eq!(h(&sy, &sx).mul(&ay).mul(&h(&x, &y)), ax);
        let hu = c.unstable_holonomy_exact(&x, &x).unwrap();
        prop_assert_eq!(hu, Mat::identity(2));
    }

    #[test]
    fn global_holonomy_is_stable_past_the_merge_time(seed in any::<u64>(), extra in 1i64..20) {
        let (c, cert) = near_identity(2, 1, 0.2, seed);
        let mu = fair();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = mu.sample_orbit_with(201, &mut rng);
        let y = mu.sample_stable_partner(&x.shifted(5), 0, &mut rng).shifted(-5);
        let n = x.stable_merge_time(&y).unwrap().max(0);
        let at_n = c.global_stable_holonomy_at(&cert, &x, &y, n, HOLONOMY_TOL).unwrap().matrix;
        let later = c.global_stable_holonomy_at(&cert, &x, &y, 2 * n + extra, HOLONOMY_TOL).unwrap().matrix;
        prop_assert!(rel(&later, &at_n) < 1e-12);
    }

    #[test]
    fn reduced_cocycle_is_constant_on_stable_leaves(seed in any::<u64>(), depth in 0usize..8) {
        let (c, cert) = near_identity(2, 1, 0.2, seed);
        let r = c.reduce_default(&cert).unwrap();
        let mu = fair();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = mu.sample_orbit_with(101, &mut rng);
        let y = mu.sample_stable_partner(&x, depth, &mut rng);
        prop_assert!(rel(&r.matrix_at(&y).unwrap(), &r.matrix_at(&x).unwrap()) < 1e-10);
    }

    #[test]
    fn conjugation_conjugates_holonomies(seed in any::<u64>()) {
        let (c, cert) = near_identity(2, 1, 0.1, seed);
        let conj = Mat::<f64>::from_f64(&DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.0, 1.0]));
        let k = c.conjugated(&conj).unwrap();
        let kc = k.certify_bunching(1.0);
        prop_assume!(kc.is_valid() && cert.is_valid());
        let mu = fair();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = mu.sample_orbit_with(101, &mut rng);
        let y = mu.sample_stable_partner(&x, 2, &mut rng);
        let h = c.stable_holonomy(&cert, &x, &y, HOLONOMY_TOL).unwrap().matrix;
        let hk = k.stable_holonomy(&kc, &x, &y, HOLONOMY_TOL).unwrap().matrix;
        let cm = conj.to_f64();
        let expected = cm.clone().try_inverse().unwrap() * h * cm;
        prop_assert!(rel(&hk, &expected) < 1e-12);
    }
}

#[test]
fn unbunched_cocycles_have_no_holonomy() {
    let a = DMatrix::from_row_slice(2, 2, &[10.0, 0.0, 0.0, 0.1]);
    let b = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
    let c = LocallyConstantCocycle::from_matrices(SubshiftSpec::full_shift(2), &[a, b]).unwrap();
    let cert = c.certify_bunching(1.0);
    assert!(!cert.is_valid());
    let x = fair().sample_orbit(41, 1);
    assert!(c.stable_holonomy(&cert, &x, &x, HOLONOMY_TOL).is_err());
}

#[test]
fn short_products_match_direct_multiplication() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let gens: Vec<DMatrix<f64>> = (0..2)
        .map(|_| DMatrix::from_fn(3, 3, |_, _| -> f64 { StandardNormal.sample(&mut rng) }))
        .collect();
    let c = LocallyConstantCocycle::from_matrices(SubshiftSpec::full_shift(2), &gens).unwrap();
    let x = fair().sample_orbit(41, 5);
    let direct = (0..7).fold(DMatrix::identity(3, 3), |p, i| c.matrix_at_index(&x, i).unwrap() * p);
    let split = iterate(&c, &x.shifted(4), 3).unwrap().value() * iterate(&c, &x, 4).unwrap().value();
    assert!(rel(&split, &direct) < 1e-12);
    assert!(rel(&iterate(&c, &x, 7).unwrap().value(), &direct) < 1e-12);
}

#[test]
fn iterate_of_zero_is_identity() {
    let (c, _) = near_identity(3, 1, 0.3, 9);
    let x = fair().sample_orbit(41, 9);
    let it = iterate(&c, &x, 0).unwrap();
    assert_eq!(it.value(), DMatrix::identity(c.dim(), c.dim()));
}
