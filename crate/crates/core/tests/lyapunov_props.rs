use cocycle_lab::cocycle::{AdjointCocycle, LocallyConstantCocycle};
use cocycle_lab::linalg::Mat;
use cocycle_lab::lyapunov::{estimate_spectrum, flag_estimate, periodic_spectrum};
use cocycle_lab::markov::MarkovMeasure;
use cocycle_lab::multilinear::grassmann_distance;
use cocycle_lab::symbolic::{periodic_orbits, SubshiftSpec, Symbol};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn code(w: &[Symbol]) -> usize {
    w.iter().fold(0, |acc, &s| 2 * acc + s as usize)
}

fn random_table(d: usize, seed: u64) -> Vec<DMatrix<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..8)
        .map(|_| DMatrix::from_fn(d, d, |i, j| {
            let g: f64 = StandardNormal.sample(&mut rng);
            if i == j { 1.5 + 0.3 * g } else { 0.3 * g }
        }))
        .collect()
}

fn window_one(d: usize, seed: u64) -> LocallyConstantCocycle<f64> {
    let table = random_table(d, seed);
    LocallyConstantCocycle::from_matrix_fn(SubshiftSpec::full_shift(2), 1, |w| table[code(w)].clone()).unwrap()
}

fn rotation(t: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()])
}

fn fair() -> MarkovMeasure<f64> {
    MarkovMeasure::bernoulli(vec![0.5, 0.5]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn exponents_sum_to_the_log_determinant(d in 2usize..4, seed in any::<u64>()) {
        let c = window_one(d, seed);
        let est = estimate_spectrum(&c, &fair(), 2000, seed).unwrap();
        let sum: f64 = est.exponents.iter().sum();
        prop_assert!((sum - est.log_det_average).abs() <= 1e-8);
        prop_assert!(est.exponents.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn spectrum_is_conjugation_invariant(seed in any::<u64>(), shear in -2.0f64..2.0) {
        let c = window_one(2, seed);
        let conj = Mat::from_f64(&DMatrix::from_row_slice(2, 2, &[1.0, shear, 0.0, 1.0]));
        let k = c.conjugated(&conj).unwrap();
        let a = estimate_spectrum(&c, &fair(), 2000, seed).unwrap();
        let b = estimate_spectrum(&k, &fair(), 2000, seed).unwrap();
        for i in 0..2 {
            prop_assert!((a.exponents[i] - b.exponents[i]).abs() < 3.0 * a.standard_errors[i].max(b.standard_errors[i]));
        }
    }

    #[test]
    fn adjoint_over_the_reversed_measure_has_the_same_spectrum(seed in any::<u64>()) {
        let c = window_one(2, seed);
        let mu = MarkovMeasure::new(SubshiftSpec::full_shift(2), vec![vec![0.3, 0.7], vec![0.6, 0.4]]).unwrap();
        let a = estimate_spectrum(&c, &mu, 20_000, seed).unwrap();
        let b = estimate_spectrum(&AdjointCocycle::new(&c), &mu.reversed(), 20_000, seed ^ 1).unwrap();
        for i in 0..2 {
            let se = a.standard_errors[i].hypot(b.standard_errors[i]);
            prop_assert!((a.exponents[i] - b.exponents[i]).abs() < 3.0 * se, "{:?} vs {:?}", a, b);
        }
    }

    #[test]
    fn reduced_stable_flags_ignore_the_past(seed in any::<u64>(), depth in 0usize..6) {
        let c = LocallyConstantCocycle::from_matrix_fn(SubshiftSpec::full_shift(2), 1, |w| {
            rotation(0.4 * code(w) as f64) * DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5])
        })
        .unwrap();
        let cert = c.certify_bunching(3.0);
        let r = c.reduce_default(&cert).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = fair().sample_orbit_with(201, &mut rng);
        let y = fair().sample_stable_partner(&x, depth, &mut rng);
        let fx = flag_estimate(&r, &x, 1, 40).unwrap();
        let fy = flag_estimate(&r, &y, 1, 40).unwrap();
        prop_assert!(grassmann_distance(&fx.s_dk, &fy.s_dk).unwrap() <= 1e-12);
    }
}

#[test]
fn periodic_orbits_approximate_the_top_exponent() {
    let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]);
    let c = LocallyConstantCocycle::from_matrices(SubshiftSpec::full_shift(2), &[a.clone(), rotation(1.0) * a]).unwrap();
    let lambda = estimate_spectrum(&c, &fair(), 100_000, 3).unwrap().exponents[0];
    let best = periodic_orbits(&SubshiftSpec::full_shift(2), 12)
        .iter()
        .map(|p| (periodic_spectrum(&c, p).unwrap()[0] - lambda).abs())
        .fold(f64::INFINITY, f64::min);
    assert!(best < 0.05, "closest periodic exponent is {best:.4} away");
}

#[test]
fn determinant_one_spectra_are_balanced() {
    let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 1.0]);
    let b = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
    let c = LocallyConstantCocycle::from_matrices(SubshiftSpec::full_shift(2), &[a, b]).unwrap();
    let est = estimate_spectrum(&c, &fair(), 10_000, 4).unwrap();
    assert!((est.exponents[0] + est.exponents[1]).abs() <= est.standard_errors[0] + 1e-10);
}
