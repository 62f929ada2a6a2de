use cocycle_lab::multilinear::{
    arrangement_invariance_check, grassmann_distance, hyperplane_section, qp_apply, quasi_projective_from, subsets,
    GrassmannPoint, KVector, LinearArrangement, LinearSection,
};
use cocycle_lab::{Rational, Scalar};
use nalgebra::DMatrix;
use num_traits::Zero;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rational_kvector(k: usize, d: usize) -> impl Strategy<Value = KVector<Rational>> {
    let n = subsets(k, d).len();
    prop::collection::vec(-5i64..6, n).prop_map(move |c| {
        KVector::from_coefficients(k, d, c.into_iter().map(|v| Rational::from_ratio(v, 1)).collect()).unwrap()
    })
}

fn degrees() -> impl Strategy<Value = (usize, usize, usize)> {
    (2usize..6).prop_flat_map(|d| (Just(d), 0..=d)).prop_flat_map(|(d, p)| (Just(d), Just(p), 0..=d - p))
}

fn forms() -> impl Strategy<Value = (usize, usize, KVector<Rational>, KVector<Rational>, KVector<Rational>)> {
    degrees().prop_flat_map(|(d, p, q)| (Just(p), Just(q), rational_kvector(p, d), rational_kvector(q, d), rational_kvector(q, d)))
}

fn permutation(perm: &[usize]) -> DMatrix<f64> {
    let d = perm.len();
    DMatrix::from_fn(d, d, |i, j| if perm[j] == i { 1.0 } else { 0.0 })
}

proptest! {
    #[test]
    fn wedge_is_graded_anticommutative((p, q, a, b, c) in forms()) {
        let ab = a.wedge(&b).unwrap();
        let ba = b.wedge(&a).unwrap();
        let sign = if (p * q) % 2 == 0 { ab.clone() } else { ab.scale(&Rational::from_ratio(-1, 1)) };
        prop_assert_eq!(ba, sign);
        let lhs = a.wedge(&b.add(&c).unwrap()).unwrap();
        let rhs = ab.add(&a.wedge(&c).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn grassmann_distance_is_symmetric(d in 2usize..7, k in 1usize..6, seed in any::<u64>()) {
        prop_assume!(k < d);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = GrassmannPoint::random(k, d, &mut rng);
        let w = GrassmannPoint::random(k, d, &mut rng);
        let (vw, wv) = (grassmann_distance(&v, &w).unwrap(), grassmann_distance(&w, &v).unwrap());
        prop_assert!((vw - wv).abs() <= 1e-10);
        prop_assert!(grassmann_distance(&v, &v).unwrap() <= 1e-12);
    }

    #[test]
    fn planes_meeting_a_decomposable_form_lie_on_its_hyperplane(
        d in 3usize..6,
        k in 1usize..5,
        raw in prop::collection::vec(-4i64..5, 36),
    ) {
        prop_assume!(k < d);
        let vec = |i: usize| -> Vec<Rational> { (0..d).map(|j| Rational::from_ratio(raw[(i * d + j) % raw.len()], 1)).collect() };
        let omega_vectors: Vec<Vec<Rational>> = (0..d - k).map(vec).collect();
        let omega = KVector::wedge_of(&omega_vectors, d);
        prop_assume!(!omega.is_zero());
        let mut xi_vectors = vec![omega_vectors[0].clone()];
        xi_vectors.extend((d - k..d - 1).map(vec));
        let xi = KVector::wedge_of(&xi_vectors, d);
        prop_assume!(!xi.is_zero());
        prop_assert!(xi.wedge(&omega).unwrap().is_zero());
        let section = hyperplane_section(&omega).unwrap();
        prop_assert!(section.contains(&xi));
        prop_assert!(section.is_geometric());
        let plane = GrassmannPoint::from_plucker(&xi.to_f64()).unwrap();
        prop_assert!(plane.plucker().wedge(&omega.to_f64()).unwrap().norm() <= 1e-10);
        prop_assert!(section.to_f64().contains_point(&plane, 1e-10));
    }

    #[test]
    fn quasi_projective_action_matches_the_linear_action(d in 2usize..6, k in 1usize..5, seed in any::<u64>()) {
        prop_assume!(k < d);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = DMatrix::<f64>::identity(d, d) + GrassmannPoint::random(d, d, &mut rng).basis() * 0.5;
        prop_assume!(p.clone().svd(false, false).singular_values.min() > 1e-3);
        let xi = GrassmannPoint::random(k, d, &mut rng);
        let q = quasi_projective_from(&p, k).unwrap();
        prop_assert!(grassmann_distance(&qp_apply(&q, &xi).unwrap(), &xi.image(&p).unwrap()).unwrap() <= 1e-10);
    }

    #[test]
    fn permuted_coordinate_arrangements_map_bijectively(perm in Just((0..4).collect::<Vec<usize>>()).prop_shuffle(), k in 1usize..4) {
        let family: Vec<LinearSection<f64>> = subsets(k, 4)
            .into_iter()
            .map(|s| {
                let axes: Vec<Vec<f64>> = s.iter().map(|&i| (0..4).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
                LinearSection::from_kvectors(k, 4, &[KVector::wedge_of(&axes, 4)], true).unwrap()
            })
            .collect();
        let n = family.len();
        let l = LinearArrangement::new(family).unwrap();
        let r = arrangement_invariance_check(&[permutation(&perm)], &l, 1e-9).unwrap();
        prop_assert!(r.invariant);
        let mut hit: Vec<usize> = r.pairs.iter().map(|p| p.image_of.unwrap()).collect();
        hit.sort_unstable();
        prop_assert_eq!(hit, (0..n).collect::<Vec<_>>());
    }
}

#[test]
fn double_star_is_a_sign() {
    for d in 1..7 {
        for k in 0..=d {
            let sign = if (k * (d - k)) % 2 == 0 { 1 } else { -1 };
            for s in subsets(k, d) {
                let e: KVector<Rational> = KVector::basis(d, &s);
                assert_eq!(e.hodge_star().hodge_star(), e.scale(&Rational::from_ratio(sign, 1)), "d={d} k={k}");
            }
        }
    }
}

#[test]
fn zero_form_has_no_hyperplane() {
    let z: KVector<Rational> = KVector::zero(2, 4);
    assert!(hyperplane_section(&z).is_err());
    assert!(z.coefficients().iter().all(|c| c.is_zero()));
}
