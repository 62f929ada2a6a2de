use cocycle_lab::symbolic::{bracket, metric, periodic_orbits, SubshiftSpec, Symbol, SymbolicPoint};
use proptest::prelude::*;

const HALF: i64 = 12;

fn point(core: &[Symbol]) -> SymbolicPoint {
    SubshiftSpec::full_shift(2)
        .two_sided_point(vec![0], core.to_vec(), -HALF, vec![1])
        .unwrap()
}

fn flip(core: &[Symbol], at: &[usize]) -> Vec<Symbol> {
    let mut w = core.to_vec();
    for &i in at {
        w[i] ^= 1;
    }
    w
}

fn core() -> impl Strategy<Value = Vec<Symbol>> {
    prop::collection::vec(0u8..2, 2 * HALF as usize + 1)
}

fn flips() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0usize..(2 * HALF as usize + 1), 0..3)
}

proptest! {
    #[test]
    fn metric_is_an_ultrametric(w in core(), a in flips(), b in flips()) {
        let x = point(&w);
        let y = point(&flip(&w, &a));
        let z = point(&flip(&flip(&w, &a), &b));
        let (xy, yz, xz) = (metric(&x, &y).unwrap(), metric(&y, &z).unwrap(), metric(&x, &z).unwrap());
        prop_assert!(xz <= xy.max(yz));
        prop_assert_eq!(xy, metric(&y, &x).unwrap());
    }

    #[test]
    fn shift_is_two_lipschitz(w in core(), a in flips()) {
        let x = point(&w);
        let y = point(&flip(&w, &a));
        let before = metric(&x, &y).unwrap();
        let after = metric(&x.shift(1).unwrap(), &y.shift(1).unwrap()).unwrap();
        prop_assert!(after <= 2.0 * before);
    }

    #[test]
    fn stable_leaves_contract(w in core(), past in prop::collection::vec(0usize..HALF as usize, 1..4), n in 0i64..10) {
        let x = point(&w);
        let y = point(&flip(&w, &past));
        prop_assert!(x.on_local_stable_leaf(&y));
        let d = metric(&x.shift(n).unwrap(), &y.shift(n).unwrap()).unwrap();
        prop_assert!(d <= 2f64.powi(-n as i32));
    }

    #[test]
    fn bracket_joins_past_and_future(u in core(), mut v in core()) {
        v[HALF as usize] = u[HALF as usize];
        let (x, y) = (point(&u), point(&v));
        let b = bracket(&x, &y).unwrap();
        for i in -3 * HALF..=3 * HALF {
            let expected = if i <= 0 { x.symbol(i) } else { y.symbol(i) };
            prop_assert_eq!(b.symbol(i), expected, "index {}", i);
        }
        prop_assert!(metric(&b, &y).unwrap() <= 1.0);
        prop_assert!(b.on_local_stable_leaf(&y));
    }
}

#[test]
fn periodic_orbits_return_to_themselves() {
    let three = SubshiftSpec::new(vec![vec![1, 1, 0], vec![0, 1, 1], vec![1, 1, 1]]).unwrap();
    for spec in [SubshiftSpec::full_shift(2), SubshiftSpec::golden_mean(), three] {
        let orbits = periodic_orbits(&spec, 6);
        assert!(!orbits.is_empty());
        for p in orbits {
            let q = p.minimal_period().unwrap();
            assert!(p.shift(q as i64).unwrap().same_sequence(&p));
            if q > 1 {
                assert!(!p.shift(1).unwrap().same_sequence(&p));
            }
        }
    }
}

#[test]
fn bracket_rejects_mismatched_symbols() {
    let mut u = vec![0; 2 * HALF as usize + 1];
    let mut v = u.clone();
    u[HALF as usize] = 0;
    v[HALF as usize] = 1;
    assert!(bracket(&point(&u), &point(&v)).is_err());
}
