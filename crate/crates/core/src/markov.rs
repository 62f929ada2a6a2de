//! Stationary Markov measures on a subshift of finite type.
//!
//! Masses are computed in the measure's scalar type, so a measure built from
//! rational transition probabilities gives exact cylinder masses, densities
//! and conditional ratios.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Mat;
use crate::scalar::{scalar_from_json, Scalar};
use crate::symbolic::{CylinderId, Sidedness, SubshiftSpec, Symbol, SymbolicError, SymbolicPoint};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MarkovError {
    #[error("transition matrix must be square of size {0}")]
    Shape(usize),
    #[error("transition row {0} does not sum to 1")]
    NotStochastic(usize),
    #[error("transition entry ({0},{1}) is negative")]
    Negative(usize, usize),
    #[error("support of P differs from the adjacency at ({0},{1})")]
    Support(usize, usize),
    #[error("stationary vector is not unique or not positive")]
    Stationary,
    #[error("inadmissible word {0:?}")]
    Inadmissible(Vec<Symbol>),
    #[error("stable set K is empty")]
    EmptySet,
    #[error("{0}")]
    Point(String),
    #[error("could not parse transition entry {0}")]
    Parse(String),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
}

/// Which local leaf a conditional measure lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Stable,
    Unstable,
}

/// Stationary Markov measure with transition matrix `P` and stationary
/// vector `pi`.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovMeasure<T> {
    spec: SubshiftSpec,
    transition: Vec<Vec<T>>,
    stationary: Vec<T>,
}

impl<T: Scalar> MarkovMeasure<T> {
    pub fn new(spec: SubshiftSpec, transition: Vec<Vec<T>>) -> Result<Self, MarkovError> {
        let m = spec.alphabet_size();
        if transition.len() != m || transition.iter().any(|r| r.len() != m) {
            return Err(MarkovError::Shape(m));
        }
        for (i, row) in transition.iter().enumerate() {
            let mut total = T::zero();
            for (j, p) in row.iter().enumerate() {
                if *p < T::zero() {
                    return Err(MarkovError::Negative(i + 1, j + 1));
                }
                if (*p > T::zero()) != spec.allowed(i as Symbol, j as Symbol) {
                    return Err(MarkovError::Support(i + 1, j + 1));
                }
                total = total + p.clone();
            }
            if !(total - T::one()).is_negligible(1e-2) {
                return Err(MarkovError::NotStochastic(i + 1));
            }
        }
        let stationary = stationary_vector(&transition)?;
        Ok(Self {
            spec,
            transition,
            stationary,
        })
    }

    /// Builds the measure on the subshift whose adjacency is the support of
    /// `transition`.
    pub fn from_transition(transition: Vec<Vec<T>>) -> Result<Self, MarkovError> {
        let adjacency = transition
            .iter()
            .map(|r| r.iter().map(|p| u8::from(*p > T::zero())).collect())
            .collect();
        Self::new(SubshiftSpec::new(adjacency)?, transition)
    }

    /// Bernoulli measure on the full shift with the given symbol weights.
    pub fn bernoulli(weights: Vec<T>) -> Result<Self, MarkovError> {
        let m = weights.len();
        Self::new(SubshiftSpec::full_shift(m), vec![weights; m])
    }

    pub fn spec(&self) -> &SubshiftSpec {
        &self.spec
    }

    pub fn transition(&self) -> &[Vec<T>] {
        &self.transition
    }

    pub fn stationary(&self) -> &[T] {
        &self.stationary
    }

    pub fn p(&self, a: Symbol, b: Symbol) -> T {
        self.transition[a as usize][b as usize].clone()
    }

    pub fn pi(&self, a: Symbol) -> T {
        self.stationary[a as usize].clone()
    }

    fn check_word(&self, word: &[Symbol]) -> Result<(), MarkovError> {
        if self.spec.is_admissible_word(word) {
            Ok(())
        } else {
            Err(MarkovError::Inadmissible(word.to_vec()))
        }
    }

    /// `prod P_{w_i w_{i+1}}` over consecutive pairs.
    pub fn path_weight(&self, word: &[Symbol]) -> T {
        word.windows(2)
            .fold(T::one(), |acc, w| acc * self.p(w[0], w[1]))
    }

    /// Mass of the cylinder spelled by `word` at any offset.
    pub fn word_mass(&self, word: &[Symbol]) -> Result<T, MarkovError> {
        self.check_word(word)?;
        Ok(match word.first() {
            None => T::one(),
            Some(&a) => self.pi(a) * self.path_weight(word),
        })
    }

    /// Cylinder mass `pi_{a_0} prod P_{a_i a_{i+1}}`; independent of the
    /// offset by stationarity.
    pub fn cylinder_mass(&self, cyl: &CylinderId) -> Result<T, MarkovError> {
        self.word_mass(&cyl.word)
    }

    /// Mass of a past cylinder `[u, i]` under the projection of the measure
    /// on `[0; i]` to the past: `u` occupies indices `-|u|..-1`.
    pub fn stable_marginal(&self, i: Symbol, past: &[Symbol]) -> Result<T, MarkovError> {
        let mut w = past.to_vec();
        w.push(i);
        self.word_mass(&w)
    }

    /// Mass of a future cylinder `[i, v]` under the projection of the measure
    /// on `[0; i]` to the future: `v` occupies indices `1..=|v|`.
    pub fn unstable_marginal(&self, i: Symbol, future: &[Symbol]) -> Result<T, MarkovError> {
        let mut w = vec![i];
        w.extend_from_slice(future);
        self.word_mass(&w)
    }

    /// Density of the measure on `[0; x_0]` with respect to the product of
    /// its past and future projections. For a Markov measure it is the
    /// constant `1 / pi_{x_0}`.
    pub fn product_density_psi(&self, x: &SymbolicPoint) -> Result<T, MarkovError> {
        if x.sidedness() != Sidedness::TwoSided {
            return Err(MarkovError::Point("psi needs a two-sided point".into()));
        }
        let x0 = x.symbol(0).expect("two-sided");
        Ok(T::one() / self.pi(x0))
    }

    /// Jacobian `J_u(x) = pi_{x_1} / (pi_{x_0} P_{x_0 x_1})` of the future
    /// projections under the one-sided shift.
    pub fn jacobian_unstable(&self, x: &SymbolicPoint) -> Result<T, MarkovError> {
        if x.sidedness() != Sidedness::Future {
            return Err(MarkovError::Point("J_u needs a one-sided future point".into()));
        }
        let x0 = x.symbol(0).expect("future point");
        let x1 = x.symbol(1).expect("future point");
        Ok(self.pi(x1) / (self.pi(x0) * self.p(x0, x1)))
    }

    /// Probability conditional measure on the local leaf through `base`.
    pub fn conditional(&self, base: &SymbolicPoint, side: Side) -> Result<ConditionalMeasure<'_, T>, MarkovError> {
        if base.sidedness() != Sidedness::TwoSided {
            return Err(MarkovError::Point("conditionals need a two-sided point".into()));
        }
        Ok(ConditionalMeasure {
            measure: self,
            base: base.clone(),
            side,
        })
    }

    /// The two ratios compared by the distortion lemma: the conditional mass
    /// of `shift^n K` inside `shift^n W^s_loc(x)`, and of `K` inside
    /// `W^s_loc(x)`. `K` is the union of the past cylinders given by `past_words`
    /// (each at indices `-k..-1`) intersected with the local stable leaf.
    pub fn distortion_check(&self, x: &SymbolicPoint, past_words: &[Vec<Symbol>], n: usize) -> Result<(T, T), MarkovError> {
        if past_words.is_empty() {
            return Err(MarkovError::EmptySet);
        }
        let cond = self.conditional(x, Side::Stable)?;
        let moved = self.conditional(&x.shifted(n as i64), Side::Stable)?;
        let prefix = x.window(0, n as i64 - 1);
        let mut k_mass = T::zero();
        let mut moved_mass = T::zero();
        for u in past_words {
            k_mass = k_mass + cond.mass(u)?;
            let mut w = u.clone();
            w.extend_from_slice(&prefix);
            moved_mass = moved_mass + moved.mass(&w)?;
        }
        let moved_total = moved.mass(&prefix)?;
        let total = cond.mass(&[])?;
        Ok((moved_mass / moved_total, k_mass / total))
    }

    /// Projection to `f64`.
    pub fn to_f64(&self) -> MarkovMeasure<f64> {
        MarkovMeasure {
            spec: self.spec.clone(),
            transition: self
                .transition
                .iter()
                .map(|r| r.iter().map(|p| p.to_f64()).collect())
                .collect(),
            stationary: self.stationary.iter().map(|p| p.to_f64()).collect(),
        }
    }

    /// Time-reversed chain `Q_{ij} = pi_j P_{ji} / pi_i` on the transposed
    /// subshift.
    pub fn reversed(&self) -> MarkovMeasure<T> {
        let m = self.spec.alphabet_size();
        let q: Vec<Vec<T>> = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| self.stationary[j].clone() * self.transition[j][i].clone() / self.stationary[i].clone())
                    .collect()
            })
            .collect();
        let adjacency = (0..m)
            .map(|i| (0..m).map(|j| self.spec.adjacency()[j][i]).collect())
            .collect();
        MarkovMeasure {
            spec: SubshiftSpec::new(adjacency).expect("transpose of irreducible is irreducible"),
            transition: q,
            stationary: self.stationary.clone(),
        }
    }

    fn sample_next(&self, rows: &[Vec<f64>], a: Symbol, rng: &mut ChaCha8Rng) -> Symbol {
        categorical(&rows[a as usize], rng)
    }

    /// Orbit sample: `x_0 ~ pi`, the future from `P` and the past from the
    /// reversed chain. The core covers indices `-(length/2) .. length - length/2 - 1`
    /// and is padded with shortest cycles through its end symbols.
    pub fn sample_orbit(&self, length: usize, seed: u64) -> SymbolicPoint {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_orbit_with(length.max(1), &mut rng)
    }

    pub fn sample_orbit_with(&self, length: usize, rng: &mut ChaCha8Rng) -> SymbolicPoint {
        let f = self.to_f64();
        let pi: Vec<f64> = f.stationary.clone();
        let back = f.reversed();
        let left = length / 2;
        let right = length - left - 1;
        let x0 = categorical(&pi, rng);
        let mut future = vec![x0];
        for _ in 0..right {
            let last = *future.last().expect("nonempty");
            future.push(f.sample_next(&f.transition, last, rng));
        }
        let mut past = Vec::with_capacity(left);
        let mut cur = x0;
        for _ in 0..left {
            cur = back.sample_next(&back.transition, cur, rng);
            past.push(cur);
        }
        past.reverse();
        past.extend(future);
        self.spec
            .pad_core(past, -(left as i64))
            .expect("sampled word is admissible")
    }

    /// Point of `W^s_loc(x)` whose past to depth `depth` is drawn from the
    /// stable conditional at `x`.
    pub fn sample_stable_partner(&self, x: &SymbolicPoint, depth: usize, rng: &mut ChaCha8Rng) -> SymbolicPoint {
        let back = self.to_f64().reversed();
        let mut cur = x.symbol(0).expect("two-sided");
        let mut past = Vec::with_capacity(depth);
        for _ in 0..depth {
            cur = back.sample_next(&back.transition, cur, rng);
            past.push(cur);
        }
        past.reverse();
        if past.is_empty() {
            return x.clone();
        }
        let head = self
            .spec
            .pad_core(past, -(depth as i64))
            .expect("sampled word is admissible");
        SymbolicPoint::splice(&head, x, 0)
    }

    /// Point of `W^u_loc(x)` whose future to depth `depth` is drawn from the
    /// unstable conditional at `x`.
    pub fn sample_unstable_partner(&self, x: &SymbolicPoint, depth: usize, rng: &mut ChaCha8Rng) -> SymbolicPoint {
        let f = self.to_f64();
        let mut cur = x.symbol(0).expect("two-sided");
        let mut fut = Vec::with_capacity(depth);
        for _ in 0..depth {
            cur = f.sample_next(&f.transition, cur, rng);
            fut.push(cur);
        }
        if fut.is_empty() {
            return x.clone();
        }
        let tail = self.spec.pad_core(fut, 1).expect("sampled word is admissible");
        SymbolicPoint::splice(x, &tail, 1)
    }
}

impl MarkovMeasure<f64> {
    /// Parry (maximal entropy) measure of a subshift.
    pub fn parry(spec: &SubshiftSpec) -> Self {
        let m = spec.alphabet_size();
        let a: Vec<Vec<f64>> = spec
            .adjacency()
            .iter()
            .map(|r| r.iter().map(|&v| v as f64).collect())
            .collect();
        let right = perron_vector(&a);
        let ar: Vec<f64> = (0..m).map(|i| (0..m).map(|j| a[i][j] * right[j]).sum()).collect();
        let lambda = ar.iter().sum::<f64>() / right.iter().sum::<f64>();
        let transition: Vec<Vec<f64>> = (0..m)
            .map(|i| (0..m).map(|j| a[i][j] * right[j] / (lambda * right[i])).collect())
            .collect();
        Self::new(spec.clone(), transition).expect("Parry measure is a valid Markov measure")
    }
}

fn perron_vector(a: &[Vec<f64>]) -> Vec<f64> {
    let m = a.len();
    let mut v = vec![1.0; m];
    // (I + A) is primitive for irreducible A and shares its Perron vector.
    for _ in 0..10_000 {
        let mut w: Vec<f64> = (0..m)
            .map(|i| {
                v[i] + (0..m)
                    .map(|j| a[i][j] * v[j])
                    .sum::<f64>()
            })
            .collect();
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= s);
        let diff = w.iter().zip(&v).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        v = w;
        if diff < 1e-16 {
            break;
        }
    }
    v
}

fn categorical(weights: &[f64], rng: &mut ChaCha8Rng) -> Symbol {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            last = i;
            if u < w {
                return i as Symbol;
            }
            u -= w;
        }
    }
    last as Symbol
}

/// Unique probability vector with `pi P = pi`.
pub fn stationary_vector<T: Scalar>(transition: &[Vec<T>]) -> Result<Vec<T>, MarkovError> {
    let m = transition.len();
    let mut a = Mat::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            a[(i, j)] = transition[j][i].clone();
        }
        a[(i, i)] = a[(i, i)].clone() - T::one();
    }
    let ker = T::kernel(&a);
    if ker.len() != 1 {
        return Err(MarkovError::Stationary);
    }
    let v = &ker[0];
    let s = v.iter().fold(T::zero(), |acc, x| acc + x.clone());
    if s.is_negligible(1.0) {
        return Err(MarkovError::Stationary);
    }
    let pi: Vec<T> = v.iter().map(|x| x.clone() / s.clone()).collect();
    if pi.iter().any(|p| *p <= T::zero()) {
        return Err(MarkovError::Stationary);
    }
    Ok(pi)
}

/// Probability conditional measure along a local stable or unstable leaf.
///
/// On the stable leaf of `z` a past word `u` (indices `-|u|..-1`) has mass
/// `pi_{u_1} P(u) P_{u_k z_0} / pi_{z_0}`; on the unstable leaf a future word
/// `v` (indices `1..=|v|`) has mass `P_{z_0 v_1} P(v)`.
#[derive(Clone, Debug)]
pub struct ConditionalMeasure<'a, T> {
    measure: &'a MarkovMeasure<T>,
    base: SymbolicPoint,
    side: Side,
}

impl<T: Scalar> ConditionalMeasure<'_, T> {
    pub fn base_point(&self) -> &SymbolicPoint {
        &self.base
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn mass(&self, word: &[Symbol]) -> Result<T, MarkovError> {
        let mu = self.measure;
        let z0 = self.base.symbol(0).expect("two-sided");
        let mut w = word.to_vec();
        match self.side {
            Side::Stable => {
                w.push(z0);
                mu.check_word(&w)?;
                if word.is_empty() {
                    return Ok(T::one());
                }
                Ok(mu.pi(w[0]) * mu.path_weight(&w) / mu.pi(z0))
            }
            Side::Unstable => {
                w.insert(0, z0);
                mu.check_word(&w)?;
                Ok(mu.path_weight(&w))
            }
        }
    }

    /// Masses of every admissible depth-`k` cylinder of the leaf.
    pub fn partition(&self, k: usize) -> Vec<(Vec<Symbol>, T)> {
        self.measure
            .spec
            .words(k)
            .into_iter()
            .filter_map(|w| self.mass(&w).ok().map(|m| (w, m)))
            .collect()
    }
}

/// JSON form of a measure: `{"transition": [[...]], "mode": "rational"|"float"}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MarkovJson {
    pub transition: Vec<Vec<serde_json::Value>>,
    #[serde(default = "default_mode")]
    pub mode: String,
}

fn default_mode() -> String {
    "float".into()
}

impl MarkovJson {
    pub fn is_rational(&self) -> bool {
        self.mode == "rational"
    }

    pub fn to_measure<T: Scalar>(&self, spec: Option<&SubshiftSpec>) -> Result<MarkovMeasure<T>, MarkovError> {
        let p = self
            .transition
            .iter()
            .map(|r| {
                r.iter()
                    .map(|v| scalar_from_json::<T>(v).ok_or_else(|| MarkovError::Parse(v.to_string())))
                    .collect::<Result<Vec<T>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        match spec {
            Some(s) => MarkovMeasure::new(s.clone(), p),
            None => MarkovMeasure::from_transition(p),
        }
    }

    pub fn from_measure<T: Scalar>(mu: &MarkovMeasure<T>) -> Self {
        MarkovJson {
            transition: mu
                .transition
                .iter()
                .map(|r| r.iter().map(|x| x.to_json()).collect())
                .collect(),
            mode: if T::EXACT { "rational" } else { "float" }.into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(a: i64, b: i64) -> Rational {
        Rational::from_ratio(a, b)
    }

    fn example_q() -> MarkovMeasure<Rational> {
        MarkovMeasure::new(
            SubshiftSpec::full_shift(2),
            vec![vec![q(1, 2), q(1, 2)], vec![q(1, 4), q(3, 4)]],
        )
        .unwrap()
    }

    #[test]
    fn stationary_by_hand() {
        let mu = example_q();
        assert_eq!(mu.stationary(), &[q(1, 3), q(2, 3)]);
        let f = mu.to_f64();
        let g = MarkovMeasure::new(SubshiftSpec::full_shift(2), f.transition().to_vec()).unwrap();
        assert!((g.stationary()[0] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn cylinder_masses() {
        let b = MarkovMeasure::bernoulli(vec![q(1, 2), q(1, 2)]).unwrap();
        assert_eq!(b.cylinder_mass(&CylinderId::new(0, vec![0])).unwrap(), q(1, 2));
        assert_eq!(b.cylinder_mass(&CylinderId::new(0, vec![0, 1])).unwrap(), q(1, 4));
        let mu = example_q();
        assert_eq!(mu.cylinder_mass(&CylinderId::new(0, vec![1, 0])).unwrap(), q(1, 6));
        assert_eq!(mu.cylinder_mass(&CylinderId::new(-7, vec![1, 0])).unwrap(), q(1, 6));
        let g = MarkovMeasure::<f64>::parry(&SubshiftSpec::golden_mean());
        assert!(matches!(
            g.cylinder_mass(&CylinderId::new(0, vec![1, 1])),
            Err(MarkovError::Inadmissible(_))
        ));
    }

    #[test]
    fn rejects_bad_transitions() {
        let s = SubshiftSpec::golden_mean();
        assert_eq!(
            MarkovMeasure::new(s.clone(), vec![vec![q(1, 2), q(1, 2)], vec![q(1, 2), q(1, 2)]]),
            Err(MarkovError::Support(2, 2))
        );
        assert_eq!(
            MarkovMeasure::new(s, vec![vec![q(1, 2), q(1, 3)], vec![q(1, 1), q(0, 1)]]),
            Err(MarkovError::NotStochastic(1))
        );
    }

    #[test]
    fn parry_measure_of_golden_mean() {
        let g = MarkovMeasure::<f64>::parry(&SubshiftSpec::golden_mean());
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((g.p(0, 0) - 1.0 / phi).abs() < 1e-14);
        assert!((g.p(1, 0) - 1.0).abs() < 1e-14);
        let pi0 = phi * phi / (1.0 + phi * phi);
        assert!((g.stationary()[0] - pi0).abs() < 1e-14);
        for j in 0..2 {
            let s: f64 = (0..2).map(|i| g.stationary()[i] * g.transition()[i][j]).sum();
            assert!((s - g.stationary()[j]).abs() <= 1e-12);
        }
    }

    #[test]
    fn conditionals_are_probabilities() {
        let mu = example_q();
        let x = mu.spec().pad_core(vec![0, 1, 1, 0], -2).unwrap();
        for side in [Side::Stable, Side::Unstable] {
            let c = mu.conditional(&x, side).unwrap();
            for k in 0..6 {
                let total = c.partition(k).into_iter().fold(q(0, 1), |a, (_, m)| a + m);
                assert_eq!(total, q(1, 1));
            }
        }
    }

    #[test]
    fn psi_rectangles_exact() {
        let mu = example_q();
        for i in 0..2u8 {
            let x = mu.spec().pad_core(vec![i], 0).unwrap();
            let psi = mu.product_density_psi(&x).unwrap();
            for k in 0..=3 {
                for u in mu.spec().words(k) {
                    for v in mu.spec().words(k) {
                        let mut w = u.clone();
                        w.push(i);
                        w.extend_from_slice(&v);
                        let lhs = mu.word_mass(&w).unwrap();
                        let rhs = psi.clone()
                            * mu.stable_marginal(i, &u).unwrap()
                            * mu.unstable_marginal(i, &v).unwrap();
                        assert_eq!(lhs, rhs);
                    }
                }
            }
        }
    }

    #[test]
    fn jacobian_identity_uniform() {
        let b = MarkovMeasure::bernoulli(vec![q(1, 2), q(1, 2)]).unwrap();
        let x = b.spec().future_point(vec![0, 1], vec![0]).unwrap();
        assert_eq!(b.jacobian_unstable(&x).unwrap(), q(2, 1));
    }

    #[test]
    fn distortion_full_set() {
        let mu = example_q();
        let x = mu.spec().pad_core(vec![1, 0, 1, 1], -1).unwrap();
        let all: Vec<Vec<Symbol>> = mu.spec().words(2);
        let (a, b) = mu.distortion_check(&x, &all, 3).unwrap();
        assert_eq!((a, b), (q(1, 1), q(1, 1)));
        assert_eq!(mu.distortion_check(&x, &[], 1), Err(MarkovError::EmptySet));
    }

    #[test]
    fn json_round_trip() {
        let mu = example_q();
        let j = MarkovJson::from_measure(&mu);
        assert!(j.is_rational());
        let text = serde_json::to_string(&j).unwrap();
        assert!(text.contains("\"1/4\""));
        let back: MarkovJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_measure::<Rational>(None).unwrap(), mu);
    }

    #[test]
    fn sampling_is_deterministic_and_admissible() {
        let g = MarkovMeasure::<f64>::parry(&SubshiftSpec::golden_mean());
        let a = g.sample_orbit(501, 9);
        let b = g.sample_orbit(501, 9);
        assert_eq!(a, b);
        assert!(g.spec().validate(&a).is_ok());
        assert_eq!(a.core().len(), 501);
        assert_eq!(a.core_offset(), -250);
    }

    #[test]
    fn partners_stay_on_leaves() {
        let mu = example_q();
        let x = mu.sample_orbit(40, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let y = mu.sample_stable_partner(&x, 12, &mut rng);
        assert!(y.on_local_stable_leaf(&x));
        assert!(mu.spec().validate(&y).is_ok());
        let z = mu.sample_unstable_partner(&x, 12, &mut rng);
        assert!(z.on_local_unstable_leaf(&x));
        assert!(mu.spec().validate(&z).is_ok());
    }
}
