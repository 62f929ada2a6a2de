//! Exterior powers of `R^d` with coefficients indexed by lexicographic
//! `k`-subsets of `{0..d}`.

use serde::{Deserialize, Serialize};

use super::MultilinearError;
use crate::linalg::Mat;
use crate::scalar::{scalar_from_json, Scalar};

/// Binomial coefficient.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// All `k`-subsets of `0..d` in lexicographic order.
pub fn subsets(k: usize, d: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, d: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..d {
            if d - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, d, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::with_capacity(binomial(d, k));
    rec(0, d, k, &mut Vec::new(), &mut out);
    out
}

/// Position of a sorted subset in the lexicographic order of [`subsets`].
pub fn subset_rank(subset: &[usize], d: usize) -> usize {
    let k = subset.len();
    let mut rank = 0;
    let mut next = 0;
    for (j, &s) in subset.iter().enumerate() {
        for v in next..s {
            rank += binomial(d - 1 - v, k - 1 - j);
        }
        next = s + 1;
    }
    rank
}

/// Sign of the permutation sorting the concatenation `a ++ b`, or `None`
/// when the two index sets meet.
pub fn merge_sign(a: &[usize], b: &[usize]) -> Option<(bool, Vec<usize>)> {
    let mut inversions = 0usize;
    for &i in a {
        for &j in b {
            if i == j {
                return None;
            }
            if i > j {
                inversions += 1;
            }
        }
    }
    let mut merged = [a, b].concat();
    merged.sort_unstable();
    Some((inversions % 2 == 1, merged))
}

/// An element of the `k`-th exterior power of `R^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct KVector<T = f64> {
    k: usize,
    d: usize,
    coeffs: Vec<T>,
}

impl<T: Scalar> KVector<T> {
    pub fn zero(k: usize, d: usize) -> Self {
        Self {
            k,
            d,
            coeffs: vec![T::zero(); binomial(d, k)],
        }
    }

    pub fn from_coefficients(k: usize, d: usize, coeffs: Vec<T>) -> Result<Self, MultilinearError> {
        if k > d || coeffs.len() != binomial(d, k) {
            return Err(MultilinearError::Shape(format!(
                "{} coefficients do not fit degree {k} in dimension {d}",
                coeffs.len()
            )));
        }
        Ok(Self { k, d, coeffs })
    }

    /// `e_{i_1} ^ ... ^ e_{i_k}` for distinct zero-based indices in any order.
    pub fn basis(d: usize, indices: &[usize]) -> Self {
        let mut v = Self::zero(indices.len(), d);
        let mut sorted = indices.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() < indices.len() {
            return v;
        }
        let inversions = (0..indices.len())
            .flat_map(|i| (i + 1..indices.len()).map(move |j| (i, j)))
            .filter(|&(i, j)| indices[i] > indices[j])
            .count();
        let s = if inversions % 2 == 0 { T::one() } else { -T::one() };
        v.coeffs[subset_rank(&sorted, d)] = s;
        v
    }

    /// A 1-vector.
    pub fn from_vector(v: &[T]) -> Self {
        Self {
            k: 1,
            d: v.len(),
            coeffs: v.to_vec(),
        }
    }

    /// `v_1 ^ ... ^ v_k`.
    pub fn wedge_of(vectors: &[Vec<T>], d: usize) -> Self {
        vectors.iter().fold(Self::scalar(d, T::one()), |acc, v| {
            acc.wedge(&Self::from_vector(v)).expect("degree at most d")
        })
    }

    /// Degree-0 element.
    pub fn scalar(d: usize, c: T) -> Self {
        Self { k: 0, d, coeffs: vec![c] }
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn coefficients(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coefficient(&self, subset: &[usize]) -> &T {
        &self.coeffs[subset_rank(subset, self.d)]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.to_f64().powi(2)).sum::<f64>().sqrt()
    }

    pub fn scale(&self, c: &T) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|x| x.clone() * c.clone()).collect(),
            ..self.clone()
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, MultilinearError> {
        self.same_shape(other)?;
        Ok(Self {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.clone() + b.clone()).collect(),
            ..self.clone()
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, MultilinearError> {
        self.add(&other.scale(&-T::one()))
    }

    fn same_shape(&self, other: &Self) -> Result<(), MultilinearError> {
        if self.k != other.k || self.d != other.d {
            return Err(MultilinearError::AmbientMismatch);
        }
        Ok(())
    }

    pub fn wedge(&self, other: &Self) -> Result<Self, MultilinearError> {
        if self.d != other.d {
            return Err(MultilinearError::AmbientMismatch);
        }
        let k = self.k + other.k;
        if k > self.d {
            return Err(MultilinearError::DegreeOverflow(self.k, other.k, self.d));
        }
        let mut out = Self::zero(k, self.d);
        let left = subsets(self.k, self.d);
        let right = subsets(other.k, self.d);
        for (a, i) in self.coeffs.iter().zip(&left) {
            if a.is_zero() {
                continue;
            }
            for (b, j) in other.coeffs.iter().zip(&right) {
                if b.is_zero() {
                    continue;
                }
                if let Some((neg, merged)) = merge_sign(i, j) {
                    let r = subset_rank(&merged, self.d);
                    let term = a.clone() * b.clone();
                    out.coeffs[r] = if neg {
                        out.coeffs[r].clone() - term
                    } else {
                        out.coeffs[r].clone() + term
                    };
                }
            }
        }
        Ok(out)
    }

    /// Hodge star with `e_I ^ *e_I = e_{0..d}`.
    pub fn hodge_star(&self) -> Self {
        let mut out = Self::zero(self.d - self.k, self.d);
        for (c, i) in self.coeffs.iter().zip(subsets(self.k, self.d)) {
            if c.is_zero() {
                continue;
            }
            let comp: Vec<usize> = (0..self.d).filter(|x| !i.contains(x)).collect();
            let (neg, _) = merge_sign(&i, &comp).expect("complementary sets");
            let r = subset_rank(&comp, self.d);
            out.coeffs[r] = if neg { -c.clone() } else { c.clone() };
        }
        out
    }

    /// Matrix of `eta -> eta ^ self` from degree `k` to degree
    /// `k + self.degree()`, columns indexed by `k`-subsets.
    pub fn wedge_matrix(&self, k: usize) -> Result<Mat<T>, MultilinearError> {
        let target = k + self.k;
        if target > self.d {
            return Err(MultilinearError::DegreeOverflow(k, self.k, self.d));
        }
        let cols = subsets(k, self.d);
        let mut m = Mat::zeros(binomial(self.d, target), cols.len());
        for (c, s) in cols.iter().enumerate() {
            let img = Self::basis(self.d, s).wedge(self)?;
            for (r, v) in img.coeffs.into_iter().enumerate() {
                m[(r, c)] = v;
            }
        }
        Ok(m)
    }

    pub fn to_f64(&self) -> KVector<f64> {
        KVector {
            k: self.k,
            d: self.d,
            coeffs: self.coeffs.iter().map(Scalar::to_f64).collect(),
        }
    }

    pub fn to_json(&self) -> KVectorJson {
        KVectorJson {
            k: self.k,
            d: self.d,
            coefficients: self.coeffs.iter().map(Scalar::to_json).collect(),
        }
    }
}

impl KVector<f64> {
    /// Unit representative with first nonzero coordinate positive.
    pub fn normalized(&self) -> Self {
        let n = self.norm();
        if n == 0.0 {
            return self.clone();
        }
        let cutoff = 1e-12 * self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let first = self.coeffs.iter().find(|c| c.abs() > cutoff).copied().unwrap_or(1.0);
        let s = if first < 0.0 { -1.0 / n } else { 1.0 / n };
        self.scale(&s)
    }
}

/// Induced map `Lambda^k A` on the exterior power.
pub fn exterior_power<T: Scalar>(a: &Mat<T>, k: usize) -> Mat<T> {
    let d = a.rows();
    let cols: Vec<Vec<T>> = (0..d).map(|j| (0..d).map(|i| a[(i, j)].clone()).collect()).collect();
    let subs = subsets(k, d);
    let mut m = Mat::zeros(subs.len(), subs.len());
    for (c, s) in subs.iter().enumerate() {
        let img = KVector::wedge_of(&s.iter().map(|&j| cols[j].clone()).collect::<Vec<_>>(), d);
        for (r, v) in img.coeffs.into_iter().enumerate() {
            m[(r, c)] = v;
        }
    }
    m
}

/// Serialized k-vector: `{"k": 2, "d": 4, "coefficients": [...]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct KVectorJson {
    pub k: usize,
    pub d: usize,
    pub coefficients: Vec<serde_json::Value>,
}

impl KVectorJson {
    pub fn to_kvector<T: Scalar>(&self) -> Result<KVector<T>, MultilinearError> {
        let coeffs = self
            .coefficients
            .iter()
            .map(|v| scalar_from_json(v).ok_or_else(|| MultilinearError::Parse(v.to_string())))
            .collect::<Result<Vec<T>, _>>()?;
        KVector::from_coefficients(self.k, self.d, coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn e(d: usize, idx: &[usize]) -> KVector<Rational> {
        KVector::basis(d, &idx.iter().map(|i| i - 1).collect::<Vec<_>>())
    }

    #[test]
    fn subset_ranks_match_enumeration() {
        for d in 0..7 {
            for k in 0..=d {
                for (r, s) in subsets(k, d).iter().enumerate() {
                    assert_eq!(subset_rank(s, d), r);
                }
            }
        }
    }

    #[test]
    fn basic_wedges() {
        assert_eq!(e(4, &[1]).wedge(&e(4, &[2])).unwrap(), e(4, &[1, 2]));
        assert!(e(4, &[1, 2]).wedge(&e(4, &[1, 3])).unwrap().is_zero());
        assert_eq!(e(4, &[3, 2]), e(4, &[2, 3]).scale(&Rational::from_ratio(-1, 1)));
        assert!(matches!(
            e(3, &[1, 2]).wedge(&e(3, &[1, 3])),
            Err(MultilinearError::DegreeOverflow(2, 2, 3))
        ));
    }

    #[test]
    fn omega_n_expansion() {
        let n = Rational::from_ratio(1, 3);
        let a = e(4, &[1]).add(&e(4, &[3]).scale(&n)).unwrap();
        let b = e(4, &[2]).add(&e(4, &[4]).scale(&n)).unwrap();
        let w = a.wedge(&b).unwrap();
        let expected = e(4, &[1, 2])
            .add(&e(4, &[1, 4]).scale(&n))
            .unwrap()
            .sub(&e(4, &[2, 3]).scale(&n))
            .unwrap()
            .add(&e(4, &[3, 4]).scale(&(n.clone() * n)))
            .unwrap();
        assert_eq!(w, expected);
    }

    #[test]
    fn hodge_examples() {
        assert_eq!(e(4, &[1, 2]).hodge_star(), e(4, &[3, 4]));
        assert_eq!(e(4, &[1, 3]).hodge_star(), e(4, &[2, 4]).scale(&Rational::from_ratio(-1, 1)));
        for d in 1..6 {
            for k in 0..=d {
                let sign = if (k * (d - k)) % 2 == 0 { 1 } else { -1 };
                for s in subsets(k, d) {
                    let b = KVector::<Rational>::basis(d, &s);
                    let star = b.hodge_star();
                    assert_eq!(b.wedge(&star).unwrap(), KVector::basis(d, &(0..d).collect::<Vec<_>>()));
                    assert_eq!(star.hodge_star(), b.scale(&Rational::from_ratio(sign, 1)));
                }
            }
        }
    }

    #[test]
    fn exterior_power_is_determinant_on_top() {
        let a: Mat<f64> = Mat::from_rows(&[vec![2.0, 1.0, 0.0], vec![0.0, 3.0, 1.0], vec![1.0, 0.0, 1.0]]);
        let top = exterior_power(&a, 3);
        assert!((top[(0, 0)] - 7.0).abs() < 1e-12);
        assert_eq!(exterior_power(&a, 1), a);
    }

    #[test]
    fn json_round_trip() {
        let w = e(4, &[1, 2]).add(&e(4, &[3, 4]).scale(&Rational::from_ratio(2, 7))).unwrap();
        let j = w.to_json();
        assert_eq!(j.coefficients[5], serde_json::json!("2/7"));
        assert_eq!(j.to_kvector::<Rational>().unwrap(), w);
    }
}
