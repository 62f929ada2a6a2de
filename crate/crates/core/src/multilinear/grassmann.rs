use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::kvector::KVector;
use super::MultilinearError;
use crate::linalg::{orthonormal_columns, singular_values_desc, RANK_THRESHOLD};
use crate::scalar::Scalar;

/// A `k`-dimensional subspace of `R^d`, stored as a `d x k` matrix with
/// orthonormal columns.
#[derive(Clone, Debug, PartialEq)]
pub struct GrassmannPoint {
    basis: DMatrix<f64>,
}

impl GrassmannPoint {
    /// Column span of `spanning`, which must have full column rank.
    pub fn new(spanning: DMatrix<f64>) -> Result<Self, MultilinearError> {
        let k = spanning.ncols();
        let basis = orthonormal_columns(&spanning, RANK_THRESHOLD);
        if basis.ncols() != k || k == 0 {
            return Err(MultilinearError::RankDeficient(basis.ncols(), k));
        }
        Ok(Self { basis })
    }

    pub fn from_vectors(vectors: &[Vec<f64>]) -> Result<Self, MultilinearError> {
        let d = vectors.first().map_or(0, Vec::len);
        if vectors.iter().any(|v| v.len() != d) {
            return Err(MultilinearError::AmbientMismatch);
        }
        Self::new(DMatrix::from_fn(d, vectors.len(), |i, j| vectors[j][i]))
    }

    /// Span of the coordinate axes with the given zero-based indices.
    pub fn coordinate(d: usize, axes: &[usize]) -> Self {
        let basis = DMatrix::from_fn(d, axes.len(), |i, j| if axes[j] == i { 1.0 } else { 0.0 });
        Self { basis }
    }

    /// Uniformly distributed point (Gaussian spanning matrix).
    pub fn random<R: Rng + ?Sized>(k: usize, d: usize, rng: &mut R) -> Self {
        loop {
            let m = DMatrix::from_fn(d, k, |_, _| rng.sample::<f64, _>(StandardNormal));
            if let Ok(p) = Self::new(m) {
                return p;
            }
        }
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn projector(&self) -> DMatrix<f64> {
        &self.basis * self.basis.transpose()
    }

    /// Unit Plucker vector with first nonzero coordinate positive.
    pub fn plucker(&self) -> KVector<f64> {
        let cols: Vec<Vec<f64>> = self.basis.column_iter().map(|c| c.iter().copied().collect()).collect();
        KVector::wedge_of(&cols, self.dim()).normalized()
    }

    /// Subspace spanned by a decomposable unit k-vector.
    pub fn from_plucker(w: &KVector<f64>) -> Result<Self, MultilinearError> {
        let dec = decomposable_rank(w)?;
        if !dec.is_decomposable() {
            return Err(MultilinearError::NotDecomposable(dec.annihilator_dim, w.degree()));
        }
        Self::from_vectors(&dec.annihilator)
    }

    pub fn orthogonal_complement(&self) -> Option<Self> {
        let d = self.dim();
        if self.rank() == d {
            return None;
        }
        let r = DMatrix::identity(d, d) - self.projector();
        let basis = orthonormal_columns(&r, RANK_THRESHOLD);
        Some(Self { basis })
    }

    /// `A V`; `A` must be invertible on `V`.
    pub fn image(&self, a: &DMatrix<f64>) -> Result<Self, MultilinearError> {
        if a.ncols() != self.dim() {
            return Err(MultilinearError::AmbientMismatch);
        }
        Self::new(a * &self.basis)
    }

    /// Distance from `v` to the subspace.
    pub fn distance_to_vector(&self, v: &DVector<f64>) -> f64 {
        let c = self.basis.transpose() * v;
        (v - &self.basis * c).norm()
    }
}

/// `sup_{v in V, |v| = 1} inf_{w in W} |v - w|`.
pub fn grassmann_distance(v: &GrassmannPoint, w: &GrassmannPoint) -> Result<f64, MultilinearError> {
    if v.rank() != w.rank() || v.dim() != w.dim() {
        return Err(MultilinearError::AmbientMismatch);
    }
    Ok(residual_norm(v, w))
}

/// `sigma_max((I - P_W) B_V)`, defined for any ranks.
pub fn residual_norm(v: &GrassmannPoint, w: &GrassmannPoint) -> f64 {
    let r = &v.basis - &w.basis * (w.basis.transpose() * &v.basis);
    singular_values_desc(&r)[0].min(1.0)
}

/// Smallest angle between a vector of `V` and a vector of `W`.
pub fn principal_angle(v: &GrassmannPoint, w: &GrassmannPoint) -> f64 {
    let m = v.basis.transpose() * &w.basis;
    singular_values_desc(&m)[0].clamp(0.0, 1.0).acos()
}

/// Result of the annihilator test.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposability<T> {
    pub degree: usize,
    pub annihilator_dim: usize,
    /// Basis of `{v : v ^ omega = 0}`.
    pub annihilator: Vec<Vec<T>>,
}

impl<T> Decomposability<T> {
    pub fn is_decomposable(&self) -> bool {
        self.annihilator_dim == self.degree
    }
}

/// Annihilator `{v in R^d : v ^ omega = 0}`; `omega` is decomposable exactly
/// when it has dimension `k`, and then it is the subspace itself.
pub fn decomposable_rank<T: Scalar>(omega: &KVector<T>) -> Result<Decomposability<T>, MultilinearError> {
    if omega.is_zero() {
        return Err(MultilinearError::ZeroForm);
    }
    let k = omega.degree();
    let d = omega.dimension();
    let annihilator = if k == d {
        Vec::new()
    } else {
        let scaled = if T::EXACT { omega.clone() } else { omega.scale(&T::from_f64(1.0 / omega.norm())) };
        T::kernel(&scaled.wedge_matrix(1)?)
    };
    Ok(Decomposability {
        degree: k,
        annihilator_dim: if k == d { d } else { annihilator.len() },
        annihilator: if k == d { unit_vectors(d) } else { annihilator },
    })
}

fn unit_vectors<T: Scalar>(d: usize) -> Vec<Vec<T>> {
    (0..d)
        .map(|i| (0..d).map(|j| if i == j { T::one() } else { T::zero() }).collect())
        .collect()
}

/// Subspace of a decomposable float k-vector, if it is decomposable.
pub fn decomposable_subspace(omega: &KVector<f64>) -> Option<GrassmannPoint> {
    GrassmannPoint::from_plucker(omega).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_4;

    fn e(d: usize, idx: &[usize]) -> KVector<Rational> {
        KVector::basis(d, &idx.iter().map(|i| i - 1).collect::<Vec<_>>())
    }

    #[test]
    fn distance_examples() {
        let e1 = GrassmannPoint::coordinate(2, &[0]);
        let e2 = GrassmannPoint::coordinate(2, &[1]);
        let diag = GrassmannPoint::from_vectors(&[vec![1.0, 1.0]]).unwrap();
        assert_eq!(grassmann_distance(&e1, &e1).unwrap(), 0.0);
        assert!((grassmann_distance(&e1, &e2).unwrap() - 1.0).abs() < 1e-15);
        assert!((grassmann_distance(&e1, &diag).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        let u = 0.5f64.sqrt();
        let sampled = (0..=4000)
            .map(|i| {
                let t = -2.0 + i as f64 / 1000.0;
                ((1.0 - t * u).powi(2) + (t * u).powi(2)).sqrt()
            })
            .fold(f64::INFINITY, f64::min);
        assert!((sampled - 0.5f64.sqrt()).abs() < 1e-6);
        assert!(grassmann_distance(&e1, &GrassmannPoint::coordinate(2, &[0, 1])).is_err());
    }

    #[test]
    fn angle_examples() {
        let e1 = GrassmannPoint::coordinate(3, &[0]);
        let e12 = GrassmannPoint::coordinate(3, &[0, 1]);
        let e2 = GrassmannPoint::coordinate(3, &[1]);
        let diag = GrassmannPoint::from_vectors(&[vec![1.0, 1.0, 0.0]]).unwrap();
        assert!(principal_angle(&e1, &e12).abs() < 1e-7);
        assert!((principal_angle(&e1, &e2) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((principal_angle(&e1, &diag) - FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn decomposability_examples() {
        let d = decomposable_rank(&e(4, &[1, 2])).unwrap();
        assert!(d.is_decomposable());
        assert_eq!(d.annihilator.len(), 2);
        let sum = e(4, &[1, 2]).add(&e(4, &[3, 4])).unwrap();
        let nd = decomposable_rank(&sum).unwrap();
        assert_eq!(nd.annihilator_dim, 0);
        assert!(!sum.wedge(&sum).unwrap().is_zero());
        let p = e(4, &[1, 2])
            .add(&e(4, &[1, 3]))
            .and_then(|w| w.add(&e(4, &[2, 4])))
            .and_then(|w| w.add(&e(4, &[1, 4])))
            .and_then(|w| w.add(&e(4, &[2, 3])))
            .unwrap();
        assert!(decomposable_rank(&p).unwrap().is_decomposable());
        assert!(p.wedge(&p).unwrap().is_zero());
        assert_eq!(decomposable_rank(&KVector::<Rational>::zero(2, 4)).unwrap_err(), MultilinearError::ZeroForm);
    }

    #[test]
    fn plucker_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let v = GrassmannPoint::random(2, 5, &mut rng);
            let back = GrassmannPoint::from_plucker(&v.plucker()).unwrap();
            assert!(grassmann_distance(&v, &back).unwrap() < 1e-10);
            assert!((v.plucker().norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn hodge_star_gives_orthocomplement() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let v = GrassmannPoint::random(2, 4, &mut rng);
            let star = GrassmannPoint::from_plucker(&v.plucker().hodge_star()).unwrap();
            let perp = v.orthogonal_complement().unwrap();
            assert!(grassmann_distance(&star, &perp).unwrap() < 1e-10);
        }
    }
}
