use nalgebra::{DMatrix, DVector};

use super::grassmann::GrassmannPoint;
use super::kvector::{binomial, exterior_power, KVector};
use super::MultilinearError;
use crate::linalg::{kernel_f64, spectral_norm, Mat, RANK_THRESHOLD};

/// Smallest accepted norm of `Q xi` before renormalizing.
pub const QP_MIN_NORM: f64 = 1e-6;

/// Consecutive normalized terms must be this close for a limit to exist.
pub const QP_CAUCHY_TOL: f64 = 1e-8;

/// Normalized limit of induced maps `Lambda^k P`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuasiProjectiveMap {
    k: usize,
    d: usize,
    matrix: DMatrix<f64>,
    kernel: Vec<Vec<f64>>,
}

impl QuasiProjectiveMap {
    /// Normalizes an endomorphism of `Lambda^k(R^d)` to spectral norm 1.
    pub fn from_exterior(k: usize, d: usize, m: DMatrix<f64>) -> Result<Self, MultilinearError> {
        let n = binomial(d, k);
        if m.nrows() != n || m.ncols() != n {
            return Err(MultilinearError::AmbientMismatch);
        }
        let s = spectral_norm(&m);
        if s == 0.0 || !s.is_finite() {
            return Err(MultilinearError::ZeroForm);
        }
        let matrix = m / s;
        let kernel = kernel_f64(&matrix, RANK_THRESHOLD);
        Ok(Self { k, d, matrix, kernel })
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn kernel_basis(&self) -> &[Vec<f64>] {
        &self.kernel
    }

    /// A form `omega` of degree `d - k` with `ker Q` inside `H_omega`.
    pub fn kernel_hyperplane(&self) -> KVector<f64> {
        let top = (0..self.matrix.nrows())
            .map(|i| self.matrix.row(i).transpose())
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .expect("nonempty matrix");
        KVector::from_coefficients(self.k, self.d, top.iter().copied().collect())
            .expect("ambient shape")
            .hodge_star()
    }

    /// `Q xi`, for `xi` away from the kernel.
    pub fn apply(&self, xi: &GrassmannPoint) -> Result<GrassmannPoint, MultilinearError> {
        if xi.rank() != self.k || xi.dim() != self.d {
            return Err(MultilinearError::AmbientMismatch);
        }
        let p = DVector::from_vec(xi.plucker().coefficients().to_vec());
        let img = &self.matrix * p;
        let norm = img.norm();
        if norm < QP_MIN_NORM {
            return Err(MultilinearError::NearKernel(norm));
        }
        let w = KVector::from_coefficients(self.k, self.d, (img / norm).iter().copied().collect())?;
        GrassmannPoint::from_plucker(&w)
    }
}

/// `Lambda^k P / |Lambda^k P|`.
pub fn quasi_projective_from(p: &DMatrix<f64>, k: usize) -> Result<QuasiProjectiveMap, MultilinearError> {
    if p.nrows() != p.ncols() || k > p.nrows() {
        return Err(MultilinearError::AmbientMismatch);
    }
    let d = p.nrows();
    QuasiProjectiveMap::from_exterior(k, d, exterior_power(&Mat::<f64>::from_f64(p), k).to_f64())
}

pub fn qp_apply(q: &QuasiProjectiveMap, xi: &GrassmannPoint) -> Result<GrassmannPoint, MultilinearError> {
    q.apply(xi)
}

/// Limit of normalized `Lambda^k P_n`; the last two terms must agree to
/// [`QP_CAUCHY_TOL`].
pub fn qp_limit(seq: &[DMatrix<f64>], k: usize) -> Result<QuasiProjectiveMap, MultilinearError> {
    let maps = seq
        .iter()
        .map(|p| quasi_projective_from(p, k))
        .collect::<Result<Vec<_>, _>>()?;
    let [.., prev, last] = maps.as_slice() else {
        return Err(MultilinearError::NotCauchy(f64::INFINITY));
    };
    let diff = spectral_norm(&(&last.matrix - &prev.matrix));
    if diff > QP_CAUCHY_TOL {
        return Err(MultilinearError::NotCauchy(diff));
    }
    Ok(last.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multilinear::grassmann::grassmann_distance;
    use crate::multilinear::sections::hyperplane_section;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_map() {
        let q = quasi_projective_from(&DMatrix::identity(3, 3), 2).unwrap();
        assert!(q.kernel_basis().is_empty());
        assert!((spectral_norm(q.matrix()) - 1.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let xi = GrassmannPoint::random(2, 3, &mut rng);
        assert!(grassmann_distance(&q.apply(&xi).unwrap(), &xi).unwrap() < 1e-10);
    }

    #[test]
    fn rank_one_limit() {
        let seq: Vec<DMatrix<f64>> = (0..=30)
            .map(|j| DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.5f64.powi(j)]))
            .collect();
        let q = qp_limit(&seq, 1).unwrap();
        assert_eq!(q.kernel_basis().len(), 1);
        assert!(q.kernel_basis()[0][1].abs() > 1.0 - 1e-6);
        let xi = GrassmannPoint::from_vectors(&[vec![1.0, 1.0]]).unwrap();
        let img = q.apply(&xi).unwrap();
        assert!(grassmann_distance(&img, &GrassmannPoint::coordinate(2, &[0])).unwrap() < 1e-8);
        assert!(matches!(q.apply(&GrassmannPoint::coordinate(2, &[1])), Err(MultilinearError::NearKernel(_))));
        assert!(matches!(qp_limit(&seq[..10], 1), Err(MultilinearError::NotCauchy(_))));
    }

    #[test]
    fn kernel_inside_hyperplane() {
        let p = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        let q = QuasiProjectiveMap::from_exterior(1, 3, p).unwrap();
        let h = hyperplane_section(&q.kernel_hyperplane()).unwrap();
        for v in q.kernel_basis() {
            let w = KVector::from_coefficients(1, 3, v.clone()).unwrap();
            assert!(w.wedge(&q.kernel_hyperplane()).unwrap().norm() < 1e-12);
        }
        assert_eq!(h.dim(), 2);
    }

    #[test]
    fn projective_action_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let p = DMatrix::from_fn(4, 4, |_, _| rand::Rng::random_range(&mut rng, -1.0..1.0)) + DMatrix::identity(4, 4) * 2.0;
            let xi = GrassmannPoint::random(2, 4, &mut rng);
            let q = quasi_projective_from(&p, 2).unwrap();
            let direct = xi.image(&p).unwrap();
            assert!(grassmann_distance(&q.apply(&xi).unwrap(), &direct).unwrap() < 1e-9);
        }
    }
}
