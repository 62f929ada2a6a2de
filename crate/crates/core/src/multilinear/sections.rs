use nalgebra::DMatrix;
use serde::Serialize;

use super::grassmann::{decomposable_rank, grassmann_distance, GrassmannPoint};
use super::kvector::{binomial, exterior_power, KVector};
use super::MultilinearError;
use crate::linalg::{independent_basis, intersect_spans, orthonormal_columns, same_span, span_rank, Mat, RANK_THRESHOLD};
use crate::scalar::Scalar;

/// A linear subspace `S` of `Lambda^k(R^d)`; its trace on the Grassmannian
/// is the section.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearSection<T = f64> {
    k: usize,
    d: usize,
    basis: Vec<Vec<T>>,
    geometric: bool,
}

impl<T: Scalar> LinearSection<T> {
    /// Span of `vectors` (any spanning list).
    pub fn from_span(k: usize, d: usize, vectors: &[Vec<T>], geometric: bool) -> Result<Self, MultilinearError> {
        let n = binomial(d, k);
        if vectors.iter().any(|v| v.len() != n) {
            return Err(MultilinearError::AmbientMismatch);
        }
        Ok(Self {
            k,
            d,
            basis: independent_basis(vectors, n),
            geometric,
        })
    }

    pub fn from_kvectors(k: usize, d: usize, vectors: &[KVector<T>], geometric: bool) -> Result<Self, MultilinearError> {
        if vectors.iter().any(|v| v.degree() != k || v.dimension() != d) {
            return Err(MultilinearError::AmbientMismatch);
        }
        let raw: Vec<Vec<T>> = vectors.iter().map(|v| v.coefficients().to_vec()).collect();
        Self::from_span(k, d, &raw, geometric)
    }

    /// All of `Lambda^k`.
    pub fn full(k: usize, d: usize) -> Self {
        let n = binomial(d, k);
        let basis = (0..n)
            .map(|i| (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect())
            .collect();
        Self { k, d, basis, geometric: true }
    }

    pub fn ambient(&self) -> (usize, usize) {
        (self.k, self.d)
    }

    pub fn basis(&self) -> &[Vec<T>] {
        &self.basis
    }

    pub fn basis_kvectors(&self) -> Vec<KVector<T>> {
        self.basis
            .iter()
            .map(|b| KVector::from_coefficients(self.k, self.d, b.clone()).expect("ambient shape"))
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_geometric(&self) -> bool {
        self.geometric
    }

    pub fn is_full(&self) -> bool {
        self.dim() == binomial(self.d, self.k)
    }

    fn check_ambient(&self, other: &Self) -> Result<(), MultilinearError> {
        if self.ambient() != other.ambient() {
            return Err(MultilinearError::AmbientMismatch);
        }
        Ok(())
    }

    pub fn intersect(&self, other: &Self) -> Result<Self, MultilinearError> {
        self.check_ambient(other)?;
        let n = binomial(self.d, self.k);
        Ok(Self {
            k: self.k,
            d: self.d,
            basis: intersect_spans(&self.basis, &other.basis, n),
            geometric: self.geometric && other.geometric,
        })
    }

    pub fn same_subspace(&self, other: &Self) -> bool {
        self.ambient() == other.ambient() && same_span(&self.basis, &other.basis, binomial(self.d, self.k))
    }

    /// Exact (or thresholded) membership of a k-vector in `S`.
    pub fn contains(&self, w: &KVector<T>) -> bool {
        if (w.degree(), w.dimension()) != self.ambient() {
            return false;
        }
        let n = binomial(self.d, self.k);
        let mut all = self.basis.clone();
        all.push(w.coefficients().to_vec());
        span_rank(&all, n) == self.dim()
    }

    /// `S` transported by `Lambda^k B`.
    pub fn image(&self, b: &Mat<T>) -> Result<Self, MultilinearError> {
        if b.rows() != self.d || b.cols() != self.d {
            return Err(MultilinearError::AmbientMismatch);
        }
        let lk = exterior_power(b, self.k);
        let imgs: Vec<Vec<T>> = self.basis.iter().map(|v| lk.mul_vec(v)).collect();
        Self::from_span(self.k, self.d, &imgs, self.geometric)
    }

    pub fn to_f64(&self) -> LinearSection<f64> {
        LinearSection {
            k: self.k,
            d: self.d,
            basis: self.basis.iter().map(|v| v.iter().map(Scalar::to_f64).collect()).collect(),
            geometric: self.geometric,
        }
    }
}

impl LinearSection<f64> {
    /// Orthonormal basis of `S` as columns.
    pub fn orthonormal_basis(&self) -> DMatrix<f64> {
        let n = binomial(self.d, self.k);
        let a = DMatrix::from_fn(n, self.dim(), |i, j| self.basis[j][i]);
        orthonormal_columns(&a, RANK_THRESHOLD)
    }

    /// Distance of the Plucker vector of `xi` to `S`.
    pub fn distance_to_point(&self, xi: &GrassmannPoint) -> f64 {
        let p = nalgebra::DVector::from_vec(xi.plucker().coefficients().to_vec());
        let q = self.orthonormal_basis();
        (&p - &q * (q.transpose() * &p)).norm()
    }

    pub fn contains_point(&self, xi: &GrassmannPoint, tol: f64) -> bool {
        self.distance_to_point(xi) <= tol
    }

    /// Subspace distance between sections of equal dimension.
    pub fn distance(&self, other: &Self) -> Result<f64, MultilinearError> {
        if self.ambient() != other.ambient() || self.dim() != other.dim() {
            return Err(MultilinearError::AmbientMismatch);
        }
        if self.dim() == 0 {
            return Ok(0.0);
        }
        let a = GrassmannPoint::new(self.orthonormal_basis())?;
        let b = GrassmannPoint::new(other.orthonormal_basis())?;
        grassmann_distance(&a, &b)
    }
}

/// Hyperplane `H_omega = ker(eta -> eta ^ omega)` in `Lambda^k` with
/// `k = d - deg(omega)`.
pub fn hyperplane_section<T: Scalar>(omega: &KVector<T>) -> Result<LinearSection<T>, MultilinearError> {
    if omega.is_zero() {
        return Err(MultilinearError::ZeroForm);
    }
    let d = omega.dimension();
    let k = d - omega.degree();
    let m = omega.wedge_matrix(k)?;
    let geometric = decomposable_rank(omega)?.is_decomposable();
    LinearSection::from_span(k, d, &T::kernel(&m), geometric)
}

pub fn section_intersection<T: Scalar>(sections: &[LinearSection<T>]) -> Result<LinearSection<T>, MultilinearError> {
    let (first, rest) = sections.split_first().ok_or(MultilinearError::Empty)?;
    rest.iter().try_fold(first.clone(), |acc, s| acc.intersect(s))
}

/// Finite union of linear sections.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearArrangement<T = f64> {
    sections: Vec<LinearSection<T>>,
}

impl<T: Scalar> LinearArrangement<T> {
    pub fn new(sections: Vec<LinearSection<T>>) -> Result<Self, MultilinearError> {
        let first = sections.first().ok_or(MultilinearError::Empty)?;
        if sections.iter().any(|s| s.ambient() != first.ambient()) {
            return Err(MultilinearError::AmbientMismatch);
        }
        Ok(Self { sections })
    }

    pub fn sections(&self) -> &[LinearSection<T>] {
        &self.sections
    }

    /// All of the Grassmannian.
    pub fn is_everything(&self) -> bool {
        self.sections.iter().any(LinearSection::is_full)
    }

    pub fn is_empty(&self) -> bool {
        self.sections.iter().all(|s| s.dim() == 0)
    }

    /// Neither everything nor empty.
    pub fn is_nontrivial(&self) -> bool {
        !self.is_everything() && !self.is_empty()
    }

    pub fn union(&self, other: &Self) -> Result<Self, MultilinearError> {
        let mut s = self.sections.clone();
        s.extend(other.sections.iter().cloned());
        Self::new(s)
    }

    /// Pairwise intersections, dropping zero-dimensional ones. An empty
    /// result is returned as the single zero section.
    pub fn intersect(&self, other: &Self) -> Result<Self, MultilinearError> {
        let mut out: Vec<LinearSection<T>> = Vec::new();
        for a in &self.sections {
            for b in &other.sections {
                let c = a.intersect(b)?;
                if c.dim() > 0 && !out.iter().any(|s| s.same_subspace(&c)) {
                    out.push(c);
                }
            }
        }
        if out.is_empty() {
            let (k, d) = self.sections[0].ambient();
            out.push(LinearSection::from_span(k, d, &[], true)?);
        }
        Self::new(out)
    }

    pub fn image(&self, b: &Mat<T>) -> Result<Self, MultilinearError> {
        Self::new(self.sections.iter().map(|s| s.image(b)).collect::<Result<_, _>>()?)
    }

    /// Every section of `self` equals a section of `other`.
    pub fn is_subfamily_of(&self, other: &Self) -> bool {
        self.sections.iter().all(|s| other.sections.iter().any(|t| s.same_subspace(t)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvariancePair {
    pub matrix: usize,
    pub section: usize,
    /// Section of the family equal to the image, if any.
    pub image_of: Option<usize>,
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub pairs: Vec<InvariancePair>,
    pub invariant: bool,
}

/// Checks whether each `Lambda^k B` maps every section of `family` onto
/// some section of the family. Falsifies candidate invariant families; a
/// positive answer says nothing about other families.
pub fn arrangement_invariance_check(matrices: &[DMatrix<f64>], family: &LinearArrangement<f64>, tol: f64) -> Result<InvarianceReport, MultilinearError> {
    let mut pairs = Vec::new();
    for (mi, b) in matrices.iter().enumerate() {
        let bm = Mat::from_f64(b);
        for (si, s) in family.sections.iter().enumerate() {
            let img = s.image(&bm)?;
            let best = family
                .sections
                .iter()
                .enumerate()
                .filter(|(_, t)| t.dim() == img.dim())
                .map(|(ti, t)| (ti, img.distance(t).unwrap_or(f64::INFINITY)))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            let (image_of, distance) = match best {
                Some((ti, dist)) if dist < tol => (Some(ti), dist),
                Some((_, dist)) => (None, dist),
                None => (None, f64::INFINITY),
            };
            pairs.push(InvariancePair {
                matrix: mi,
                section: si,
                image_of,
                distance,
            });
        }
    }
    let invariant = pairs.iter().all(|p| p.image_of.is_some());
    Ok(InvarianceReport { pairs, invariant })
}
