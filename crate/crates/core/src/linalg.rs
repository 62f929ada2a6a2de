//! Dense linear algebra: a small generic matrix for exact elimination and
//! nalgebra-backed helpers for the floating-point code.

use nalgebra::DMatrix;

use crate::scalar::Scalar;

/// Singular values below this fraction of the largest are treated as zero.
pub const RANK_THRESHOLD: f64 = 1e-8;

/// Row-major dense matrix over a [`Scalar`].
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    /// Builds a matrix from row vectors; all rows must share a length.
    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self {
            rows: rows.len(),
            cols,
            data: rows.iter().flat_map(|r| r.iter().cloned()).collect(),
        }
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<T>], height: usize) -> Self {
        let mut m = Self::zeros(height, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), height, "column length mismatch");
            for (i, v) in c.iter().enumerate() {
                m[(i, j)] = v.clone();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    fn max_magnitude(&self) -> f64 {
        self.data.iter().map(Scalar::magnitude).fold(0.0, f64::max)
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].to_f64())
    }

    pub fn from_f64(a: &DMatrix<f64>) -> Self {
        let mut m = Self::zeros(a.nrows(), a.ncols());
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                m[(i, j)] = T::from_f64(a[(i, j)]);
            }
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn mul(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)].clone() + a.clone() * other[(k, j)].clone();
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// Gauss-Jordan inverse, or `None` for a singular matrix.
    pub fn inverse(&self) -> Option<Mat<T>> {
        let n = self.rows;
        if n != self.cols {
            return None;
        }
        let mut aug = Self::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n + i)] = T::one();
        }
        let (r, pivots) = rref(&aug);
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let mut inv = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv[(i, j)] = r[(i, n + j)].clone();
            }
        }
        Some(inv)
    }
}

impl<T> std::ops::Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Reduced row echelon form. Returns the reduced matrix and its pivot
/// columns. Pivots are chosen by largest magnitude so the same routine is
/// usable (if less robust than SVD) for floats.
pub fn rref<T: Scalar>(m: &Mat<T>) -> (Mat<T>, Vec<usize>) {
    let mut a = m.clone();
    let scale = a.max_magnitude();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..a.cols {
        if r == a.rows {
            break;
        }
        let best = (r..a.rows)
            .filter(|&i| !a[(i, c)].is_negligible(scale))
            .max_by(|&i, &j| a[(i, c)].magnitude().total_cmp(&a[(j, c)].magnitude()));
        let Some(p) = best else {
            for i in r..a.rows {
                a[(i, c)] = T::zero();
            }
            continue;
        };
        if p != r {
            for j in 0..a.cols {
                let tmp = a[(p, j)].clone();
                a[(p, j)] = a[(r, j)].clone();
                a[(r, j)] = tmp;
            }
        }
        let inv = T::one() / a[(r, c)].clone();
        for j in 0..a.cols {
            a[(r, j)] = a[(r, j)].clone() * inv.clone();
        }
        for i in 0..a.rows {
            if i == r || a[(i, c)].is_zero() {
                continue;
            }
            let f = a[(i, c)].clone();
            for j in 0..a.cols {
                let v = a[(r, j)].clone() * f.clone();
                a[(i, j)] = a[(i, j)].clone() - v;
            }
            a[(i, c)] = T::zero();
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

/// Null space basis from the reduced row echelon form: one vector per free
/// column, with a 1 in that column.
pub fn kernel_by_elimination<T: Scalar>(m: &Mat<T>) -> Vec<Vec<T>> {
    let (r, pivots) = rref(m);
    let free: Vec<usize> = (0..m.cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![T::zero(); m.cols];
            v[f] = T::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -r[(row, f)].clone();
            }
            v
        })
        .collect()
}

/// Null space by singular value decomposition, with singular values below
/// `rel_tol * sigma_max` treated as zero. Returns orthonormal vectors.
pub fn kernel_by_svd(m: &Mat<f64>, rel_tol: f64) -> Vec<Vec<f64>> {
    kernel_f64(&m.to_f64(), rel_tol)
}

/// Orthonormal null space basis of a real matrix.
pub fn kernel_f64(a: &DMatrix<f64>, rel_tol: f64) -> Vec<Vec<f64>> {
    if a.ncols() == 0 {
        return Vec::new();
    }
    let (w, v) = jacobi_columns(a);
    let sigma: Vec<f64> = w.column_iter().map(|c| c.norm()).collect();
    let smax = sigma.iter().cloned().fold(0.0, f64::max);
    let cutoff = rel_tol * smax;
    (0..a.ncols())
        .filter(|&i| smax == 0.0 || sigma[i] <= cutoff)
        .map(|i| v.column(i).iter().cloned().collect())
        .collect()
}

pub fn rank<T: Scalar>(m: &Mat<T>) -> usize {
    m.cols() - T::kernel(m).len()
}

/// Dimension of the span of a list of vectors of length `n`.
pub fn span_rank<T: Scalar>(vectors: &[Vec<T>], n: usize) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    rank(&Mat::from_columns(vectors, n))
}

/// Whether two finite lists of vectors span the same subspace.
pub fn same_span<T: Scalar>(a: &[Vec<T>], b: &[Vec<T>], n: usize) -> bool {
    let ra = span_rank(a, n);
    let rb = span_rank(b, n);
    if ra != rb {
        return false;
    }
    let mut all = a.to_vec();
    all.extend_from_slice(b);
    span_rank(&all, n) == ra
}

/// A linearly independent spanning set for the span of `vectors`: the
/// nonzero rows of the reduced row echelon form.
pub fn independent_basis<T: Scalar>(vectors: &[Vec<T>], n: usize) -> Vec<Vec<T>> {
    if vectors.is_empty() {
        return Vec::new();
    }
    if T::EXACT {
        let (r, pivots) = rref(&Mat::from_rows(vectors));
        return (0..pivots.len()).map(|i| r.row(i).to_vec()).collect();
    }
    let a = DMatrix::from_fn(n, vectors.len(), |i, j| vectors[j][i].to_f64());
    orthonormal_columns(&a, RANK_THRESHOLD)
        .column_iter()
        .map(|c| c.iter().map(|&x| T::from_f64(x)).collect())
        .collect()
}

/// Intersection of two subspaces of the same ambient space, given by
/// spanning lists.
pub fn intersect_spans<T: Scalar>(a: &[Vec<T>], b: &[Vec<T>], n: usize) -> Vec<Vec<T>> {
    let a = independent_basis(a, n);
    let b = independent_basis(b, n);
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut cols = a.clone();
    cols.extend(b.iter().map(|v| v.iter().map(|x| -x.clone()).collect()));
    let m = Mat::from_columns(&cols, n);
    let combos = T::kernel(&m);
    let vectors: Vec<Vec<T>> = combos
        .iter()
        .map(|c| {
            let mut v = vec![T::zero(); n];
            for (coef, basis) in c.iter().zip(&a) {
                for (vi, bi) in v.iter_mut().zip(basis) {
                    *vi = vi.clone() + coef.clone() * bi.clone();
                }
            }
            v
        })
        .collect();
    independent_basis(&vectors, n)
}

/// Orthonormal basis for the column space, rank decided by singular values.
pub fn orthonormal_columns(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    if a.ncols() == 0 || a.nrows() == 0 {
        return DMatrix::zeros(a.nrows(), 0);
    }
    let (u, s, _) = sorted_svd(a);
    let smax = s.first().copied().unwrap_or(0.0);
    let keep = s.iter().filter(|&&x| smax > 0.0 && x > rel_tol * smax).count();
    u.columns(0, keep).into_owned()
}

/// Largest singular value.
pub fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    singular_values_desc(a)[0]
}

/// Singular values sorted nonincreasing.
pub fn singular_values_desc(a: &DMatrix<f64>) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let (w, _) = jacobi_columns(a);
    let mut s: Vec<f64> = w.column_iter().map(|c| c.norm()).collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s.truncate(a.nrows().min(a.ncols()));
    s
}

/// One-sided Jacobi: `(w, v)` with `a v = w`, `v` orthogonal and the
/// columns of `w` mutually orthogonal.
fn jacobi_columns(a: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = a.ncols();
    let mut w = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _ in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dot(&w.column(q));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for m in [&mut w, &mut v] {
                    for r in 0..m.nrows() {
                        let (x, y) = (m[(r, p)], m[(r, q)]);
                        m[(r, p)] = c * x - s * y;
                        m[(r, q)] = s * x + c * y;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    (w, v)
}

/// Singular value decomposition with factors sorted by nonincreasing
/// singular value: returns `(u, sigma, v)` with `a = u diag(sigma) v^T`,
/// `r = min(rows, cols)` columns in `u` and `v`.
pub fn sorted_svd(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let (m, n) = a.shape();
    let r = m.min(n);
    let (w, v) = jacobi_columns(a);
    let norms: Vec<f64> = w.column_iter().map(|c| c.norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    order.truncate(r);
    let sigma: Vec<f64> = order.iter().map(|&i| norms[i]).collect();
    let floor = sigma.first().copied().unwrap_or(0.0) * f64::EPSILON * 1e-3;
    let mut u = DMatrix::<f64>::zeros(m, r);
    let mut filled = 0;
    for (c, &i) in order.iter().enumerate() {
        if norms[i] > floor && norms[i] > 0.0 {
            u.set_column(c, &(w.column(i) / norms[i]));
            filled = c + 1;
        }
    }
    // Complete with standard basis vectors orthogonalized against the rest.
    for c in filled..r {
        let mut best = (0.0, nalgebra::DVector::zeros(m));
        for e in 0..m {
            let mut x = nalgebra::DVector::zeros(m);
            x[e] = 1.0;
            for j in 0..c {
                let proj = u.column(j).dot(&x);
                x -= u.column(j) * proj;
            }
            let norm = x.norm();
            if norm > best.0 {
                best = (norm, x / norm);
            }
        }
        u.set_column(c, &best.1);
    }
    let v_sorted = DMatrix::from_fn(n, r, |row, c| v[(row, order[c])]);
    (u, sigma, v_sorted)
}

/// Dot product of two vectors of equal length.
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}
