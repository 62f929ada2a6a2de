//! Matrix cocycles over the shift: locally constant tables, fiber-bunching
//! certificates, renormalized iteration, holonomies, the reduced cocycle and
//! the adjoint cocycle.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{singular_values_desc, spectral_norm, Mat};
use crate::markov::Side;
use crate::scalar::{scalar_from_json, Scalar};
use crate::symbolic::{format_word, parse_word, Sidedness, SubshiftSpec, Symbol, SymbolicError, SymbolicPoint};

/// Largest accepted condition number of a table entry.
pub const MAX_CONDITION: f64 = 1e12;

/// Default holonomy tolerance.
pub const HOLONOMY_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CocycleError {
    #[error("table entry for word {0} is missing")]
    MissingWord(String),
    #[error("table word {0} is not an admissible word of length {1}")]
    BadWord(String, usize),
    #[error("table entry {0} must be {1}x{1}")]
    Shape(String, usize),
    #[error("table entry {0} is singular or has condition number {1:.3e}")]
    IllConditioned(String, f64),
    #[error("fiber-bunching certificate is invalid (ratio {0})")]
    NotBunched(f64),
    #[error("points are not on a common local {0:?} leaf")]
    NotOnLeaf(Side),
    #[error("holonomy did not reach the requested tolerance")]
    Truncation,
    #[error("point has no symbol at index {0}")]
    OutOfDomain(i64),
    #[error("could not parse matrix entry {0}")]
    Parse(String),
    #[error("time n={0} is not a stable merge time for these points")]
    BadTime(i64),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
}

/// A matrix cocycle over `sigma^dir`, evaluated in `f64`.
pub trait Cocycle: Send + Sync {
    fn dim(&self) -> usize;

    /// `+1` for a cocycle over the shift, `-1` for one over its inverse.
    fn time_direction(&self) -> i64 {
        1
    }

    /// Generator evaluated at `sigma^j x` (the base shift, whatever the
    /// time direction).
    fn matrix_at_index(&self, x: &SymbolicPoint, j: i64) -> Result<DMatrix<f64>, CocycleError>;

    fn matrix_at(&self, x: &SymbolicPoint) -> Result<DMatrix<f64>, CocycleError> {
        self.matrix_at_index(x, 0)
    }

    /// Generator at the `i`-th point of the cocycle's own orbit.
    fn matrix_along(&self, x: &SymbolicPoint, i: i64) -> Result<DMatrix<f64>, CocycleError> {
        self.matrix_at_index(x, self.time_direction() * i)
    }
}

/// A renormalized product: the true matrix is `exp(log_scale) * matrix`.
#[derive(Clone, Debug, PartialEq)]
pub struct Iterate {
    pub matrix: DMatrix<f64>,
    pub log_scale: f64,
}

impl Iterate {
    pub fn identity(d: usize) -> Self {
        Self {
            matrix: DMatrix::identity(d, d),
            log_scale: 0.0,
        }
    }

    /// The unnormalized product; may overflow for long products.
    pub fn value(&self) -> DMatrix<f64> {
        &self.matrix * self.log_scale.exp()
    }

    fn normalize(mut self) -> Self {
        let s = spectral_norm(&self.matrix);
        if s > 0.0 && s.is_finite() {
            self.matrix /= s;
            self.log_scale += s.ln();
        }
        self
    }
}

/// Product of the generators at orbit steps `start..start+len`, latest
/// factor on the left, renormalized at every step.
pub fn product_along<C: Cocycle + ?Sized>(c: &C, x: &SymbolicPoint, start: i64, len: usize) -> Result<Iterate, CocycleError> {
    let mut m = DMatrix::identity(c.dim(), c.dim());
    let mut log_scale = 0.0;
    for i in start..start + len as i64 {
        m = c.matrix_along(x, i)? * m;
        let f = m.norm();
        m /= f;
        log_scale += f.ln();
    }
    Ok(Iterate { matrix: m, log_scale }.normalize())
}

/// `A^n(x)` for any integer `n`; negative `n` means `(A^{|n|}(f^{n} x))^{-1}`.
pub fn iterate<C: Cocycle + ?Sized>(c: &C, x: &SymbolicPoint, n: i64) -> Result<Iterate, CocycleError> {
    if n >= 0 {
        return product_along(c, x, 0, n as usize);
    }
    let d = c.dim();
    let mut m = DMatrix::identity(d, d);
    let mut log_scale = 0.0;
    for i in (n..0).rev() {
        let inv = c
            .matrix_along(x, i)?
            .try_inverse()
            .ok_or_else(|| CocycleError::IllConditioned("generator".into(), f64::INFINITY))?;
        m = inv * m;
        let f = m.norm();
        m /= f;
        log_scale += f.ln();
    }
    Ok(Iterate { matrix: m, log_scale }.normalize())
}

/// Fiber-bunching data of a locally constant cocycle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HolonomyDefects {
    pub identity: f64,
    pub composition: f64,
    pub intertwining: f64,
}

impl HolonomyDefects {
    pub fn max(&self) -> f64 {
        self.identity.max(self.composition).max(self.intertwining)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BunchingCertificate {
    pub alpha: f64,
    pub bunching_ratio: f64,
    pub holder_seminorm: f64,
}

impl BunchingCertificate {
    pub fn is_valid(&self) -> bool {
        self.bunching_ratio < 1.0
    }

    /// Errors unless the certificate is valid.
    pub fn require(&self) -> Result<(), CocycleError> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(CocycleError::NotBunched(self.bunching_ratio))
        }
    }
}

/// Holonomy between two fibers along a stable or unstable set.
#[derive(Clone, Debug, PartialEq)]
pub struct Holonomy {
    pub from: SymbolicPoint,
    pub to: SymbolicPoint,
    pub side: Side,
    pub matrix: DMatrix<f64>,
    pub truncation_error: f64,
    /// Number of factor pairs in the exact telescoped product.
    pub depth: usize,
}

/// Cocycle whose value depends on the symbols at indices `-w..=w`.
#[derive(Clone, Debug)]
pub struct LocallyConstantCocycle<T = f64> {
    spec: SubshiftSpec,
    window: usize,
    dim: usize,
    table: Vec<Option<Mat<T>>>,
    inverse: Vec<Option<Mat<T>>>,
    table_f64: Vec<Option<DMatrix<f64>>>,
    inverse_f64: Vec<Option<DMatrix<f64>>>,
}

impl<T: Scalar> LocallyConstantCocycle<T> {
    pub fn new(spec: SubshiftSpec, window: usize, entries: BTreeMap<Vec<Symbol>, Mat<T>>) -> Result<Self, CocycleError> {
        let len = 2 * window + 1;
        let m = spec.alphabet_size();
        let size = m.pow(len as u32);
        let dim = entries.values().next().map_or(0, Mat::rows);
        let mut table = vec![None; size];
        for (w, a) in entries {
            let name = format_word(&w);
            if w.len() != len || !spec.is_admissible_word(&w) {
                return Err(CocycleError::BadWord(name, len));
            }
            if a.rows() != dim || a.cols() != dim || dim == 0 {
                return Err(CocycleError::Shape(name, dim.max(1)));
            }
            table[word_code(&w, m)] = Some(a);
        }
        for w in spec.words(len) {
            if table[word_code(&w, m)].is_none() {
                return Err(CocycleError::MissingWord(format_word(&w)));
            }
        }
        let table_f64: Vec<Option<DMatrix<f64>>> = table.iter().map(|a| a.as_ref().map(Mat::to_f64)).collect();
        let mut inverse = vec![None; size];
        let mut inverse_f64 = vec![None; size];
        for w in spec.words(len) {
            let c = word_code(&w, m);
            let af = table_f64[c].as_ref().expect("covered");
            let s = singular_values_desc(af);
            let cond = s[0] / s[dim - 1];
            if !(cond.is_finite() && cond < MAX_CONDITION) {
                return Err(CocycleError::IllConditioned(format_word(&w), cond));
            }
            let inv = if T::EXACT {
                table[c].as_ref().expect("covered").inverse()
            } else {
                af.clone().try_inverse().map(|i| Mat::from_f64(&i))
            }
            .ok_or_else(|| CocycleError::IllConditioned(format_word(&w), f64::INFINITY))?;
            inverse_f64[c] = Some(inv.to_f64());
            inverse[c] = Some(inv);
        }
        Ok(Self {
            spec,
            window,
            dim,
            table,
            inverse,
            table_f64,
            inverse_f64,
        })
    }

    /// Table built by evaluating `f` on every admissible window word.
    pub fn from_fn(spec: SubshiftSpec, window: usize, f: impl Fn(&[Symbol]) -> Mat<T>) -> Result<Self, CocycleError> {
        let entries = spec.words(2 * window + 1).into_iter().map(|w| {
            let a = f(&w);
            (w, a)
        });
        Self::new(spec, window, entries.collect())
    }

    /// Window-0 cocycle taking the value `generators[x_0]`.
    pub fn from_generators(spec: SubshiftSpec, generators: Vec<Mat<T>>) -> Result<Self, CocycleError> {
        Self::from_fn(spec, 0, |w| generators[w[0] as usize].clone())
    }

    pub fn constant(spec: SubshiftSpec, a: Mat<T>) -> Result<Self, CocycleError> {
        Self::from_fn(spec, 0, |_| a.clone())
    }

    pub fn spec(&self) -> &SubshiftSpec {
        &self.spec
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// Every table entry, in lexicographic word order.
    pub fn entries(&self) -> Vec<(Vec<Symbol>, &Mat<T>)> {
        let m = self.spec.alphabet_size();
        self.spec
            .words(2 * self.window + 1)
            .into_iter()
            .map(|w| {
                let a = self.table[word_code(&w, m)].as_ref().expect("covered");
                (w, a)
            })
            .collect()
    }

    pub fn entry(&self, word: &[Symbol]) -> Option<&Mat<T>> {
        if word.len() != 2 * self.window + 1 || !self.spec.is_admissible_word(word) {
            return None;
        }
        self.table[word_code(word, self.spec.alphabet_size())].as_ref()
    }

    /// Table index of the window word of `x` centered at index `j`.
    fn code_at(&self, x: &SymbolicPoint, j: i64) -> Result<usize, CocycleError> {
        let m = self.spec.alphabet_size();
        let w = self.window as i64;
        let mut c = 0;
        for i in j - w..=j + w {
            let s = x.symbol(i).ok_or(CocycleError::OutOfDomain(i))?;
            c = c * m + s as usize;
        }
        Ok(c)
    }

    pub fn exact_matrix_at_index(&self, x: &SymbolicPoint, j: i64) -> Result<Mat<T>, CocycleError> {
        Ok(self.table[self.code_at(x, j)?].clone().expect("admissible point"))
    }

    fn inverse_f64_at(&self, x: &SymbolicPoint, j: i64) -> Result<&DMatrix<f64>, CocycleError> {
        Ok(self.inverse_f64[self.code_at(x, j)?].as_ref().expect("admissible point"))
    }

    fn f64_at(&self, x: &SymbolicPoint, j: i64) -> Result<&DMatrix<f64>, CocycleError> {
        Ok(self.table_f64[self.code_at(x, j)?].as_ref().expect("admissible point"))
    }

    /// Fiber-bunching ratio `max ||A|| ||A^{-1}|| 2^{-alpha}` over the table,
    /// with the alpha-Holder seminorm of the table.
    pub fn certify_bunching(&self, alpha: f64) -> BunchingCertificate {
        let entries: Vec<(Vec<Symbol>, DMatrix<f64>)> = self
            .entries()
            .into_iter()
            .map(|(w, a)| (w, a.to_f64()))
            .collect();
        let bunching_ratio = entries
            .iter()
            .map(|(_, a)| {
                let s = singular_values_desc(a);
                s[0] / s[s.len() - 1] * 2f64.powf(-alpha)
            })
            .fold(0.0, f64::max);
        let w = self.window as i64;
        let mut holder_seminorm: f64 = 0.0;
        for (u, a) in &entries {
            for (v, b) in &entries {
                let depth = (0..=w).find(|&n| u[(w + n) as usize] != v[(w + n) as usize] || u[(w - n) as usize] != v[(w - n) as usize]);
                if let Some(n) = depth {
                    let diff = spectral_norm(&(a - b));
                    holder_seminorm = holder_seminorm.max(diff * 2f64.powf(alpha * n as f64));
                }
            }
        }
        BunchingCertificate {
            alpha,
            bunching_ratio,
            holder_seminorm,
        }
    }

    /// Telescoped stable product `(A^n(y))^{-1} A^n(x)` taken far enough
    /// that every further factor pair cancels exactly. Pairs at orbit times
    /// where both window words coincide and nothing is left inside are
    /// skipped, so the value is the limit itself.
    fn stable_telescope(&self, x: &SymbolicPoint, y: &SymbolicPoint) -> Result<(DMatrix<f64>, usize), CocycleError> {
        let merge = x.stable_merge_time(y).map_err(|_| CocycleError::NotOnLeaf(Side::Stable))?;
        let depth = (merge + self.window as i64).max(0) as usize;
        let mut p = DMatrix::identity(self.dim, self.dim);
        let mut started = false;
        for k in (0..depth as i64).rev() {
            let (cx, cy) = (self.code_at(x, k)?, self.code_at(y, k)?);
            if !started && cx == cy {
                continue;
            }
            started = true;
            p = self.inverse_f64[cy].as_ref().expect("covered") * p * self.table_f64[cx].as_ref().expect("covered");
        }
        Ok((p, depth))
    }

    /// Mirror of [`Self::stable_telescope`]:
    /// `A^n(sigma^{-n} y) (A^n(sigma^{-n} x))^{-1}`.
    fn unstable_telescope(&self, x: &SymbolicPoint, y: &SymbolicPoint) -> Result<(DMatrix<f64>, usize), CocycleError> {
        let agree = unstable_agreement(x, y).ok_or(CocycleError::NotOnLeaf(Side::Unstable))?;
        let depth = (self.window as i64 - agree - 1).max(0) as usize;
        let mut p = DMatrix::identity(self.dim, self.dim);
        let mut started = false;
        for k in (1..=depth as i64).rev() {
            let (cx, cy) = (self.code_at(x, -k)?, self.code_at(y, -k)?);
            if !started && cx == cy {
                continue;
            }
            started = true;
            p = self.table_f64[cy].as_ref().expect("covered") * p * self.inverse_f64[cx].as_ref().expect("covered");
        }
        Ok((p, depth))
    }

    fn finish(&self, side: Side, x: &SymbolicPoint, y: &SymbolicPoint, p: DMatrix<f64>, depth: usize, cert: &BunchingCertificate, tol: f64) -> Result<Holonomy, CocycleError> {
        // One more factor pair beyond the exactness depth leaves the product
        // unchanged, so the geometric tail bound b/(1-b) * |P_{n+1} - P_n| is 0.
        let b = cert.bunching_ratio;
        let increment = 0.0;
        let truncation_error = increment * b / (1.0 - b);
        if truncation_error > tol {
            return Err(CocycleError::Truncation);
        }
        Ok(Holonomy {
            from: x.clone(),
            to: y.clone(),
            side,
            matrix: p,
            truncation_error,
            depth,
        })
    }

    /// Local stable holonomy `H^s_{xy} = lim (A^n(y))^{-1} A^n(x)` for `y` on
    /// the local stable set of `x`.
    pub fn stable_holonomy(&self, cert: &BunchingCertificate, x: &SymbolicPoint, y: &SymbolicPoint, tol: f64) -> Result<Holonomy, CocycleError> {
        cert.require()?;
        if !two_sided(x, y) || !y.on_local_stable_leaf(x) {
            return Err(CocycleError::NotOnLeaf(Side::Stable));
        }
        let (p, depth) = self.stable_telescope(x, y)?;
        self.finish(Side::Stable, x, y, p, depth, cert, tol)
    }

    /// Local unstable holonomy `H^u_{xy} = lim A^n(sigma^{-n} y) (A^n(sigma^{-n} x))^{-1}`
    /// for `y` on the local unstable set of `x`.
    pub fn unstable_holonomy(&self, cert: &BunchingCertificate, x: &SymbolicPoint, y: &SymbolicPoint, tol: f64) -> Result<Holonomy, CocycleError> {
        cert.require()?;
        if !two_sided(x, y) || !y.on_local_unstable_leaf(x) {
            return Err(CocycleError::NotOnLeaf(Side::Unstable));
        }
        let (p, depth) = self.unstable_telescope(x, y)?;
        self.finish(Side::Unstable, x, y, p, depth, cert, tol)
    }

    /// Unstable holonomy between any two backward-asymptotic points.
    pub fn global_unstable_holonomy(&self, cert: &BunchingCertificate, x: &SymbolicPoint, y: &SymbolicPoint, tol: f64) -> Result<Holonomy, CocycleError> {
        cert.require()?;
        if !two_sided(x, y) {
            return Err(CocycleError::NotOnLeaf(Side::Unstable));
        }
        let (p, depth) = self.unstable_telescope(x, y)?;
        self.finish(Side::Unstable, x, y, p, depth, cert, tol)
    }

    /// Relative defects of the identity, composition and intertwining
    /// relations for stable holonomies among `x`, `y`, `z` on one local
    /// stable set.
    pub fn stable_holonomy_defects(&self, cert: &BunchingCertificate, x: &SymbolicPoint, y: &SymbolicPoint, z: &SymbolicPoint) -> Result<HolonomyDefects, CocycleError> {
        let h = |a: &SymbolicPoint, b: &SymbolicPoint| self.stable_holonomy(cert, a, b, HOLONOMY_TOL).map(|h| h.matrix);
        let d = self.dim;
        let rel = |a: &DMatrix<f64>, b: &DMatrix<f64>| (a - b).norm() / b.norm();
        let identity = rel(&h(x, x)?, &DMatrix::identity(d, d));
        let hxz = h(x, z)?;
        let composition = rel(&(h(y, z)? * h(x, y)?), &hxz);
        let (sx, sy) = (x.shifted(1), y.shifted(1));
        let ax = self.matrix_at(x)?;
        let intertwining = rel(&(h(&sy, &sx)? * self.matrix_at(y)? * h(x, y)?), &ax);
        Ok(HolonomyDefects {
            identity,
            composition,
            intertwining,
        })
    }

    /// Global stable holonomy `(A^n(y))^{-1} H^s_{sigma^n x, sigma^n y} A^n(x)`
    /// at the minimal `n` bringing the points onto a common local stable set.
    pub fn global_stable_holonomy(&self, cert: &BunchingCertificate, x: &SymbolicPoint, y: &SymbolicPoint, tol: f64) -> Result<Holonomy, CocycleError> {
        if !two_sided(x, y) {
            return Err(CocycleError::NotOnLeaf(Side::Stable));
        }
        let n = x.stable_merge_time(y).map_err(|_| CocycleError::NotOnLeaf(Side::Stable))?;
        self.global_stable_holonomy_at(cert, x, y, n, tol)
    }

    /// The global stable holonomy formula evaluated at a given valid `n`.
    pub fn global_stable_holonomy_at(&self, cert: &BunchingCertificate, x: &SymbolicPoint, y: &SymbolicPoint, n: i64, tol: f64) -> Result<Holonomy, CocycleError> {
        cert.require()?;
        if n < 0 || !x.agrees_from(y, n) {
            return Err(CocycleError::BadTime(n));
        }
        let (xn, yn) = (x.shifted(n), y.shifted(n));
        let local = self.stable_holonomy(cert, &xn, &yn, tol)?;
        let ax = iterate(self, x, n)?;
        let ay = iterate(self, y, n)?;
        let ay_inv = ay
            .matrix
            .clone()
            .try_inverse()
            .ok_or_else(|| CocycleError::IllConditioned("product".into(), f64::INFINITY))?;
        let matrix = ay_inv * &local.matrix * &ax.matrix * (ax.log_scale - ay.log_scale).exp();
        Ok(Holonomy {
            from: x.clone(),
            to: y.clone(),
            side: Side::Stable,
            matrix,
            truncation_error: local.truncation_error,
            depth: local.depth + n as usize,
        })
    }

    /// Exact stable holonomy in the table's scalar type.
    pub fn stable_holonomy_exact(&self, x: &SymbolicPoint, y: &SymbolicPoint) -> Result<Mat<T>, CocycleError> {
        if !two_sided(x, y) {
            return Err(CocycleError::NotOnLeaf(Side::Stable));
        }
        let merge = x.stable_merge_time(y).map_err(|_| CocycleError::NotOnLeaf(Side::Stable))?;
        let depth = (merge + self.window as i64).max(0);
        let mut p = Mat::identity(self.dim);
        for k in (0..depth).rev() {
            let (cx, cy) = (self.code_at(x, k)?, self.code_at(y, k)?);
            p = self.inverse[cy].as_ref().expect("covered").mul(&p).mul(self.table[cx].as_ref().expect("covered"));
        }
        Ok(p)
    }

    /// Exact unstable holonomy in the table's scalar type.
    pub fn unstable_holonomy_exact(&self, x: &SymbolicPoint, y: &SymbolicPoint) -> Result<Mat<T>, CocycleError> {
        if !two_sided(x, y) {
            return Err(CocycleError::NotOnLeaf(Side::Unstable));
        }
        let agree = unstable_agreement(x, y).ok_or(CocycleError::NotOnLeaf(Side::Unstable))?;
        let depth = (self.window as i64 - agree - 1).max(0);
        let mut p = Mat::identity(self.dim);
        for k in (1..=depth).rev() {
            let (cx, cy) = (self.code_at(x, -k)?, self.code_at(y, -k)?);
            p = self.table[cy].as_ref().expect("covered").mul(&p).mul(self.inverse[cx].as_ref().expect("covered"));
        }
        Ok(p)
    }

    /// Exact product `A^n(x)` for `n >= 0`.
    pub fn exact_iterate(&self, x: &SymbolicPoint, n: usize) -> Result<Mat<T>, CocycleError> {
        let mut p = Mat::identity(self.dim);
        for i in 0..n as i64 {
            p = self.exact_matrix_at_index(x, i)?.mul(&p);
        }
        Ok(p)
    }

    /// Same table with every entry conjugated: `C^{-1} A C`.
    pub fn conjugated(&self, c: &Mat<T>) -> Result<Self, CocycleError> {
        let ci = c
            .inverse()
            .ok_or_else(|| CocycleError::IllConditioned("conjugator".into(), f64::INFINITY))?;
        let entries = self.entries().into_iter().map(|(w, a)| (w, ci.mul(a).mul(c))).collect();
        Self::new(self.spec.clone(), self.window, entries)
    }

    /// The reduced cocycle, using one past basepoint per zeroth symbol.
    pub fn reduce(&self, cert: &BunchingCertificate, basepoints: Vec<SymbolicPoint>) -> Result<ReducedCocycle<T>, CocycleError> {
        cert.require()?;
        let m = self.spec.alphabet_size();
        if basepoints.len() != m {
            return Err(CocycleError::Symbolic(SymbolicError::Sidedness(format!(
                "reduction needs {m} basepoints, one per symbol"
            ))));
        }
        for (i, b) in basepoints.iter().enumerate() {
            self.spec.validate(b)?;
            if b.sidedness() != Sidedness::Past || b.symbol(0) != Some(i as Symbol) {
                return Err(CocycleError::Symbolic(SymbolicError::Sidedness(format!(
                    "basepoint {i} must be a past point ending in symbol {i}"
                ))));
            }
        }
        Ok(ReducedCocycle {
            base: self.clone(),
            cert: cert.clone(),
            basepoints,
        })
    }

    /// [`Self::reduce`] with basepoints `(cycle through i)^inf . i`.
    pub fn reduce_default(&self, cert: &BunchingCertificate) -> Result<ReducedCocycle<T>, CocycleError> {
        let s = &self.spec;
        let bases = (0..s.alphabet_size() as Symbol)
            .map(|i| s.past_point(s.shortest_cycle_through(i), vec![i]))
            .collect::<Result<Vec<_>, _>>()?;
        self.reduce(cert, bases)
    }
}

impl<T: Scalar> Cocycle for LocallyConstantCocycle<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn matrix_at_index(&self, x: &SymbolicPoint, j: i64) -> Result<DMatrix<f64>, CocycleError> {
        self.f64_at(x, j).cloned()
    }
}

impl<T: Scalar> LocallyConstantCocycle<T> {
    pub fn inverse_at_index(&self, x: &SymbolicPoint, j: i64) -> Result<DMatrix<f64>, CocycleError> {
        self.inverse_f64_at(x, j).cloned()
    }
}

impl LocallyConstantCocycle<f64> {
    pub fn constant_matrix(spec: SubshiftSpec, a: &DMatrix<f64>) -> Result<Self, CocycleError> {
        Self::constant(spec, Mat::from_f64(a))
    }

    /// Window-0 cocycle taking the value `generators[x_0]`.
    pub fn from_matrices(spec: SubshiftSpec, generators: &[DMatrix<f64>]) -> Result<Self, CocycleError> {
        Self::from_generators(spec, generators.iter().map(Mat::from_f64).collect())
    }

    pub fn from_matrix_fn(spec: SubshiftSpec, window: usize, f: impl Fn(&[Symbol]) -> DMatrix<f64>) -> Result<Self, CocycleError> {
        Self::from_fn(spec, window, |w| Mat::from_f64(&f(w)))
    }
}

fn two_sided(x: &SymbolicPoint, y: &SymbolicPoint) -> bool {
    x.sidedness() == Sidedness::TwoSided && y.sidedness() == Sidedness::TwoSided
}

/// Largest `a` with the points agreeing on every index `<= a`, or `None`
/// when they are not backward asymptotic.
fn unstable_agreement(x: &SymbolicPoint, y: &SymbolicPoint) -> Option<i64> {
    x.backward_agreement(y).ok().map(|a| a.unwrap_or(i64::MAX / 4))
}

fn word_code(w: &[Symbol], m: usize) -> usize {
    w.iter().fold(0, |c, &s| c * m + s as usize)
}

/// Conjugate of a locally constant cocycle by stable holonomies onto
/// reference past points; constant along local stable sets.
#[derive(Clone, Debug)]
pub struct ReducedCocycle<T = f64> {
    base: LocallyConstantCocycle<T>,
    cert: BunchingCertificate,
    basepoints: Vec<SymbolicPoint>,
}

impl<T: Scalar> ReducedCocycle<T> {
    /// `W^u_loc(x^-) ∩ W^s_loc(x)` for the basepoint matching `x_0`.
    pub fn projection(&self, x: &SymbolicPoint) -> Result<SymbolicPoint, CocycleError> {
        let x0 = x.symbol(0).ok_or(CocycleError::OutOfDomain(0))?;
        Ok(SymbolicPoint::splice(&self.basepoints[x0 as usize], x, 1))
    }

    pub fn base(&self) -> &LocallyConstantCocycle<T> {
        &self.base
    }

    /// Value through the second form of the definition,
    /// `H^s_{sigma(phi x), phi(sigma x)} A(phi x)`.
    pub fn matrix_via_projection(&self, x: &SymbolicPoint) -> Result<DMatrix<f64>, CocycleError> {
        let px = self.projection(x)?;
        let sx = x.shifted(1);
        let psx = self.projection(&sx)?;
        let h = self.base.global_stable_holonomy(&self.cert, &px.shifted(1), &psx, HOLONOMY_TOL)?;
        Ok(h.matrix * self.base.matrix_at(&px)?)
    }
}

impl<T: Scalar> Cocycle for ReducedCocycle<T> {
    fn dim(&self) -> usize {
        self.base.dim
    }

    /// `H^s_{sigma x, phi(sigma x)} A(x) H^s_{phi(x), x}` at `sigma^j x`.
    fn matrix_at_index(&self, x: &SymbolicPoint, j: i64) -> Result<DMatrix<f64>, CocycleError> {
        if x.sidedness() != Sidedness::TwoSided {
            return Err(CocycleError::OutOfDomain(j));
        }
        let xj = x.shifted(j);
        let sx = x.shifted(j + 1);
        let pj = self.projection(&xj)?;
        let ps = self.projection(&sx)?;
        let into = self.base.stable_holonomy(&self.cert, &pj, &xj, HOLONOMY_TOL)?;
        let out = self.base.stable_holonomy(&self.cert, &sx, &ps, HOLONOMY_TOL)?;
        Ok(out.matrix * self.base.matrix_at_index(x, j)? * into.matrix)
    }
}

/// `B(x) = A(sigma^{-1} x)^T`, a cocycle over the inverse shift.
#[derive(Clone, Debug)]
pub struct AdjointCocycle<C> {
    base: C,
}

impl<C: Cocycle> AdjointCocycle<C> {
    pub fn new(base: C) -> Self {
        Self { base }
    }

    pub fn base(&self) -> &C {
        &self.base
    }
}

impl<C: Cocycle> Cocycle for AdjointCocycle<C> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn time_direction(&self) -> i64 {
        -self.base.time_direction()
    }

    fn matrix_at_index(&self, x: &SymbolicPoint, j: i64) -> Result<DMatrix<f64>, CocycleError> {
        Ok(self.base.matrix_at_index(x, j - self.base.time_direction())?.transpose())
    }
}

pub fn adjoint_cocycle<C: Cocycle>(a: C) -> AdjointCocycle<C> {
    AdjointCocycle::new(a)
}

impl<C: Cocycle + ?Sized> Cocycle for &C {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn time_direction(&self) -> i64 {
        (**self).time_direction()
    }

    fn matrix_at_index(&self, x: &SymbolicPoint, j: i64) -> Result<DMatrix<f64>, CocycleError> {
        (**self).matrix_at_index(x, j)
    }
}

/// JSON table: `{"d": 2, "window": 0, "entries": {"0": [[..],[..]], ...}}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CocycleJson {
    pub d: usize,
    pub window: usize,
    pub entries: BTreeMap<String, Vec<Vec<serde_json::Value>>>,
}

impl CocycleJson {
    pub fn to_cocycle<T: Scalar>(&self, spec: &SubshiftSpec) -> Result<LocallyConstantCocycle<T>, CocycleError> {
        let mut entries = BTreeMap::new();
        for (word, rows) in &self.entries {
            let w = parse_word(word)?;
            if rows.len() != self.d || rows.iter().any(|r| r.len() != self.d) {
                return Err(CocycleError::Shape(word.clone(), self.d));
            }
            let parsed = rows
                .iter()
                .map(|r| {
                    r.iter()
                        .map(|v| scalar_from_json::<T>(v).ok_or_else(|| CocycleError::Parse(v.to_string())))
                        .collect::<Result<Vec<T>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?;
            entries.insert(w, Mat::from_rows(&parsed));
        }
        LocallyConstantCocycle::new(spec.clone(), self.window, entries)
    }

    pub fn from_cocycle<T: Scalar>(c: &LocallyConstantCocycle<T>) -> Self {
        CocycleJson {
            d: c.dim,
            window: c.window,
            entries: c
                .entries()
                .into_iter()
                .map(|(w, a)| {
                    let rows = a.to_rows().iter().map(|r| r.iter().map(Scalar::to_json).collect()).collect();
                    (format_word(&w), rows)
                })
                .collect(),
        }
    }
}
