//! Lyapunov exponents, singular flags and the geometric lemmas built on
//! them.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::cocycle::{product_along, AdjointCocycle, BunchingCertificate, Cocycle, CocycleError, LocallyConstantCocycle, HOLONOMY_TOL};
use crate::linalg::{orthonormal_columns, sorted_svd, spectral_norm, Mat, RANK_THRESHOLD};
use crate::markov::MarkovMeasure;
use crate::multilinear::{exterior_power, grassmann_distance, principal_angle, GrassmannPoint, KVector, MultilinearError};
use crate::scalar::Scalar;
use crate::symbolic::SymbolicPoint;

/// Shortest orbit accepted by [`estimate_spectrum`].
pub const MIN_STEPS: usize = 1000;

/// Fewest orbit segments used for standard errors.
pub const MIN_BLOCKS: usize = 20;

const BOOTSTRAP_RESAMPLES: usize = 400;

/// Singular gaps at or below `1 + FLAG_GAP_TOL` leave the flag undefined.
pub const FLAG_GAP_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LyapunovError {
    #[error("flag undefined at this n (n={n}, k={k}, gap={gap})")]
    FlagUndefined { n: usize, k: usize, gap: f64 },
    #[error("singular gap {0} is not larger than 1")]
    GapFailure(f64),
    #[error("point is not periodic")]
    NotPeriodic,
    #[error("subspaces are not transversal (angle {0:.3e})")]
    NotTransversal(f64),
    #[error("orbit length {0} is below {MIN_STEPS}")]
    TooShort(usize),
    #[error("degree {0} is out of range for dimension {1}")]
    BadDegree(usize, usize),
    #[error(transparent)]
    Cocycle(#[from] CocycleError),
    #[error(transparent)]
    Multilinear(#[from] MultilinearError),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumEstimate {
    /// Nonincreasing exponents in nats per step.
    pub exponents: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub n_steps: usize,
    pub seed: u64,
    /// Orbit average of `log |det A|`.
    pub log_det_average: f64,
}

impl SpectrumEstimate {
    pub fn csv_header(d: usize) -> String {
        let mut cols = vec!["n".to_string()];
        cols.extend((1..=d).map(|i| format!("lambda{i}")));
        cols.extend((1..=d).map(|i| format!("se{i}")));
        cols.push("seed".into());
        cols.join(",")
    }

    pub fn to_csv_row(&self) -> String {
        let mut cols = vec![self.n_steps.to_string()];
        cols.extend(self.exponents.iter().map(|x| format!("{x:.12e}")));
        cols.extend(self.standard_errors.iter().map(|x| format!("{x:.12e}")));
        cols.push(self.seed.to_string());
        cols.join(",")
    }

    /// The gap `lambda_k - lambda_{k+1}` (1-based `k`) exceeds five standard
    /// errors.
    pub fn gap_is_resolved(&self, k: usize) -> bool {
        let (i, j) = (k - 1, k);
        self.exponents[i] - self.exponents[j] > 5.0 * (self.standard_errors[i] + self.standard_errors[j])
    }
}

/// Exponents along an orbit sampled from `mu`.
pub fn estimate_spectrum<C: Cocycle + ?Sized>(c: &C, mu: &MarkovMeasure<f64>, n: usize, seed: u64) -> Result<SpectrumEstimate, LyapunovError> {
    if n < MIN_STEPS {
        return Err(LyapunovError::TooShort(n));
    }
    let margin = 64;
    let x = mu.sample_orbit(2 * (n + margin) + 1, seed);
    spectrum_along(c, &x, n, seed)
}

/// Exponents from `n` steps of the cocycle's orbit of `x`, by repeated
/// QR factorization.
pub fn spectrum_along<C: Cocycle + ?Sized>(c: &C, x: &SymbolicPoint, n: usize, seed: u64) -> Result<SpectrumEstimate, LyapunovError> {
    let d = c.dim();
    let blocks = MIN_BLOCKS.max((n as f64).sqrt() as usize).min(n.max(1));
    let mut block_sums = vec![vec![0.0; d]; blocks];
    let mut block_lens = vec![0usize; blocks];
    let mut log_det = 0.0;
    let mut q = DMatrix::<f64>::identity(d, d);
    for i in 0..n {
        let a = c.matrix_along(x, i as i64)?;
        log_det += a.determinant().abs().ln();
        let qr = (a * &q).qr();
        let r = qr.r();
        q = qr.q();
        let b = i * blocks / n;
        for j in 0..d {
            block_sums[b][j] += r[(j, j)].abs().ln();
        }
        block_lens[b] += 1;
    }
    let totals: Vec<f64> = (0..d).map(|j| block_sums.iter().map(|s| s[j]).sum()).collect();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| totals[b].total_cmp(&totals[a]));
    let exponents: Vec<f64> = order.iter().map(|&j| totals[j] / n as f64).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
    let mut draws = vec![Vec::with_capacity(BOOTSTRAP_RESAMPLES); d];
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let mut sums = vec![0.0; d];
        let mut len = 0usize;
        for _ in 0..blocks {
            let b = rng.random_range(0..blocks);
            for (s, v) in sums.iter_mut().zip(&block_sums[b]) {
                *s += v;
            }
            len += block_lens[b];
        }
        for (j, &o) in order.iter().enumerate() {
            draws[j].push(sums[o] / len.max(1) as f64);
        }
    }
    let standard_errors = draws
        .iter()
        .map(|v| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
        })
        .collect();
    Ok(SpectrumEstimate {
        exponents,
        standard_errors,
        n_steps: n,
        seed,
        log_det_average: log_det / n as f64,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlagEstimate {
    /// Most expanded `k`-plane of `A^n(f^{-n} x)`.
    pub u_k: GrassmannPoint,
    /// Most contracted `(d-k)`-plane of `A^n(x)`.
    pub s_dk: GrassmannPoint,
    pub n: usize,
    /// Smaller of the two singular gaps `sigma_k / sigma_{k+1}`.
    pub gap: f64,
}

/// Product of `Lambda^k` of the generators at orbit steps `start..start+len`.
fn exterior_product<C: Cocycle + ?Sized>(c: &C, x: &SymbolicPoint, k: usize, start: i64, len: usize) -> Result<DMatrix<f64>, LyapunovError> {
    if k == 1 {
        return Ok(product_along(c, x, start, len)?.matrix);
    }
    let n = crate::multilinear::binomial(c.dim(), k);
    let mut m = DMatrix::identity(n, n);
    for i in start..start + len as i64 {
        let a = Mat::<f64>::from_f64(&c.matrix_along(x, i)?);
        m = exterior_power(&a, k).to_f64() * m;
        m /= m.norm();
    }
    Ok(m)
}

/// `log sigma_i` of the product over steps `start..start+len`, from the norms
/// of its exterior powers. Small singular values keep full relative accuracy
/// even when the product is badly conditioned.
pub fn log_singular_values_along<C: Cocycle + ?Sized>(
    c: &C,
    x: &SymbolicPoint,
    start: i64,
    len: usize,
) -> Result<Vec<f64>, LyapunovError> {
    let d = c.dim();
    let steps: Vec<Mat<f64>> = (start..start + len as i64)
        .map(|i| c.matrix_along(x, i).map(|a| Mat::from_f64(&a)))
        .collect::<Result<_, _>>()?;
    let mut prev = 0.0;
    let mut out = Vec::with_capacity(d);
    for k in 1..=d {
        let n = crate::multilinear::binomial(d, k);
        let mut m = DMatrix::identity(n, n);
        let mut log_norm = 0.0;
        for a in &steps {
            m = exterior_power(a, k).to_f64() * m;
            let f = m.norm();
            m /= f;
            log_norm += f.ln();
        }
        let total = log_norm + spectral_norm(&m).ln();
        out.push(total - prev);
        prev = total;
    }
    Ok(out)
}

/// Top singular direction (left or right) of an exterior product, read
/// back as a `k`-plane, with the gap `sigma_1 / sigma_2`.
fn top_plane(m: &DMatrix<f64>, k: usize, d: usize, left: bool) -> Result<(GrassmannPoint, f64), LyapunovError> {
    let (u, s, v) = sorted_svd(m);
    let gap = if s.len() < 2 { f64::INFINITY } else { s[0] / s[1] };
    let col = if left { u.column(0).iter().copied().collect() } else { v.column(0).iter().copied().collect() };
    let plane = GrassmannPoint::from_plucker(&KVector::from_coefficients(k, d, col)?)?;
    Ok((plane, gap))
}

/// Singular flags at `x` from `n`-step products.
pub fn flag_estimate<C: Cocycle + ?Sized>(c: &C, x: &SymbolicPoint, k: usize, n: usize) -> Result<FlagEstimate, LyapunovError> {
    let d = c.dim();
    if k == 0 || k >= d {
        return Err(LyapunovError::BadDegree(k, d));
    }
    let past = exterior_product(c, x, k, -(n as i64), n)?;
    let future = exterior_product(c, x, k, 0, n)?;
    let (u_k, gap_past) = top_plane(&past, k, d, true)?;
    let (top_right, gap_future) = top_plane(&future, k, d, false)?;
    let gap = gap_past.min(gap_future);
    if !(gap > 1.0 + FLAG_GAP_TOL) {
        return Err(LyapunovError::FlagUndefined { n, k, gap });
    }
    let s_dk = top_right.orthogonal_complement().expect("k < d");
    Ok(FlagEstimate { u_k, s_dk, n, gap })
}

/// `d(U_k(y, n), H^u_{xy} U_k(x, n))` for `y` on the local unstable set of `x`.
pub fn holonomy_equivariance_check<T: Scalar>(
    c: &LocallyConstantCocycle<T>,
    cert: &BunchingCertificate,
    x: &SymbolicPoint,
    y: &SymbolicPoint,
    k: usize,
    n: usize,
) -> Result<f64, LyapunovError> {
    let h = c.unstable_holonomy(cert, x, y, HOLONOMY_TOL)?;
    let fx = flag_estimate(c, x, k, n)?;
    let fy = flag_estimate(c, y, k, n)?;
    let moved = fx.u_k.image(&h.matrix)?;
    Ok(grassmann_distance(&fy.u_k, &moved)?)
}

/// Singular structure of a single matrix: `U_k(A)`, `S_{d-k}(A)` and the gap.
fn singular_planes(a: &DMatrix<f64>, k: usize) -> Result<(GrassmannPoint, GrassmannPoint, f64), LyapunovError> {
    let d = a.nrows();
    if k == 0 || k >= d {
        return Err(LyapunovError::BadDegree(k, d));
    }
    let (u, s, v) = sorted_svd(a);
    let gap = s[k - 1] / s[k];
    let top = GrassmannPoint::new(u.columns(0, k).into_owned())?;
    let bottom = GrassmannPoint::new(v.columns(k, d - k).into_owned())?;
    Ok((top, bottom, gap))
}

fn sample_in_cone(rng: &mut ChaCha8Rng, k: usize, d: usize, avoid: &GrassmannPoint, theta: f64) -> Option<GrassmannPoint> {
    (0..100_000)
        .map(|_| GrassmannPoint::random(k, d, rng))
        .find(|u| principal_angle(u, avoid) > theta)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConeReport {
    pub gap: f64,
    pub theta: f64,
    pub samples: usize,
    pub max_distance: f64,
    pub violations: usize,
    /// Largest observed `d(AU, AV) / d(U, V)` over consecutive samples.
    pub lipschitz: f64,
    pub holds: bool,
}

/// Samples `U` at angle more than `theta` from `S_{d-k}(A)` and measures
/// how close `A U` lands to `U_k(A)`.
pub fn cone_contraction_check(a: &DMatrix<f64>, k: usize, theta: f64, samples: usize, seed: u64) -> Result<ConeReport, LyapunovError> {
    let (top, bottom, gap) = singular_planes(a, k)?;
    if !(gap > 1.0 + 1e-12) {
        return Err(LyapunovError::GapFailure(gap));
    }
    let d = a.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_distance: f64 = 0.0;
    let mut violations = 0;
    let mut lipschitz: f64 = 0.0;
    let mut prev: Option<(GrassmannPoint, GrassmannPoint)> = None;
    let mut used = 0;
    for _ in 0..samples {
        let Some(u) = sample_in_cone(&mut rng, k, d, &bottom, theta) else { break };
        let au = u.image(a)?;
        let dist = grassmann_distance(&au, &top)?;
        max_distance = max_distance.max(dist);
        if dist >= theta {
            violations += 1;
        }
        if let Some((pu, pau)) = &prev {
            let din = grassmann_distance(&u, pu)?;
            if din > 1e-9 {
                lipschitz = lipschitz.max(grassmann_distance(&au, pau)? / din);
            }
        }
        prev = Some((u, au));
        used += 1;
    }
    Ok(ConeReport {
        gap,
        theta,
        samples: used,
        max_distance,
        violations,
        lipschitz,
        holds: violations == 0 && used > 0,
    })
}

/// Smallest gap `K` for which `diag(K, 1, ..., 1)` passes the cone check at
/// `theta` with Lipschitz constant at most `gamma`, by bisection on `log K`.
pub fn calibrate_cone_gap(d: usize, theta: f64, gamma: f64, samples: usize, seed: u64) -> Result<f64, LyapunovError> {
    let passes = |log_k: f64| -> Result<bool, LyapunovError> {
        let mut a = DMatrix::identity(d, d);
        a[(0, 0)] = log_k.exp();
        let r = cone_contraction_check(&a, 1, theta, samples, seed)?;
        Ok(r.holds && r.lipschitz <= gamma)
    };
    let (mut lo, mut hi) = (1e-3f64, 20.0f64);
    if !passes(hi)? {
        return Ok(f64::INFINITY);
    }
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if passes(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi.exp())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquicontinuityReport {
    pub epsilon: f64,
    pub theta0: f64,
    /// `epsilon * sin^2(theta0)`, from the bounded-slope chart estimate.
    pub certified_delta: f64,
    /// Smallest sampled input distance whose image distance reached `epsilon`.
    pub measured_delta: f64,
    pub pairs: usize,
    pub violations: usize,
}

/// Certified equicontinuity constant.
pub fn certified_delta(epsilon: f64, theta0: f64) -> f64 {
    epsilon * theta0.sin().powi(2)
}

fn perturb(rng: &mut ChaCha8Rng, xi: &GrassmannPoint, r: f64) -> Result<GrassmannPoint, LyapunovError> {
    let (d, k) = (xi.dim(), xi.rank());
    let z = DMatrix::from_fn(d, k, |_, _| rng.random_range(-1.0..1.0));
    let b = xi.basis();
    let z = &z - b * (b.transpose() * &z);
    let zn = z.norm().max(1e-300);
    Ok(GrassmannPoint::new(b + z * (r / zn))?)
}

/// Measures the modulus of continuity of `xi -> A xi` on the cone of
/// `k`-planes at angle more than `theta0` from `S_{d-k}(A)`.
pub fn equicontinuity_check(a: &DMatrix<f64>, k: usize, theta0: f64, epsilon: f64, samples: usize, seed: u64) -> Result<EquicontinuityReport, LyapunovError> {
    let (_, bottom, _) = singular_planes(a, k)?;
    let d = a.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let delta = certified_delta(epsilon, theta0);
    let mut measured = f64::INFINITY;
    let mut max_in: f64 = 0.0;
    let mut violations = 0;
    let mut pairs = 0;
    while pairs < samples {
        let Some(x1) = sample_in_cone(&mut rng, k, d, &bottom, theta0) else { break };
        let r = rng.random_range(0.0..2.0 * epsilon);
        let x2 = perturb(&mut rng, &x1, r.tan())?;
        if principal_angle(&x2, &bottom) <= theta0 {
            continue;
        }
        pairs += 1;
        let din = grassmann_distance(&x1, &x2)?;
        let dout = grassmann_distance(&x1.image(a)?, &x2.image(a)?)?;
        max_in = max_in.max(din);
        if dout >= epsilon {
            measured = measured.min(din);
            if din < delta {
                violations += 1;
            }
        }
    }
    Ok(EquicontinuityReport {
        epsilon,
        theta0,
        certified_delta: delta,
        measured_delta: if measured.is_finite() { measured } else { max_in },
        pairs,
        violations,
    })
}

/// Largest relative difference between the singular values of `B^n(x)`
/// for the adjoint cocycle and those of `A^n(sigma^{-n} x)`.
pub fn adjoint_singular_defect<C: Cocycle>(c: &C, x: &SymbolicPoint, n: usize) -> Result<f64, LyapunovError> {
    let sb = log_singular_values_along(&AdjointCocycle::new(c), x, 0, n)?;
    let sa = log_singular_values_along(c, x, -(n as i64), n)?;
    Ok(sa.iter().zip(&sb).map(|(a, b)| (b - a).exp_m1().abs()).fold(0.0, f64::max))
}

/// `(1/q) log |eigenvalues of A^q(p)|`, nonincreasing.
pub fn periodic_spectrum<C: Cocycle + ?Sized>(c: &C, p: &SymbolicPoint) -> Result<Vec<f64>, LyapunovError> {
    let q = p.minimal_period().ok_or(LyapunovError::NotPeriodic)?;
    let d = c.dim();
    let mut m = DMatrix::identity(d, d);
    let mut log_scale = 0.0;
    for i in 0..q as i64 {
        m = c.matrix_along(p, i)? * m;
        let f = m.norm();
        m /= f;
        log_scale += f.ln();
    }
    let mut out: Vec<f64> = m
        .complex_eigenvalues()
        .iter()
        .map(|z| (z.norm().ln() + log_scale) / q as f64)
        .collect();
    out.sort_by(|a, b| b.total_cmp(a));
    Ok(out)
}

/// `log |det(A^n(x) restricted to V)|`, accumulated through per-step QR.
fn restricted_log_det<C: Cocycle + ?Sized>(c: &C, x: &SymbolicPoint, frame: &DMatrix<f64>, n: usize) -> Result<f64, LyapunovError> {
    let mut q = frame.clone();
    let mut total = 0.0;
    for i in 0..n as i64 {
        let qr = (c.matrix_along(x, i)? * &q).qr();
        let r = qr.r();
        total += (0..r.nrows().min(r.ncols())).map(|j| r[(j, j)].abs().ln()).sum::<f64>();
        q = qr.q();
    }
    Ok(total)
}

/// `(1/n) log Delta^n(x)` with
/// `Delta^n = det(A^n, xi1)^{1/d1} / det(A^n, xi1 + xi2)^{1/(d1+d2)}`.
pub fn delta_diagnostic<C: Cocycle + ?Sized>(c: &C, x: &SymbolicPoint, xi1: &GrassmannPoint, xi2: &GrassmannPoint, n: usize) -> Result<f64, LyapunovError> {
    let angle = principal_angle(xi1, xi2);
    if angle <= 1e-6 {
        return Err(LyapunovError::NotTransversal(angle));
    }
    let (d1, d2) = (xi1.rank(), xi2.rank());
    let mut both = DMatrix::zeros(xi1.dim(), d1 + d2);
    both.columns_mut(0, d1).copy_from(xi1.basis());
    both.columns_mut(d1, d2).copy_from(xi2.basis());
    let sum_frame = orthonormal_columns(&both, RANK_THRESHOLD);
    let l1 = restricted_log_det(c, x, xi1.basis(), n)?;
    let l12 = restricted_log_det(c, x, &sum_frame, n)?;
    Ok((l1 / d1 as f64 - l12 / (d1 + d2) as f64) / n as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConformalStructure {
    /// Positive definite, determinant 1.
    #[serde(skip)]
    pub matrix: DMatrix<f64>,
    pub factors: Vec<f64>,
    pub residual: f64,
}

fn normalize_det(p: &DMatrix<f64>) -> DMatrix<f64> {
    let d = p.nrows() as f64;
    let det = p.determinant();
    p / det.abs().powf(1.0 / d)
}

/// `max_B |B^T P B / c_B - P| / |P|` with `c_B = det(B^T P B)^{1/d} / det(P)^{1/d}`.
pub fn conformal_residual(generators: &[DMatrix<f64>], p: &DMatrix<f64>) -> (f64, Vec<f64>) {
    let d = p.nrows() as f64;
    let pd = p.determinant().abs().powf(1.0 / d);
    let mut worst: f64 = 0.0;
    let mut factors = Vec::new();
    for b in generators {
        let pulled = b.transpose() * p * b;
        let cb = pulled.determinant().abs().powf(1.0 / d) / pd;
        worst = worst.max((&pulled / cb - p).norm() / p.norm());
        factors.push(cb);
    }
    (worst, factors)
}

fn conformal_from(generators: &[DMatrix<f64>], start: DMatrix<f64>, max_iter: usize) -> (DMatrix<f64>, f64, Vec<f64>) {
    let d = start.nrows() as f64;
    let mut p = normalize_det(&start);
    for _ in 0..max_iter {
        let mut avg = DMatrix::zeros(p.nrows(), p.ncols());
        for b in generators {
            let pulled = b.transpose() * &p * b;
            avg += &pulled / pulled.determinant().abs().powf(1.0 / d);
        }
        avg /= generators.len() as f64;
        let next = normalize_det(&((&p + avg) * 0.5));
        let step = (&next - &p).norm();
        p = 0.5 * (&next + next.transpose());
        if step < 1e-15 {
            break;
        }
    }
    let (res, f) = conformal_residual(generators, &p);
    (p, res, f)
}

/// Looks for a positive definite `P` with `B^T P B = c_B P` for every
/// generator, by iterated lazy averaging of pullbacks from the identity.
pub fn conformal_detector(generators: &[DMatrix<f64>], tol: f64, max_iter: usize) -> Option<ConformalStructure> {
    let d = generators.first()?.nrows();
    let (p, residual, factors) = conformal_from(generators, DMatrix::identity(d, d), max_iter);
    (residual < tol).then_some(ConformalStructure { matrix: p, factors, residual })
}

/// Smallest residual over `starts` random initial forms, as evidence for
/// or against a common conformal structure.
pub fn conformal_multistart(generators: &[DMatrix<f64>], max_iter: usize, starts: usize, seed: u64) -> f64 {
    let Some(d) = generators.first().map(DMatrix::nrows) else { return f64::INFINITY };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..starts)
        .map(|_| {
            let g = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
            let start = &g * g.transpose() + DMatrix::identity(d, d) * 0.1;
            conformal_from(generators, start, max_iter).1
        })
        .fold(f64::INFINITY, f64::min)
}
