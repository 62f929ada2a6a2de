//! Finite atomic measures on Grassmannians and the u-state experiments
//! built from them.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::cocycle::{Cocycle, CocycleError};
use crate::linalg::singular_values_desc;
use crate::lyapunov::{estimate_spectrum, flag_estimate, LyapunovError, SpectrumEstimate, MIN_STEPS};
use crate::markov::{MarkovError, MarkovMeasure};
use crate::multilinear::{grassmann_distance, GrassmannPoint, LinearSection, MultilinearError};
use crate::symbolic::{Sidedness, SymbolicError, SymbolicPoint};

/// Default concentration grid.
pub const DEFAULT_GRID: [f64; 6] = [0.2, 0.1, 0.05, 0.02, 0.01, 0.005];

/// Distances below this are free in [`transport_cost`].
pub const TRANSPORT_RESOLUTION: f64 = 0.01;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UstateError {
    #[error("measure needs at least one atom")]
    Empty,
    #[error("atom weights must be positive and finite")]
    BadWeight,
    #[error("atoms must share the ambient Grassmannian")]
    AmbientMismatch,
    #[error("matrix is singular (condition number {0:.3e})")]
    Singular(f64),
    #[error("exponent gap at k={k} is not certified (lambda_k - lambda_k+1 = {gap:.3e}, standard errors {se:.3e})")]
    GapNotCertified { k: usize, gap: f64, se: f64 },
    #[error("the full space is not a proper linear section")]
    TrivialSection,
    #[error("preimage weights sum to {0}, not 1")]
    WeightSum(f64),
    #[error("stationarity needs a one-sided future point")]
    NotFuture,
    #[error(transparent)]
    Lyapunov(#[from] LyapunovError),
    #[error(transparent)]
    Cocycle(#[from] CocycleError),
    #[error(transparent)]
    Multilinear(#[from] MultilinearError),
    #[error(transparent)]
    Markov(#[from] MarkovError),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
}

/// Weighted atoms on `Gr(k, d)` with total mass one.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalGrassmannMeasure {
    atoms: Vec<(GrassmannPoint, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AtomJson {
    /// Orthonormal basis vectors of the subspace.
    pub basis: Vec<Vec<f64>>,
    pub weight: f64,
}

impl EmpiricalGrassmannMeasure {
    /// Atoms with positive weights, normalized to total mass one.
    pub fn new(atoms: Vec<(GrassmannPoint, f64)>) -> Result<Self, UstateError> {
        let first = atoms.first().ok_or(UstateError::Empty)?;
        let (k, d) = (first.0.rank(), first.0.dim());
        if atoms.iter().any(|(p, _)| p.rank() != k || p.dim() != d) {
            return Err(UstateError::AmbientMismatch);
        }
        if atoms.iter().any(|(_, w)| !(w.is_finite() && *w > 0.0)) {
            return Err(UstateError::BadWeight);
        }
        let total: f64 = atoms.iter().map(|(_, w)| w).sum();
        Ok(Self {
            atoms: atoms.into_iter().map(|(p, w)| (p, w / total)).collect(),
        })
    }

    pub fn uniform(points: Vec<GrassmannPoint>) -> Result<Self, UstateError> {
        Self::new(points.into_iter().map(|p| (p, 1.0)).collect())
    }

    pub fn dirac(p: GrassmannPoint) -> Self {
        Self { atoms: vec![(p, 1.0)] }
    }

    /// `count` independent uniformly distributed atoms of equal weight.
    pub fn random(k: usize, d: usize, count: usize, rng: &mut ChaCha8Rng) -> Result<Self, UstateError> {
        Self::uniform((0..count).map(|_| GrassmannPoint::random(k, d, rng)).collect())
    }

    pub fn atoms(&self) -> &[(GrassmannPoint, f64)] {
        &self.atoms
    }

    pub fn ambient(&self) -> (usize, usize) {
        (self.atoms[0].0.rank(), self.atoms[0].0.dim())
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|(_, w)| w).sum()
    }

    /// Mass of the open ball of radius `eps` about `z`.
    pub fn ball_mass(&self, z: &GrassmannPoint, eps: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|(p, _)| grassmann_distance(p, z).map_or(false, |r| r < eps))
            .map(|(_, w)| w)
            .sum()
    }

    /// Convex combination of measures on the same Grassmannian.
    pub fn mixture(parts: &[(f64, EmpiricalGrassmannMeasure)]) -> Result<Self, UstateError> {
        let atoms = parts
            .iter()
            .filter(|(c, _)| *c > 0.0)
            .flat_map(|(c, m)| m.atoms.iter().map(move |(p, w)| (p.clone(), c * w)))
            .collect();
        Self::new(atoms)
    }

    pub fn to_json(&self) -> Vec<AtomJson> {
        self.atoms
            .iter()
            .map(|(p, w)| AtomJson {
                basis: p.basis().column_iter().map(|c| c.iter().copied().collect()).collect(),
                weight: *w,
            })
            .collect()
    }

    fn map_atoms(&self, f: impl Fn(&GrassmannPoint) -> Result<GrassmannPoint, UstateError>) -> Result<Self, UstateError> {
        Ok(Self {
            atoms: self
                .atoms
                .iter()
                .map(|(p, w)| Ok((f(p)?, *w)))
                .collect::<Result<_, UstateError>>()?,
        })
    }
}

/// `A_* m`; weights are unchanged.
pub fn pushforward(a: &DMatrix<f64>, m: &EmpiricalGrassmannMeasure) -> Result<EmpiricalGrassmannMeasure, UstateError> {
    let s = singular_values_desc(a);
    let cond = s[0] / s[s.len() - 1];
    if !(cond.is_finite() && cond < 1e12) {
        return Err(UstateError::Singular(cond));
    }
    m.map_atoms(|p| Ok(p.image(a)?))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcentrationReport {
    /// Smallest certifying grid value, `None` when no grid value certifies.
    pub radius: Option<f64>,
    /// Best atom-centered ball at the reported radius, or at the largest
    /// grid value when none certifies.
    #[serde(skip)]
    pub center: GrassmannPoint,
    pub center_mass: f64,
    pub grid: Vec<f64>,
}

fn best_center(m: &EmpiricalGrassmannMeasure, eps: f64) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, (z, _)) in m.atoms.iter().enumerate() {
        let mass = m.ball_mass(z, eps);
        if mass > best.1 + 1e-15 {
            best = (i, mass);
        }
    }
    best
}

/// Smallest `eps` in `grid` with `m(B_eps(z)) >= 1 - eps` for some atom `z`.
pub fn concentration(m: &EmpiricalGrassmannMeasure, grid: &[f64]) -> ConcentrationReport {
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    for &eps in &sorted {
        let (i, mass) = best_center(m, eps);
        if mass >= 1.0 - eps {
            return ConcentrationReport {
                radius: Some(eps),
                center: m.atoms[i].0.clone(),
                center_mass: mass,
                grid: sorted,
            };
        }
    }
    let widest = sorted.last().copied().unwrap_or(f64::INFINITY);
    let (i, mass) = best_center(m, widest);
    ConcentrationReport {
        radius: None,
        center: m.atoms[i].0.clone(),
        center_mass: mass,
        grid: sorted,
    }
}

/// Smallest `r` such that a closed ball of radius `r` about some atom holds
/// mass at least `1 - eps`.
pub fn concentration_profile(m: &EmpiricalGrassmannMeasure, eps: f64) -> f64 {
    let mut best = f64::INFINITY;
    for (z, _) in &m.atoms {
        let mut dist: Vec<(f64, f64)> = m
            .atoms
            .iter()
            .map(|(p, w)| (grassmann_distance(p, z).unwrap_or(f64::INFINITY), *w))
            .collect();
        dist.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut acc = 0.0;
        for (r, w) in dist {
            acc += w;
            if acc >= 1.0 - eps - 1e-12 {
                best = best.min(r);
                break;
            }
        }
    }
    best
}

/// Pushes every atom through the generators at orbit steps
/// `-n..0`, re-orthonormalizing after each step.
fn push_along<C: Cocycle + ?Sized>(c: &C, x: &SymbolicPoint, m: &EmpiricalGrassmannMeasure, start: i64, len: usize) -> Result<EmpiricalGrassmannMeasure, UstateError> {
    let mats = (start..start + len as i64)
        .map(|i| c.matrix_along(x, i))
        .collect::<Result<Vec<_>, _>>()?;
    m.map_atoms(|p| {
        let mut b = p.clone();
        for a in &mats {
            b = b.image(a)?;
        }
        Ok(b)
    })
}

/// `A^n(f^{-n} x)_* m0` for each `n` in `n_list`.
pub fn martingale_approximation<C: Cocycle + ?Sized>(c: &C, x: &SymbolicPoint, m0: &EmpiricalGrassmannMeasure, n_list: &[usize]) -> Result<Vec<(usize, EmpiricalGrassmannMeasure)>, UstateError> {
    n_list
        .iter()
        .map(|&n| Ok((n, push_along(c, x, m0, -(n as i64), n)?)))
        .collect()
}

/// Spectrum estimate whose `k`-th gap is resolved to five standard errors.
pub fn certify_gap<C: Cocycle + ?Sized>(c: &C, mu: &MarkovMeasure<f64>, k: usize, n_steps: usize, seed: u64) -> Result<SpectrumEstimate, UstateError> {
    let est = estimate_spectrum(c, mu, n_steps.max(MIN_STEPS), seed)?;
    if k == 0 || k >= c.dim() || !est.gap_is_resolved(k) {
        let (gap, se) = if k > 0 && k < c.dim() {
            (
                est.exponents[k - 1] - est.exponents[k],
                est.standard_errors[k - 1] + est.standard_errors[k],
            )
        } else {
            (0.0, 0.0)
        };
        return Err(UstateError::GapNotCertified { k, gap, se });
    }
    Ok(est)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiracSample {
    pub index: usize,
    pub radius: Option<f64>,
    pub center_distance_to_flag: f64,
    pub matched: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiracReport {
    pub n: usize,
    pub samples: Vec<DiracSample>,
    pub match_fraction: f64,
}

/// Parameters shared by the sampling experiments.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplingParams {
    pub k: usize,
    pub n: usize,
    pub samples: usize,
    pub atoms: usize,
    pub seed: u64,
    /// Orbit length used to certify the exponent gap.
    pub spectrum_steps: usize,
}

impl SamplingParams {
    pub fn new(k: usize, n: usize, samples: usize, seed: u64) -> Self {
        Self {
            k,
            n,
            samples,
            atoms: 64,
            seed,
            spectrum_steps: 20_000,
        }
    }
}

fn stable_samples(mu: &MarkovMeasure<f64>, x: &SymbolicPoint, count: usize, depth: usize, rng: &mut ChaCha8Rng) -> Vec<SymbolicPoint> {
    (0..count).map(|_| mu.sample_stable_partner(x, depth, rng)).collect()
}

/// Compares the martingale limit at points of `W^s_loc(x)` with the
/// unstable flag estimated at the same points.
pub fn dirac_support_check<C: Cocycle + ?Sized>(c: &C, mu: &MarkovMeasure<f64>, x: &SymbolicPoint, p: &SamplingParams) -> Result<DiracReport, UstateError> {
    certify_gap(c, mu, p.k, p.spectrum_steps, p.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let ys = stable_samples(mu, x, p.samples, p.n + 16, &mut rng);
    let mut samples = Vec::with_capacity(ys.len());
    for (index, y) in ys.iter().enumerate() {
        let m0 = EmpiricalGrassmannMeasure::random(p.k, c.dim(), p.atoms, &mut rng)?;
        let (_, m) = martingale_approximation(c, y, &m0, &[p.n])?.pop().expect("one entry");
        let rep = concentration(&m, &DEFAULT_GRID);
        let flag = flag_estimate(c, y, p.k, p.n)?;
        let dist = grassmann_distance(&rep.center, &flag.u_k)?;
        let matched = rep.radius.map_or(false, |r| dist <= 10.0 * r);
        samples.push(DiracSample {
            index,
            radius: rep.radius,
            center_distance_to_flag: dist,
            matched,
        });
    }
    let match_fraction = samples.iter().filter(|s| s.matched).count() as f64 / samples.len().max(1) as f64;
    Ok(DiracReport {
        n: p.n,
        samples,
        match_fraction,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AvoidanceReport {
    pub distances: Vec<f64>,
    /// `(theta, fraction of samples within theta of the section)`.
    pub fractions: Vec<(f64, f64)>,
}

/// Distribution of the distance from `E^u_k(y)` to the section, over `y`
/// sampled on `W^s_loc(x)`. Distances are measured between unit Plucker
/// vectors and the subspace of the section, which for lines is the
/// Grassmannian distance itself.
pub fn hyperplane_avoidance_stat<C: Cocycle + ?Sized>(
    c: &C,
    mu: &MarkovMeasure<f64>,
    x: &SymbolicPoint,
    h: &LinearSection<f64>,
    p: &SamplingParams,
    theta_grid: &[f64],
) -> Result<AvoidanceReport, UstateError> {
    if h.is_full() || h.dim() == 0 {
        return Err(UstateError::TrivialSection);
    }
    if h.ambient() != (p.k, c.dim()) {
        return Err(UstateError::AmbientMismatch);
    }
    certify_gap(c, mu, p.k, p.spectrum_steps, p.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let ys = stable_samples(mu, x, p.samples, p.n + 16, &mut rng);
    let distances = ys
        .iter()
        .map(|y| Ok(h.distance_to_point(&flag_estimate(c, y, p.k, p.n)?.u_k)))
        .collect::<Result<Vec<f64>, UstateError>>()?;
    let fractions = theta_grid
        .iter()
        .map(|&t| (t, distances.iter().filter(|&&d| d < t).count() as f64 / distances.len().max(1) as f64))
        .collect();
    Ok(AvoidanceReport { distances, fractions })
}

/// Greedy transport cost between two atomic measures; pairs closer than
/// [`TRANSPORT_RESOLUTION`] move for free.
pub fn transport_cost(a: &EmpiricalGrassmannMeasure, b: &EmpiricalGrassmannMeasure) -> Result<f64, UstateError> {
    if a.ambient() != b.ambient() {
        return Err(UstateError::AmbientMismatch);
    }
    let mut pairs = Vec::with_capacity(a.atoms.len() * b.atoms.len());
    for (i, (p, _)) in a.atoms.iter().enumerate() {
        for (j, (q, _)) in b.atoms.iter().enumerate() {
            pairs.push((grassmann_distance(p, q)?, i, j));
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut ra: Vec<f64> = a.atoms.iter().map(|(_, w)| *w).collect();
    let mut rb: Vec<f64> = b.atoms.iter().map(|(_, w)| *w).collect();
    let mut cost = 0.0;
    for (dist, i, j) in pairs {
        let moved = ra[i].min(rb[j]);
        if moved <= 0.0 {
            continue;
        }
        ra[i] -= moved;
        rb[j] -= moved;
        if dist > TRANSPORT_RESOLUTION {
            cost += moved * dist;
        }
    }
    Ok(cost)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StationarityReport {
    pub depth: usize,
    pub preimages: usize,
    pub weight_sum: f64,
    pub residual: f64,
}

/// Discrepancy between `m_x` and `sum_z (1/J sigma^depth(z)) A^depth(z)_* m_z`
/// over the `depth`-preimages `z` of the one-sided point `x`.
pub fn stationarity_check<C: Cocycle + ?Sized>(
    c: &C,
    mu: &MarkovMeasure<f64>,
    x: &SymbolicPoint,
    depth: usize,
    family: &dyn Fn(&SymbolicPoint) -> Result<EmpiricalGrassmannMeasure, UstateError>,
) -> Result<StationarityReport, UstateError> {
    if x.sidedness() != Sidedness::Future {
        return Err(UstateError::NotFuture);
    }
    let spec = mu.spec();
    let x0 = x.symbol(0).expect("future point");
    let words: Vec<Vec<u8>> = spec
        .words(depth + 1)
        .into_iter()
        .filter(|w| w[depth] == x0)
        .collect();
    let mut parts = Vec::with_capacity(words.len());
    let mut weight_sum = 0.0;
    for w in &words {
        let mut core = w[..depth].to_vec();
        core.extend_from_slice(x.core());
        let z = spec.future_point(core, x.right_tail().to_vec())?;
        let mut jac = 1.0;
        let mut zi = z.clone();
        for _ in 0..depth {
            jac *= mu.jacobian_unstable(&zi)?;
            zi = zi.shift(1)?;
        }
        let weight = 1.0 / jac;
        weight_sum += weight;
        let lifted = spec.lift_to_two_sided(&z)?;
        let pushed = push_along(c, &lifted, &family(&z)?, 0, depth)?;
        parts.push((weight, pushed));
    }
    if (weight_sum - 1.0).abs() > 1e-9 {
        return Err(UstateError::WeightSum(weight_sum));
    }
    let mix = EmpiricalGrassmannMeasure::mixture(&parts)?;
    let residual = transport_cost(&family(x)?, &mix)?;
    Ok(StationarityReport {
        depth,
        preimages: words.len(),
        weight_sum,
        residual,
    })
}
