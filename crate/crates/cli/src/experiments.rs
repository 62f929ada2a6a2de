use cocycle_lab::cocycle::{BunchingCertificate, Cocycle, LocallyConstantCocycle};
use cocycle_lab::lyapunov::{
    adjoint_singular_defect, calibrate_cone_gap, conformal_detector, conformal_multistart, cone_contraction_check,
    delta_diagnostic, equicontinuity_check, estimate_spectrum, flag_estimate, periodic_spectrum, LyapunovError,
};
use cocycle_lab::multilinear::{grassmann_distance, hyperplane_section, KVector, KVectorJson};
use cocycle_lab::symbolic::{format_word, periodic_orbits};
use cocycle_lab::ustate::{
    concentration, concentration_profile, dirac_support_check, hyperplane_avoidance_stat, martingale_approximation,
    SamplingParams, DEFAULT_GRID,
};
use cocycle_lab::{verify_counterexample, GrassmannPoint, MarkovMeasure, SubshiftSpec, SymbolicPoint};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::config::{parse_matrix, parse_point, ExperimentConfig};
use crate::CliError;

pub const EXPERIMENTS: [&str; 14] = [
    "spectrum",
    "flags",
    "holonomy-check",
    "reduce-check",
    "ustate-martingale",
    "dirac-support",
    "hyperplane-avoidance",
    "cone-calibrate",
    "equicontinuity",
    "periodic-spectrum",
    "delta-diagnostic",
    "adjoint-check",
    "conformal-detect",
    "counterexample",
];

/// Rows of a CSV table, without the config hash column.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub table: Table,
    pub json: Value,
}

pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.12e}")
    }
}

fn radius(r: Option<f64>) -> String {
    r.map_or_else(|| "inf".into(), num)
}

fn params<T: DeserializeOwned>(v: &Value) -> Result<T, CliError> {
    let v = if v.is_null() { json!({}) } else { v.clone() };
    serde_json::from_value(v).map_err(|e| CliError::Config(format!("params: {e}")))
}

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}

struct Setup {
    spec: SubshiftSpec,
    mu: MarkovMeasure<f64>,
    cocycle: LocallyConstantCocycle<f64>,
}

impl Setup {
    fn new(cfg: &ExperimentConfig) -> Result<Self, CliError> {
        let spec = cfg.spec()?;
        let mu = cfg.measure(&spec)?;
        let cocycle = cfg.cocycle(&spec)?;
        Ok(Self { spec, mu, cocycle })
    }

    fn point(&self, given: &Option<Value>, seed: u64, n: usize) -> Result<SymbolicPoint, CliError> {
        match given {
            Some(v) => parse_point(v, &self.spec),
            None => Ok(self.mu.sample_orbit(2 * (n + 64) + 1, seed)),
        }
    }

    /// The cocycle itself, or its reduction when `alpha` is given.
    fn working(&self, alpha: Option<f64>) -> Result<Box<dyn Cocycle>, CliError> {
        Ok(match alpha {
            None => Box::new(self.cocycle.clone()),
            Some(a) => Box::new(self.cocycle.reduce_default(&certificate(&self.cocycle, a)?)?),
        })
    }
}

fn certificate(c: &LocallyConstantCocycle<f64>, alpha: f64) -> Result<BunchingCertificate, CliError> {
    let cert = c.certify_bunching(alpha);
    cert.require()?;
    Ok(cert)
}

fn per_seed<T: Send>(seeds: &[u64], f: impl Fn(u64) -> Result<T, CliError> + Sync) -> Result<Vec<(u64, T)>, CliError> {
    seeds.par_iter().map(|&s| Ok((s, f(s)?))).collect()
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Output, CliError> {
    let seeds = cfg.seeds();
    let id = cfg.experiment.as_str();
    match id {
        "spectrum" => spectrum(cfg, &seeds),
        "flags" => flags(cfg, &seeds),
        "holonomy-check" => holonomy_check(cfg, &seeds),
        "reduce-check" => reduce_check(cfg, &seeds),
        "ustate-martingale" => ustate_martingale(cfg, &seeds),
        "dirac-support" => dirac_support(cfg, &seeds),
        "hyperplane-avoidance" => hyperplane_avoidance(cfg, &seeds),
        "cone-calibrate" => cone_calibrate(cfg, &seeds),
        "equicontinuity" => equicontinuity(cfg, &seeds),
        "periodic-spectrum" => periodic(cfg, &seeds),
        "delta-diagnostic" => delta(cfg, &seeds),
        "adjoint-check" => adjoint(cfg, &seeds),
        "conformal-detect" => conformal(cfg, &seeds),
        "counterexample" => counterexample(cfg),
        other => Err(CliError::Config(format!(
            "unknown experiment {other:?} (expected one of {})",
            EXPERIMENTS.join(", ")
        ))),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpectrumParams {
    #[serde(default = "default_spectrum_n")]
    n: usize,
}

fn default_spectrum_n() -> usize {
    10_000
}

fn spectrum(cfg: &ExperimentConfig, seeds: &[u64]) -> Result<Output, CliError> {
    let p: SpectrumParams = params(&cfg.params)?;
    let s = Setup::new(cfg)?;
    let d = s.cocycle.dim();
    let results = per_seed(seeds, |seed| Ok(estimate_spectrum(&s.cocycle, &s.mu, p.n, seed)?))?;
    let mut cols = vec!["experiment_id".to_string(), "seed".into(), "n".into()];
    cols.extend((1..=d).map(|i| format!("lambda{i}")));
    cols.extend((1..=d).map(|i| format!("se{i}")));
    let rows = results
        .iter()
        .map(|(seed, e)| {
            let mut r = vec!["spectrum".to_string(), seed.to_string(), e.n_steps.to_string()];
            r.extend(e.exponents.iter().map(|&x| num(x)));
            r.extend(e.standard_errors.iter().map(|&x| num(x)));
            r
        })
        .collect();
    let json = Value::Array(results.iter().map(|(_, e)| serde_json::to_value(e).expect("serializable")).collect());
    Ok(Output {
        table: Table { header: cols, rows },
        json,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FlagParams {
    #[serde(default = "one")]
    k: usize,
    #[serde(default = "default_n_list")]
    n_list: Vec<usize>,
    #[serde(default)]
    point: Option<Value>,
    #[serde(default)]
    reduce_alpha: Option<f64>,
}

fn one() -> usize {
    1
}

fn default_n_list() -> Vec<usize> {
    vec![50, 100, 200, 400]
}

fn flags(cfg: &ExperimentConfig, seeds: &[u64]) -> Result<Output, CliError> {
    let p: FlagParams = params(&cfg.params)?;
    let s = Setup::new(cfg)?;
    let c = s.working(p.reduce_alpha)?;
    let n_max = p.n_list.iter().copied().max().unwrap_or(0);
    let results = per_seed(seeds, |seed| {
        let x = s.point(&p.point, seed, 2 * n_max)?;
        p.n_list
            .iter()
            .map(|&n| {
                match (flag_estimate(&*c, &x, p.k, n), flag_estimate(&*c, &x, p.k, 2 * n)) {
                    (Ok(a), Ok(b)) => Ok((n, a.gap, grassmann_distance(&a.u_k, &b.u_k)?, "ok")),
                    (Err(LyapunovError::FlagUndefined { gap, .. }), _) | (_, Err(LyapunovError::FlagUndefined { gap, .. })) => {
                        Ok((n, gap, f64::NAN, "flag undefined"))
                    }
                    (Err(e), _) | (_, Err(e)) => Err(e.into()),
                }
            })
            .collect::<Result<Vec<_>, CliError>>()
    })?;
    let mut rows = Vec::new();
    for (seed, list) in &results {
        for (n, gap, dist, status) in list {
            rows.push(vec!["flags".into(), seed.to_string(), n.to_string(), num(*gap), num(*dist), status.to_string()]);
        }
    }
    let json = json!(results
        .iter()
        .map(|(seed, list)| json!({"seed": seed, "rows": list.iter().map(|(n, g, d, st)| json!({"n": n, "gap": g, "distance_to_double": if d.is_nan() { Value::Null } else { json!(d) }, "status": st})).collect::<Vec<_>>()}))
        .collect::<Vec<_>>());
    Ok(Output {
        table: Table {
            header: header(&["experiment_id", "seed", "n", "gap", "distance_to_double", "status"]),
            rows,
        },
        json,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HolonomyParams {
    #[serde(default = "default_alpha")]
    alpha: f64,
    #[serde(default = "default_trials")]
    trials: usize,
    #[serde(default = "default_depth")]
    depth: usize,
}

fn default_alpha() -> f64 {
    1.0
}

fn default_trials() -> usize {
    100
}

fn default_depth() -> usize {
    12
}

fn stable_triple(mu: &MarkovMeasure<f64>, depth: usize, rng: &mut ChaCha8Rng) -> (SymbolicPoint, SymbolicPoint, SymbolicPoint) {
    let x = mu.sample_orbit_with(4 * depth + 1, rng);
    let y = mu.sample_stable_partner(&x, depth, rng);
    let z = mu.sample_stable_partner(&x, depth, rng);
    (x, y, z)
}

fn holonomy_check(cfg: &ExperimentConfig, seeds: &[u64]) -> Result<Output, CliError> {
    let p: HolonomyParams = params(&cfg.params)?;
    let s = Setup::new(cfg)?;
    let cert = certificate(&s.cocycle, p.alpha)?;
    let results = per_seed(seeds, |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = [0.0f64; 3];
        for _ in 0..p.trials {
            let (x, y, z) = stable_triple(&s.mu, p.depth, &mut rng);
            let d = s.cocycle.stable_holonomy_defects(&cert, &x, &y, &z)?;
            worst[0] = worst[0].max(d.identity);
            worst[1] = worst[1].max(d.composition);
            worst[2] = worst[2].max(d.intertwining);
        }
        Ok(worst)
    })?;
    let rows = results
        .iter()
        .map(|(seed, w)| vec!["holonomy-check".into(), seed.to_string(), p.trials.to_string(), num(w[0]), num(w[1]), num(w[2])])
        .collect();
    let json = json!(results
        .iter()
        .map(|(seed, w)| json!({"seed": seed, "identity": w[0], "composition": w[1], "intertwining": w[2]}))
        .collect::<Vec<_>>());
    Ok(Output {
        table: Table {
            header: header(&["experiment_id", "seed", "trials", "identity", "composition", "intertwining"]),
            rows,
        },
        json,
    })
}

fn reduce_check(cfg: &ExperimentConfig, seeds: &[u64]) -> Result<Output, CliError> {
    let p: HolonomyParams = params(&cfg.params)?;
    let s = Setup::new(cfg)?;
    let reduced = s.cocycle.reduce_default(&certificate(&s.cocycle, p.alpha)?)?;
    let results = per_seed(seeds, |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for _ in 0..p.trials {
            let (x, y, _) = stable_triple(&s.mu, p.depth, &mut rng);
            let (rx, ry) = (reduced.matrix_at(&x)?, reduced.matrix_at(&y)?);
            worst = worst.max((&rx - &ry).norm() / rx.norm());
        }
        Ok(worst)
    })?;
    let rows = results
        .iter()
        .map(|(seed, w)| vec!["reduce-check".into(), seed.to_string(), p.trials.to_string(), num(*w)])
        .collect();
    let json = json!(results.iter().map(|(seed, w)| json!({"seed": seed, "max_deviation": w})).collect::<Vec<_>>());
    Ok(Output {
        table: Table {
            header: header(&["experiment_id", "seed", "trials", "max_deviation"]),
            rows,
        },
        json,
    })
}

const USTATE_COLUMNS: [&str; 6] = ["experiment_id", "seed", "n", "concentration_radius", "center_distance_to_flag", "match_flag"];

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MartingaleParams {
    #[serde(default = "one")]
    k: usize,
    #[serde(default = "default_martingale_n")]
    n_list: Vec<usize>,
    #[serde(default = "default_atoms")]
    atoms: usize,
    #[serde(default)]
    point: Option<Value>,
    #[serde(default)]
    reduce_alpha: Option<f64>,
}

fn default_martingale_n() -> Vec<usize> {
    vec![10, 20, 40, 60, 100]
}

fn default_atoms() -> usize {
    100
}

fn ustate_martingale(cfg: &ExperimentConfig, seeds: &[u64]) -> Result<Output, CliError> {
    let p: MartingaleParams = params(&cfg.params)?;
    let s = Setup::new(cfg)?;
    let c = s.working(p.reduce_alpha)?;
    let n_max = p.n_list.iter().copied().max().unwrap_or(0);
    let results = per_seed(seeds, |seed| {
        let x = s.point(&p.point, seed, n_max)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m0 = cocycle_lab::EmpiricalGrassmannMeasure::random(p.k, c.dim(), p.atoms, &mut rng)?;
        martingale_approximation(&*c, &x, &m0, &p.n_list)?
            .into_iter()
            .map(|(n, m)| {
                let rep = concentration(&m, &DEFAULT_GRID);
                let dist = match flag_estimate(&*c, &x, p.k, n) {
                    Ok(f) => grassmann_distance(&rep.center, &f.u_k)?,
                    Err(LyapunovError::FlagUndefined { .. }) => f64::NAN,
                    Err(e) => return Err(e.into()),
                };
                let matched = rep.radius.map_or(false, |r| dist <= 10.0 * r);
                Ok((n, rep.radius, dist, matched, concentration_profile(&m, 0.05)))
            })
            .collect::<Result<Vec<_>, CliError>>()
    })?;
    let mut rows = Vec::new();
    for (seed, list) in &results {
        for (n, r, dist, matched, _) in list {
            rows.push(vec!["ustate-martingale".into(), seed.to_string(), n.to_string(), radius(*r), num(*dist), matched.to_string()]);
        }
    }
    let json = json!(results
        .iter()
        .map(|(seed, list)| json!({"seed": seed, "spread": list.iter().map(|(n, _, _, _, sp)| json!({"n": n, "spread": sp})).collect::<Vec<_>>()}))
        .collect::<Vec<_>>());
    Ok(Output {
        table: Table {
            header: header(&USTATE_COLUMNS),
            rows,
        },
        json,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DiracParams {
    #[serde(default = "one")]
    k: usize,
    #[serde(default = "default_dirac_n")]
    n: usize,
    #[serde(default = "default_samples")]
    samples: usize,
    #[serde(default = "default_dirac_atoms")]
    atoms: usize,
    #[serde(default = "default_spectrum_steps")]
    spectrum_steps: usize,
    #[serde(default)]
    point: Option<Value>,
    #[serde(default)]
    reduce_alpha: Option<f64>,
}

fn default_dirac_n() -> usize {
    400
}

fn default_samples() -> usize {
    20
}

fn default_dirac_atoms() -> usize {
    64
}

fn default_spectrum_steps() -> usize {
    20_000
}

fn dirac_support(cfg: &ExperimentConfig, seeds: &[u64]) -> Result<Output, CliError> {
    let p: DiracParams = params(&cfg.params)?;
    let s = Setup::new(cfg)?;
    let c = s.working(p.reduce_alpha)?;
    let results = per_seed(seeds, |seed| {
        let x = s.point(&p.point, seed, p.n)?;
        let sp = SamplingParams {
            atoms: p.atoms,
            spectrum_steps: p.spectrum_steps,
            ..SamplingParams::new(p.k, p.n, p.samples, seed)
        };
        Ok(dirac_support_check(&*c, &s.mu, &x, &sp)?)
    })?;
    let mut rows = Vec::new();
    for (seed, rep) in &results {
        for smp in &rep.samples {
            rows.push(vec![
                "dirac-support".into(),
                seed.to_string(),
                rep.n.to_string(),
                radius(smp.radius),
                num(smp.center_distance_to_flag),
                smp.matched.to_string(),
            ]);
        }
    }
    let json = json!(results
        .iter()
        .map(|(seed, r)| json!({"seed": seed, "match_fraction": r.match_fraction}))
        .collect::<Vec<_>>());
    Ok(Output {
        table: Table {
            header: header(&USTATE_COLUMNS),
            rows,
        },
        json,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AvoidanceParams {
    #[serde(default = "one")]
    k: usize,
    #[serde(default = "default_dirac_n")]
    n: usize,
    #[serde(default = "default_avoid_samples")]
    samples: usize,
    #[serde(default)]
    omega: Option<KVectorJson>,
    #[serde(default = "default_theta_grid")]
    theta_grid: Vec<f64>,
    #[serde(default = "default_spectrum_steps")]
    spectrum_steps: usize,
    #[serde(default)]
    point: Option<Value>,
    #[serde(default)]
    reduce_alpha: Option<f64>,
}

fn default_avoid_samples() -> usize {
    200
}

fn default_theta_grid() -> Vec<f64> {
    vec![0.2, 0.1, 0.05, 0.02, 0.01]
}

fn random_form(k: usize, d: usize, rng: &mut ChaCha8Rng) -> KVector<f64> {
    let n = cocycle_lab::multilinear::binomial(d, k);
    let coeffs = (0..n).map(|_| StandardNormal.sample(rng)).collect();
    KVector::from_coefficients(k, d, coeffs).expect("sized")
}

fn hyperplane_avoidance(cfg: &ExperimentConfig, seeds: &[u64]) -> Result<Output, CliError> {
    let p: AvoidanceParams = params(&cfg.params)?;
    let s = Setup::new(cfg)?;
    let c = s.working(p.reduce_alpha)?;
    let d = c.dim();
    if p.k == 0 || p.k >= d {
        return Err(CliError::Config(format!("k must lie in 1..{d}")));
    }
    let results = per_seed(seeds, |seed| {
        let omega = match &p.omega {
            Some(o) => o.to_kvector::<f64>()?,
            None => random_form(d - p.k, d, &mut ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15)),
        };
        let h = hyperplane_section(&omega)?;
        let x = s.point(&p.point, seed, p.n)?;
        let sp = SamplingParams {
            spectrum_steps: p.spectrum_steps,
            ..SamplingParams::new(p.k, p.n, p.samples, seed)
        };
        Ok(hyperplane_avoidance_stat(&*c, &s.mu, &x, &h, &sp, &p.theta_grid)?)
    })?;
    let mut rows = Vec::new();
    for (seed, rep) in &results {
        for (t, f) in &rep.fractions {
            rows.push(vec!["hyperplane-avoidance".into(), seed.to_string(), p.n.to_string(), num(*t), num(*f)]);
        }
    }
    let json = json!(results
        .iter()
        .map(|(seed, r)| json!({"seed": seed, "distances": r.distances}))
        .collect::<Vec<_>>());
    Ok(Output {
        table: Table {
            header: header(&["experiment_id", "seed", "n", "theta", "fraction_within"]),
            rows,
        },
        json,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConeParams {
    #[serde(default = "two")]
    d: usize,
    #[serde(default = "one")]
    k: usize,
    #[serde(default = "default_theta")]
    theta: f64,
    #[serde(default = "default_gamma")]
    gamma: f64,
    #[serde(default = "default_cone_samples")]
    samples: usize,
    #[serde(default)]
    matrix: Option<Vec<Vec<Value>>>,
}

fn two() -> usize {
    2
}

fn default_theta() -> f64 {
    0.3
}

fn default_gamma() -> f64 {
    0.5
}

fn default_cone_samples() -> usize {
    10_000
}

fn cone_calibrate(cfg: &ExperimentConfig, seeds: &[u64]) -> Result<Output, CliError> {
    let p: ConeParams = params(&cfg.params)?;
    let matrix = p.matrix.as_deref().map(parse_matrix).transpose()?;
    let results = per_seed(seeds, |seed| match &matrix {
        Some(a) => {
            let r = cone_contraction_check(a, p.k, p.theta, p.samples, seed)?;
            Ok(vec![num(r.gap), num(r.theta), num(r.max_distance), r.violations.to_string(), r.holds.to_string()])
        }
        None => {
            let g = calibrate_cone_gap(p.d, p.theta, p.gamma, p.samples, seed)?;
            Ok(vec![num(g), num(p.theta), String::new(), String::new(), String::new()])
        }
    })?;
    let rows = results
        .iter()
        .map(|(seed, r)| {
            let mut row = vec!["cone-calibrate".to_string(), seed.to_string()];
            row.extend(r.iter().cloned());
            row
        })
        .collect();
    let json = json!(results.iter().map(|(seed, r)| json!({"seed": seed, "row": r})).collect::<Vec<_>>());
    Ok(Output {
        table: Table {
            header: header(&["experiment_id", "seed", "gap", "theta", "max_distance", "violations", "holds"]),
            rows,
        },
        json,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EquiParams {
    #[serde(default = "two")]
    d: usize,
    #[serde(default = "one")]
    k: usize,
    #[serde(default = "default_theta0")]
    theta0: f64,
    #[serde(default = "default_epsilon")]
    epsilon: f64,
    #[serde(default = "default_equi_samples")]
    samples: usize,
    #[serde(default = "default_ts")]
    ts: Vec<f64>,
}

fn default_theta0() -> f64 {
    0.1
}

fn default_epsilon() -> f64 {
    0.05
}

fn default_equi_samples() -> usize {
    1000
}

fn default_ts() -> Vec<f64> {
    vec![10.0, 1e3, 1e6]
}

fn equicontinuity(cfg: &ExperimentConfig, seeds: &[u64]) -> Result<Output, CliError> {
    let p: EquiParams = params(&cfg.params)?;
    let results = per_seed(seeds, |seed| {
        p.ts.iter()
            .map(|&t| {
                let mut a = DMatrix::identity(p.d, p.d);
                a[(0, 0)] = t;
                Ok((t, equicontinuity_check(&a, p.k, p.theta0, p.epsilon, p.samples, seed)?))
            })
            .collect::<Result<Vec<_>, CliError>>()
    })?;
    let mut rows = Vec::new();
    for (seed, list) in &results {
        for (t, r) in list {
            rows.push(vec![
                "equicontinuity".into(),
                seed.to_string(),
                num(*t),
                num(r.epsilon),
                num(r.certified_delta),
                num(r.measured_delta),
                r.violations.to_string(),
            ]);
        }
    }
    let json = json!(results
        .iter()
        .map(|(seed, list)| json!({"seed": seed, "reports": list.iter().map(|(_, r)| r).collect::<Vec<_>>()}))
        .collect::<Vec<_>>());
    Ok(Output {
        table: Table {
            header: header(&["experiment_id", "seed", "t", "epsilon", "certified_delta", "measured_delta", "violations"]),
            rows,
        },
        json,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PeriodicParams {
    #[serde(default = "default_max_period")]
    max_period: usize,
}

fn default_max_period() -> usize {
    4
}

fn periodic(cfg: &ExperimentConfig, seeds: &[u64]) -> Result<Output, CliError> {
    let p: PeriodicParams = params(&cfg.params)?;
    let s = Setup::new(cfg)?;
    let d = s.cocycle.dim();
    let seed = seeds[0];
    let orbits = periodic_orbits(&s.spec, p.max_period);
    let spectra = orbits
        .par_iter()
        .map(|o| Ok((o, periodic_spectrum(&s.cocycle, o)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut cols = vec!["experiment_id".to_string(), "seed".into(), "word".into(), "period".into()];
    cols.extend((1..=d).map(|i| format!("lambda{i}")));
    let mut rows = Vec::new();
    let mut list = Vec::new();
    for (o, spec) in &spectra {
        let q = o.minimal_period().expect("periodic");
        let word = format_word(&o.window(0, q as i64 - 1));
        let mut r = vec!["periodic-spectrum".to_string(), seed.to_string(), word.clone(), q.to_string()];
        r.extend(spec.iter().map(|&x| num(x)));
        rows.push(r);
        list.push(json!({"word": word, "exponents": spec}));
    }
    Ok(Output {
        table: Table { header: cols, rows },
        json: Value::Array(list),
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DeltaParams {
    xi1: Vec<Vec<f64>>,
    xi2: Vec<Vec<f64>>,
    #[serde(default = "default_delta_n")]
    n_list: Vec<usize>,
    #[serde(default)]
    point: Option<Value>,
}

fn default_delta_n() -> Vec<usize> {
    vec![1, 10, 100]
}

fn delta(cfg: &ExperimentConfig, seeds: &[u64]) -> Result<Output, CliError> {
    let p: DeltaParams = params(&cfg.params)?;
    let s = Setup::new(cfg)?;
    let xi1 = GrassmannPoint::from_vectors(&p.xi1)?;
    let xi2 = GrassmannPoint::from_vectors(&p.xi2)?;
    let n_max = p.n_list.iter().copied().max().unwrap_or(0);
    let results = per_seed(seeds, |seed| {
        let x = s.point(&p.point, seed, n_max)?;
        p.n_list
            .iter()
            .map(|&n| Ok((n, delta_diagnostic(&s.cocycle, &x, &xi1, &xi2, n)?)))
            .collect::<Result<Vec<_>, CliError>>()
    })?;
    let mut rows = Vec::new();
    for (seed, list) in &results {
        for (n, v) in list {
            rows.push(vec!["delta-diagnostic".into(), seed.to_string(), n.to_string(), num(*v)]);
        }
    }
    let json = json!(results
        .iter()
        .map(|(seed, list)| json!({"seed": seed, "values": list.iter().map(|(n, v)| json!({"n": n, "value": v})).collect::<Vec<_>>()}))
        .collect::<Vec<_>>());
    Ok(Output {
        table: Table {
            header: header(&["experiment_id", "seed", "n", "log_delta_rate"]),
            rows,
        },
        json,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AdjointParams {
    #[serde(default = "default_adjoint_n")]
    n: usize,
    #[serde(default = "default_trials")]
    trials: usize,
    #[serde(default = "one")]
    k: usize,
    #[serde(default)]
    point: Option<Value>,
}

fn default_adjoint_n() -> usize {
    20
}

/// `d((AV)^perp, A^{-T} V^perp)` for a random `A` and `k`-plane `V`.
pub fn orthocomplement_defect(d: usize, k: usize, rng: &mut ChaCha8Rng) -> Result<f64, CliError> {
    let a = DMatrix::from_fn(d, d, |_, _| StandardNormal.sample(&mut *rng));
    let v = GrassmannPoint::random(k, d, rng);
    let inv_t = a
        .clone()
        .try_inverse()
        .ok_or_else(|| CliError::Config("sampled singular matrix".into()))?
        .transpose();
    let lhs = v.image(&a)?.orthogonal_complement().expect("proper subspace");
    let rhs = v.orthogonal_complement().expect("proper subspace").image(&inv_t)?;
    Ok(grassmann_distance(&lhs, &rhs)?)
}

fn adjoint(cfg: &ExperimentConfig, seeds: &[u64]) -> Result<Output, CliError> {
    let p: AdjointParams = params(&cfg.params)?;
    let s = Setup::new(cfg)?;
    let d = s.cocycle.dim();
    if p.k == 0 || p.k >= d {
        return Err(CliError::Config(format!("k must lie in 1..{d}")));
    }
    let results = per_seed(seeds, |seed| {
        let x = s.point(&p.point, seed, p.n)?;
        let sing = adjoint_singular_defect(&s.cocycle, &x, p.n)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for _ in 0..p.trials {
            worst = worst.max(orthocomplement_defect(d, p.k, &mut rng)?);
        }
        Ok((sing, worst))
    })?;
    let rows = results
        .iter()
        .map(|(seed, (a, b))| vec!["adjoint-check".into(), seed.to_string(), p.n.to_string(), num(*a), num(*b)])
        .collect();
    let json = json!(results
        .iter()
        .map(|(seed, (a, b))| json!({"seed": seed, "singular_value_defect": a, "orthocomplement_defect": b}))
        .collect::<Vec<_>>());
    Ok(Output {
        table: Table {
            header: header(&["experiment_id", "seed", "n", "singular_value_defect", "orthocomplement_defect"]),
            rows,
        },
        json,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConformalParams {
    #[serde(default = "default_conformal_tol")]
    tol: f64,
    #[serde(default = "default_max_iter")]
    max_iter: usize,
    #[serde(default = "default_starts")]
    starts: usize,
}

fn default_conformal_tol() -> f64 {
    1e-8
}

fn default_max_iter() -> usize {
    2000
}

fn default_starts() -> usize {
    8
}

fn conformal(cfg: &ExperimentConfig, seeds: &[u64]) -> Result<Output, CliError> {
    let p: ConformalParams = params(&cfg.params)?;
    let gens = cfg.generators()?;
    let results = per_seed(seeds, |seed| {
        let found = conformal_detector(&gens, p.tol, p.max_iter);
        let best = conformal_multistart(&gens, p.max_iter, p.starts, seed);
        Ok((found, best))
    })?;
    let rows = results
        .iter()
        .map(|(seed, (found, best))| {
            vec![
                "conformal-detect".into(),
                seed.to_string(),
                found.is_some().to_string(),
                found.as_ref().map_or_else(String::new, |f| num(f.residual)),
                num(*best),
            ]
        })
        .collect();
    let json = json!(results
        .iter()
        .map(|(seed, (found, best))| json!({"seed": seed, "structure": found, "multistart_residual": best}))
        .collect::<Vec<_>>());
    Ok(Output {
        table: Table {
            header: header(&["experiment_id", "seed", "conformal", "residual", "multistart_residual"]),
            rows,
        },
        json,
    })
}

fn counterexample(cfg: &ExperimentConfig) -> Result<Output, CliError> {
    if !(cfg.params.is_null() || cfg.params.as_object().is_some_and(|o| o.is_empty())) {
        return Err(CliError::Config("counterexample takes no params".into()));
    }
    let report = verify_counterexample();
    let rows = report
        .steps
        .iter()
        .map(|s| vec!["counterexample".into(), s.step.to_string(), s.passed.to_string()])
        .collect();
    Ok(Output {
        table: Table {
            header: header(&["experiment_id", "step", "passed"]),
            rows,
        },
        json: serde_json::to_value(&report).expect("serializable"),
    })
}
