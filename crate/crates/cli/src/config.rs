use std::collections::BTreeMap;

use cocycle_lab::cocycle::CocycleJson;
use cocycle_lab::markov::MarkovJson;
use cocycle_lab::scalar::scalar_from_json;
use cocycle_lab::symbolic::PointJson;
use cocycle_lab::{LocallyConstantCocycle, MarkovMeasure, SubshiftSpec, SymbolicPoint};
use nalgebra::DMatrix;
use serde::Deserialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubshiftConfig {
    #[serde(default)]
    pub adjacency: Option<Vec<Vec<u8>>>,
    #[serde(default)]
    pub full_shift: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureConfig {
    #[serde(default)]
    pub transition: Option<Vec<Vec<Value>>>,
    #[serde(default)]
    pub bernoulli: Option<Vec<Value>>,
    #[serde(default)]
    pub parry: bool,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CocycleConfig {
    #[serde(default)]
    pub d: Option<usize>,
    #[serde(default)]
    pub window: Option<usize>,
    #[serde(default)]
    pub entries: Option<BTreeMap<String, Vec<Vec<Value>>>>,
    /// One matrix per symbol.
    #[serde(default)]
    pub generators: Option<Vec<Vec<Vec<Value>>>>,
    #[serde(default)]
    pub constant: Option<Vec<Vec<Value>>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default)]
    pub subshift: Option<SubshiftConfig>,
    #[serde(default)]
    pub measure: Option<MeasureConfig>,
    #[serde(default)]
    pub cocycle: Option<CocycleConfig>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    #[serde(default)]
    pub params: Value,
    #[serde(default)]
    pub output: Option<String>,
}

/// A parsed config together with the hash of its canonical JSON form.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub hash: String,
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

impl LoadedConfig {
    /// Parses `text`, applying a seed override before hashing.
    pub fn parse(text: &str, seed_override: Option<u64>) -> Result<Self, CliError> {
        let mut value: Value = serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid JSON: {e}")))?;
        if let Some(seed) = seed_override {
            let obj = value
                .as_object_mut()
                .ok_or_else(|| CliError::Config("config must be a JSON object".into()))?;
            obj.remove("seeds");
            obj.insert("seed".into(), Value::from(seed));
        }
        let config: ExperimentConfig =
            serde_json::from_value(value.clone()).map_err(|e| CliError::Config(format!("schema: {e}")))?;
        let canonical = serde_json::to_vec(&value).expect("serializable");
        Ok(Self {
            config,
            hash: sha256_hex(&canonical),
        })
    }
}

pub fn parse_matrix(rows: &[Vec<Value>]) -> Result<DMatrix<f64>, CliError> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Config(format!("matrix must be square and nonempty (got {n} rows)")));
    }
    let mut m = DMatrix::zeros(n, n);
    for (i, r) in rows.iter().enumerate() {
        for (j, v) in r.iter().enumerate() {
            m[(i, j)] = scalar_from_json::<f64>(v).ok_or_else(|| CliError::Config(format!("bad matrix entry {v}")))?;
        }
    }
    Ok(m)
}

impl ExperimentConfig {
    pub fn seeds(&self) -> Vec<u64> {
        match (&self.seeds, self.seed) {
            (Some(s), _) if !s.is_empty() => s.clone(),
            (_, Some(s)) => vec![s],
            _ => vec![0],
        }
    }

    pub fn spec(&self) -> Result<SubshiftSpec, CliError> {
        if let Some(s) = &self.subshift {
            return match (&s.adjacency, s.full_shift) {
                (Some(a), None) => Ok(SubshiftSpec::new(a.clone())?),
                (None, Some(m)) => Ok(SubshiftSpec::full_shift(m)),
                _ => Err(CliError::Config("subshift needs exactly one of adjacency, full_shift".into())),
            };
        }
        match self.cocycle.as_ref().and_then(|c| c.generators.as_ref()) {
            Some(g) => Ok(SubshiftSpec::full_shift(g.len())),
            None => Err(CliError::Config("missing subshift".into())),
        }
    }

    pub fn measure(&self, spec: &SubshiftSpec) -> Result<MarkovMeasure<f64>, CliError> {
        let Some(m) = &self.measure else {
            return Ok(MarkovMeasure::parry(spec));
        };
        match (&m.transition, &m.bernoulli, m.parry) {
            (Some(t), None, false) => Ok(MarkovJson {
                transition: t.clone(),
                mode: "float".into(),
            }
            .to_measure(Some(spec))?),
            (None, Some(w), false) => {
                let w = w
                    .iter()
                    .map(|v| scalar_from_json::<f64>(v).ok_or_else(|| CliError::Config(format!("bad weight {v}"))))
                    .collect::<Result<Vec<_>, _>>()?;
                if w.len() != spec.alphabet_size() {
                    return Err(CliError::Config("bernoulli weights must match the alphabet".into()));
                }
                let row: Vec<Value> = w.iter().map(|&x| Value::from(x)).collect();
                Ok(MarkovJson {
                    transition: vec![row; w.len()],
                    mode: "float".into(),
                }
                .to_measure(Some(spec))?)
            }
            (None, None, true) => Ok(MarkovMeasure::parry(spec)),
            _ => Err(CliError::Config("measure needs exactly one of transition, bernoulli, parry".into())),
        }
    }

    pub fn cocycle(&self, spec: &SubshiftSpec) -> Result<LocallyConstantCocycle<f64>, CliError> {
        let c = self.cocycle.as_ref().ok_or_else(|| CliError::Config("missing cocycle".into()))?;
        match (&c.entries, &c.generators, &c.constant) {
            (Some(e), None, None) => {
                let d = c.d.ok_or_else(|| CliError::Config("cocycle entries need d".into()))?;
                Ok(CocycleJson {
                    d,
                    window: c.window.unwrap_or(0),
                    entries: e.clone(),
                }
                .to_cocycle::<f64>(spec)?)
            }
            (None, Some(g), None) => {
                let mats = g.iter().map(|m| parse_matrix(m)).collect::<Result<Vec<_>, _>>()?;
                Ok(LocallyConstantCocycle::from_matrices(spec.clone(), &mats)?)
            }
            (None, None, Some(m)) => Ok(LocallyConstantCocycle::constant_matrix(spec.clone(), &parse_matrix(m)?)?),
            _ => Err(CliError::Config("cocycle needs exactly one of entries, generators, constant".into())),
        }
    }

    pub fn generators(&self) -> Result<Vec<DMatrix<f64>>, CliError> {
        let c = self.cocycle.as_ref().ok_or_else(|| CliError::Config("missing cocycle".into()))?;
        match (&c.generators, &c.constant) {
            (Some(g), None) => g.iter().map(|m| parse_matrix(m)).collect(),
            (None, Some(m)) => Ok(vec![parse_matrix(m)?]),
            _ => Err(CliError::Config("this experiment needs cocycle generators".into())),
        }
    }
}

pub fn parse_point(v: &Value, spec: &SubshiftSpec) -> Result<SymbolicPoint, CliError> {
    let p: PointJson = serde_json::from_value(v.clone()).map_err(|e| CliError::Config(format!("point: {e}")))?;
    Ok(p.to_point(spec)?)
}
