//! Config-driven runner for the cocycle-lab experiments.
//!
//! One invocation runs one experiment and writes `<id>.csv`, `<id>.json`
//! and `manifest.json` into the output directory.

pub mod config;
pub mod experiments;

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;
use thiserror::Error;

pub use config::{ExperimentConfig, LoadedConfig};
pub use experiments::{run_experiment, Output, Table, EXPERIMENTS};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Core(#[from] cocycle_lab::Error),
    #[error("io error: {0}")]
    Io(String),
}

macro_rules! core_from {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Core(e.into())
            }
        })*
    };
}

core_from!(
    cocycle_lab::SymbolicError,
    cocycle_lab::MarkovError,
    cocycle_lab::CocycleError,
    cocycle_lab::MultilinearError,
    cocycle_lab::LyapunovError,
    cocycle_lab::UstateError
);

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use cocycle_lab::ErrorKind;
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Core(e) => match e.kind() {
                ErrorKind::Config => 2,
                ErrorKind::Precondition => 3,
                ErrorKind::Numerical => 4,
            },
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

/// Files written by a run.
#[derive(Clone, Debug)]
pub struct RunArtifacts {
    pub csv: PathBuf,
    pub json: PathBuf,
    pub manifest: PathBuf,
    pub config_hash: String,
}

/// RFC 4180 text with a trailing `config_hash` column.
pub fn render_csv(table: &Table, hash: &str) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(Vec::new());
    let with_hash = |cells: &[String], tail: &str| cells.iter().map(String::as_str).chain([tail]).map(str::to_owned).collect::<Vec<_>>();
    w.write_record(with_hash(&table.header, "config_hash")).expect("in-memory write");
    for r in &table.rows {
        w.write_record(with_hash(r, hash)).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn run_loaded(loaded: &LoadedConfig, out: &Path) -> Result<RunArtifacts, CliError> {
    let cfg = &loaded.config;
    let output = run_experiment(cfg)?;
    fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    let id = cfg.experiment.clone();
    let csv = render_csv(&output.table, &loaded.hash);
    let json = serde_json::to_string_pretty(&json!({
        "experiment": id,
        "config_hash": loaded.hash,
        "seeds": cfg.seeds(),
        "result": output.json,
    }))
    .expect("serializable")
        + "\n";
    let csv_path = out.join(format!("{id}.csv"));
    let json_path = out.join(format!("{id}.json"));
    write(&csv_path, csv.as_bytes())?;
    write(&json_path, json.as_bytes())?;
    let manifest = serde_json::to_string_pretty(&json!({
        "experiment": id,
        "config_hash": loaded.hash,
        "seeds": cfg.seeds(),
        "versions": {
            "cocycle-lab": cocycle_lab::VERSION,
            "cocycle-lab-cli": env!("CARGO_PKG_VERSION"),
        },
        "files": {
            format!("{id}.csv"): config::sha256_hex(csv.as_bytes()),
            format!("{id}.json"): config::sha256_hex(json.as_bytes()),
        },
    }))
    .expect("serializable")
        + "\n";
    let manifest_path = out.join("manifest.json");
    write(&manifest_path, manifest.as_bytes())?;
    Ok(RunArtifacts {
        csv: csv_path,
        json: json_path,
        manifest: manifest_path,
        config_hash: loaded.hash.clone(),
    })
}

pub fn run(opts: &RunOptions) -> Result<RunArtifacts, CliError> {
    let text = fs::read_to_string(&opts.config).map_err(|e| CliError::Config(format!("{}: {e}", opts.config.display())))?;
    let loaded = LoadedConfig::parse(&text, opts.seed)?;
    let out = opts
        .out
        .clone()
        .or_else(|| loaded.config.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("results"));
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = opts.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| CliError::Config(format!("threads: {e}")))?;
    pool.install(|| run_loaded(&loaded, &out))
}
