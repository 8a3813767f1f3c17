//! Dataset and matrix readers, and JSON/CSV artifact writers.
//!
//! Data files are headerless CSV (one observation per row) or JSON
//! `{"n", "d", "rows"}`. Run artifacts are JSON envelopes carrying a schema
//! version, the payload kind and seed provenance. Floats are written in
//! shortest round-trip form, so reading an artifact back yields the same bits.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bootstrap::{EmpiricalDistribution, SphericalReport, TestReport};
use crate::error::{invalid, Error, Result};
use crate::linalg::SymMatrix;
use crate::simulate::{DensityTable, SimResult};
use crate::stats::Dataset;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataFormat {
    Csv,
    Json,
}

impl DataFormat {
    /// Guesses the format from the file extension; anything but `.json` is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => DataFormat::Json,
            _ => DataFormat::Csv,
        }
    }
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.to_path_buf(), source }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

/// Writes `bytes` to `path`, creating parent directories.
pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| io_err(path, e))?;
    f.write_all(bytes).map_err(|e| io_err(path, e))
}

/// Parses headerless numeric CSV into rows of equal length.
pub fn parse_csv_rows(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            column: None,
            message: e.to_string(),
        })?;
        let line = record.position().map_or(rows.len() + 1, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                cell.parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    column: Some(c + 1),
                    message: format!("'{cell}' is not a number"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Parse {
                    line,
                    column: None,
                    message: format!("expected {} values, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn parse_csv_dataset(text: &str) -> Result<Dataset> {
    let rows = parse_csv_rows(text)?;
    if rows.is_empty() {
        return Err(Error::Parse { line: 1, column: None, message: "no observations".into() });
    }
    Dataset::from_rows(&rows)
}

pub fn read_dataset(path: &Path, format: DataFormat) -> Result<Dataset> {
    let text = read_text(path)?;
    match format {
        DataFormat::Csv => parse_csv_dataset(&text),
        DataFormat::Json => Ok(serde_json::from_str(&text)?),
    }
}

/// Headerless CSV, one observation per line.
pub fn dataset_to_csv(x: &Dataset) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for r in x.rows() {
        w.write_record(r.iter().map(f64::to_string)).map_err(csv_err)?;
    }
    into_string(w)
}

pub fn write_dataset(x: &Dataset, path: &Path, format: DataFormat) -> Result<()> {
    let text = match format {
        DataFormat::Csv => dataset_to_csv(x)?,
        DataFormat::Json => serde_json::to_string_pretty(x)? + "\n",
    };
    write_bytes(path, text.as_bytes())
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixFile {
    Rows(Vec<Vec<f64>>),
    Tagged(SymMatrix),
}

/// Reads a symmetric matrix from square CSV, a JSON array of rows, or JSON
/// `{"d", "entries"}`.
pub fn read_matrix(path: &Path, format: DataFormat) -> Result<SymMatrix> {
    let text = read_text(path)?;
    match format {
        DataFormat::Csv => SymMatrix::from_rows(&parse_csv_rows(&text)?),
        DataFormat::Json => match serde_json::from_str(&text)? {
            MatrixFile::Rows(rows) => SymMatrix::from_rows(&rows),
            MatrixFile::Tagged(m) => Ok(m),
        },
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Invariant(format!("csv writer: {e}"))
}

fn into_string(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Invariant(format!("csv writer: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Invariant(e.to_string()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArtifactKind {
    TestReport,
    SimResult,
    SimGrid,
    Distribution,
    DensityTable,
    SphericalReport,
    VerifyReport,
}

/// Payload types that can be wrapped in a [`RunArtifact`].
pub trait Artifact: Serialize + DeserializeOwned {
    const KIND: ArtifactKind;
}

impl Artifact for TestReport {
    const KIND: ArtifactKind = ArtifactKind::TestReport;
}

impl Artifact for SimResult {
    const KIND: ArtifactKind = ArtifactKind::SimResult;
}

impl Artifact for Vec<SimResult> {
    const KIND: ArtifactKind = ArtifactKind::SimGrid;
}

impl Artifact for EmpiricalDistribution {
    const KIND: ArtifactKind = ArtifactKind::Distribution;
}

impl Artifact for Vec<DensityTable> {
    const KIND: ArtifactKind = ArtifactKind::DensityTable;
}

impl Artifact for SphericalReport {
    const KIND: ArtifactKind = ArtifactKind::SphericalReport;
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    /// SHA-256 of the canonical JSON form of the run configuration.
    pub config_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub git_describe: Option<String>,
    pub crate_version: String,
}

impl Provenance {
    pub fn new<C: Serialize>(seed: u64, config: &C) -> Result<Self> {
        Ok(Self {
            seed,
            config_hash: config_hash(config)?,
            timestamp: None,
            git_describe: option_env!("SPARSECOV_GIT_DESCRIBE").map(str::to_owned),
            crate_version: env!("CARGO_PKG_VERSION").to_owned(),
        })
    }

    /// Adds the current time as Unix seconds. Off by default so that repeated
    /// runs produce identical bytes.
    pub fn with_timestamp(mut self) -> Self {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        self.timestamp = Some(secs.to_string());
        self
    }
}

pub fn config_hash<C: Serialize>(config: &C) -> Result<String> {
    // round-trip through Value so map keys are sorted
    let canonical = serde_json::to_string(&serde_json::to_value(config)?)?;
    Ok(hex::encode(Sha256::digest(canonical.as_bytes())))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunArtifact<T> {
    pub schema_version: String,
    pub kind: ArtifactKind,
    pub provenance: Provenance,
    pub payload: T,
}

impl<T: Artifact> RunArtifact<T> {
    pub fn new(payload: T, provenance: Provenance) -> Self {
        Self { schema_version: SCHEMA_VERSION.into(), kind: T::KIND, provenance, payload }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let a: Self = serde_json::from_str(text)?;
        if a.schema_version != SCHEMA_VERSION {
            return Err(invalid(format!("unsupported schema version '{}'", a.schema_version)));
        }
        if a.kind != T::KIND {
            return Err(invalid(format!("artifact holds {:?}, expected {:?}", a.kind, T::KIND)));
        }
        Ok(a)
    }
}

/// Writes `payload` as a JSON run artifact.
pub fn write_report<T: Artifact + Clone>(payload: &T, provenance: &Provenance, path: &Path) -> Result<()> {
    let text = RunArtifact::new(payload.clone(), provenance.clone()).to_json()?;
    write_bytes(path, text.as_bytes())
}

pub fn read_report<T: Artifact>(path: &Path) -> Result<RunArtifact<T>> {
    RunArtifact::from_json(&read_text(path)?)
}

/// One sample per line, sorted.
pub fn distribution_to_csv(dist: &EmpiricalDistribution) -> String {
    dist.samples().iter().map(|v| format!("{v}\n")).collect()
}

/// Header plus one row per replicate.
pub fn sim_result_to_csv(result: &SimResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["replicate", "statistic", "q_alpha", "p_value", "reject", "support"]).map_err(csv_err)?;
    for d in &result.decisions {
        w.write_record([
            d.replicate.to_string(),
            d.statistic.to_string(),
            d.q_alpha.to_string(),
            d.p_value.to_string(),
            (d.reject as u8).to_string(),
            d.support.to_string(),
        ])
        .map_err(csv_err)?;
    }
    into_string(w)
}

/// Grid summary: one row per configuration with its rejection rate.
pub fn sim_grid_to_csv(results: &[SimResult]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["model", "d", "n", "m", "alternative", "method", "mc_reps", "rejection_rate", "errors"])
        .map_err(csv_err)?;
    for r in results {
        let c = &r.config;
        w.write_record([
            c.model.name().to_string(),
            c.model.d.to_string(),
            c.n.to_string(),
            c.m.to_string(),
            c.alternative.label().to_string(),
            c.method.to_string(),
            r.decisions.len().to_string(),
            r.rejection_rate.to_string(),
            r.errors.len().to_string(),
        ])
        .map_err(csv_err)?;
    }
    into_string(w)
}

/// `source,value` rows for the three samples of a density table.
pub fn density_samples_to_csv(table: &DensityTable) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["source", "value"]).map_err(csv_err)?;
    for (name, dist) in [("exact", &table.exact), ("m_boots", &table.m_boots), ("n_boots", &table.n_boots)] {
        for v in dist.samples() {
            w.write_record([name.to_string(), v.to_string()]).map_err(csv_err)?;
        }
    }
    into_string(w)
}

/// `x,exact,m_boots,n_boots` kernel density rows.
pub fn density_grid_to_csv(table: &DensityTable) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x", "exact", "m_boots", "n_boots"]).map_err(csv_err)?;
    for r in &table.grid {
        w.write_record([r.x.to_string(), r.exact.to_string(), r.m_boots.to_string(), r.n_boots.to_string()])
            .map_err(csv_err)?;
    }
    into_string(w)
}
