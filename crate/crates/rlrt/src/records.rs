//! Result records and the CSV/JSON documents that carry them.
//!
//! Every document starts with its provenance: tool version, master seed and
//! the SHA-256 of the resolved configuration. In CSV these are `#` comment
//! lines ahead of the header row; in JSON a `provenance` object.

use std::io::Write;

use clap::ValueEnum;
use rlrt_core::{Method, NullAsymptotics, TestResult};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::IoError;
use crate::montecarlo::CellResult;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub tool_version: String,
    pub command: String,
    pub seed: Option<u64>,
    pub config_sha256: String,
    /// Set only where output is not meant to be reproducible byte for byte.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timestamp: Option<String>,
}

impl Provenance {
    pub fn new(command: &str, seed: Option<u64>, config_sha256: String) -> Self {
        Self {
            tool: "rlrt".into(),
            tool_version: TOOL_VERSION.into(),
            command: command.into(),
            seed,
            config_sha256,
            timestamp: None,
        }
    }

    fn comment_lines(&self) -> Vec<String> {
        let mut v = vec![
            format!("{} {}", self.tool, self.tool_version),
            format!("command: {}", self.command),
        ];
        if let Some(s) = self.seed {
            v.push(format!("seed: {s}"));
        }
        v.push(format!("config_sha256: {}", self.config_sha256));
        if let Some(t) = &self.timestamp {
            v.push(format!("timestamp: {t}"));
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document<R> {
    pub provenance: Provenance,
    pub records: Vec<R>,
}

impl<R: Serialize> Document<R> {
    pub fn render(&self, format: Format) -> Result<Vec<u8>, IoError> {
        let mut out = Vec::new();
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut out, self)?;
                out.push(b'\n');
            }
            Format::Csv => {
                for line in self.provenance.comment_lines() {
                    writeln!(out, "# {line}")?;
                }
                let mut w = csv::Writer::from_writer(&mut out);
                for r in &self.records {
                    w.serialize(r).map_err(csv_error)?;
                }
                w.flush()?;
            }
        }
        Ok(out)
    }
}

impl<R: DeserializeOwned> Document<R> {
    /// Reads back CSV written by [`Document::render`]. Provenance comments are
    /// not parsed; only the records are returned.
    pub fn parse_csv_records(text: &[u8]) -> Result<Vec<R>, IoError> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text);
        rdr.deserialize().map(|r| r.map_err(csv_error)).collect()
    }
}

fn csv_error(e: csv::Error) -> IoError {
    IoError::Csv {
        line: e.position().map_or(0, |p| p.line()),
        message: e.to_string(),
    }
}

fn method_lambda(m: Method) -> Option<f64> {
    match m {
        Method::Rlrt(_) | Method::Clrt => m.lambda(),
        _ => None,
    }
}

/// One test on one data set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestRecord {
    pub input: String,
    pub method: String,
    pub lambda: Option<f64>,
    pub n: usize,
    pub p: usize,
    pub gamma_tilde: f64,
    pub raw: f64,
    pub z: f64,
    pub p_value: f64,
    pub eta: f64,
    pub reject: bool,
}

impl TestRecord {
    pub fn new(input: &str, r: &TestResult, eta: f64) -> Self {
        Self {
            input: input.into(),
            method: r.method.id().into(),
            lambda: method_lambda(r.method),
            n: r.setup.n,
            p: r.setup.p,
            gamma_tilde: r.setup.gamma_tilde,
            raw: r.raw,
            z: r.z,
            p_value: r.p_value,
            eta,
            reject: r.reject,
        }
    }
}

/// One row of a size/power table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub scenario: String,
    pub n: usize,
    pub p: usize,
    pub gamma: f64,
    pub method: String,
    pub lambda: Option<f64>,
    pub reps: u32,
    pub rate: Option<f64>,
    pub mc_se: Option<f64>,
    pub seed: u64,
    pub error: Option<String>,
}

impl CellRecord {
    pub fn new(c: &CellResult, seed: u64) -> Self {
        let ok = c.error.is_none();
        Self {
            scenario: c.scenario.label(),
            n: c.n,
            p: c.p,
            gamma: c.gamma,
            method: c.method.id().into(),
            lambda: method_lambda(c.method),
            reps: c.reps,
            rate: ok.then_some(c.rejection_rate),
            mc_se: ok.then_some(c.monte_carlo_se),
            seed,
            error: c.error.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullParamsRecord {
    pub lambda: f64,
    pub n: usize,
    pub p: usize,
    pub gamma_tilde: f64,
    /// `μ(g)`.
    pub mean: f64,
    /// `v(g)`.
    pub variance: f64,
    /// `∫ g dF` at `γ̃′`; the statistic is centered by `p` times this.
    pub centering: f64,
}

impl NullParamsRecord {
    pub fn new(lambda: f64, n: usize, p: usize, gamma_tilde: f64, a: &NullAsymptotics) -> Self {
        Self {
            lambda,
            n,
            p,
            gamma_tilde,
            mean: a.mu,
            variance: a.v,
            centering: a.centering,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRecord {
    pub beta: f64,
    pub method: String,
    pub lambda: f64,
    pub analytic_power: Option<f64>,
    pub empirical_power: f64,
    pub mc_se: f64,
    /// `1 + β` is within `√γ̃′` of 1; the analytic value is outside the theory.
    pub close_spike: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalValueRecord {
    pub method: String,
    pub lambda: Option<f64>,
    pub n: usize,
    pub p: usize,
    pub eta: f64,
    pub reps: u32,
    pub seed: u64,
    pub z_critical: f64,
    pub raw_critical: f64,
}
