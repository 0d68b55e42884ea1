//! Parsing of method, scenario and grid specifications shared by the CLI
//! and JSON run configurations.

use std::path::Path;

use clap::ValueEnum;
use rlrt_core::{A1TwosRule, Method, Scenario, ShrinkageParams, SymMatrix};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::RunError;
use crate::io::{read_matrix_file, ReadOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodName {
    Rlrt,
    Clrt,
    Lw,
    Chen,
}

/// One `Rlrt` per λ, in order; other methods once. Duplicates are kept.
pub fn expand_methods(names: &[MethodName], lambdas: &[f64]) -> Result<Vec<Method>, RunError> {
    let mut out = Vec::new();
    for name in names {
        match name {
            MethodName::Rlrt => {
                if lambdas.is_empty() {
                    return Err(RunError::Config("rlrt needs at least one lambda".into()));
                }
                for &l in lambdas {
                    let params = ShrinkageParams::new(l).map_err(|_| {
                        RunError::Config(format!("lambda must lie in (0, 1], got {l}"))
                    })?;
                    out.push(Method::Rlrt(params));
                }
            }
            MethodName::Clrt => out.push(Method::Clrt),
            MethodName::Lw => out.push(Method::LedoitWolf),
            MethodName::Chen => out.push(Method::Chen),
        }
    }
    Ok(out)
}

/// `max`, `min` or `fixed:k`.
pub fn parse_a1_rule(s: &str) -> Result<A1TwosRule, RunError> {
    match s.trim() {
        "max" => Ok(A1TwosRule::Max),
        "min" => Ok(A1TwosRule::Min),
        other => other
            .strip_prefix("fixed:")
            .and_then(|k| k.parse().ok())
            .map(A1TwosRule::Fixed)
            .ok_or_else(|| RunError::Config(format!("unknown a1 twos rule {other:?}"))),
    }
}

/// `null`, `a1`…`a4`, `cs:β`, or `custom:PATH` naming a covariance file.
pub fn parse_scenario(s: &str, a1: A1TwosRule) -> Result<Scenario, RunError> {
    let s = s.trim();
    let scenario = match s.to_ascii_lowercase().as_str() {
        "null" => Scenario::Null,
        "a1" => Scenario::A1(a1),
        "a2" => Scenario::A2,
        "a3" => Scenario::A3,
        "a4" => Scenario::A4,
        lower => {
            if let Some(b) = lower.strip_prefix("cs:") {
                let beta: f64 = b
                    .parse()
                    .map_err(|_| RunError::Config(format!("bad beta in scenario {s:?}")))?;
                if !(beta.is_finite() && beta >= 0.0) {
                    return Err(RunError::Config(format!("beta must be nonnegative in {s:?}")));
                }
                Scenario::CsBeta(beta)
            } else if s.starts_with("custom:") {
                let path = Path::new(&s["custom:".len()..]);
                let m = read_matrix_file(path, ReadOptions::default())
                    .map_err(|e| RunError::Config(format!("custom covariance: {e}")))?;
                if m.n() != m.p() {
                    return Err(RunError::Config(format!(
                        "custom covariance must be square, got {}x{}",
                        m.n(),
                        m.p()
                    )));
                }
                Scenario::Custom(SymMatrix::from_row_major(m.p(), m.values().to_vec())?)
            } else {
                return Err(RunError::Config(format!("unknown scenario {s:?}")));
            }
        }
    };
    Ok(scenario)
}

/// `start:stop:step` (inclusive of `stop` up to rounding) or a comma list.
/// The result must be strictly increasing.
pub fn parse_beta_grid(s: &str) -> Result<Vec<f64>, RunError> {
    let bad = || RunError::Config(format!("bad beta grid {s:?}"));
    let parts: Vec<&str> = s.split(':').collect();
    let grid = if parts.len() == 3 {
        let v: Vec<f64> = parts
            .iter()
            .map(|x| x.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_, _>>()?;
        let (start, stop, step) = (v[0], v[1], v[2]);
        if !(step > 0.0 && stop >= start) {
            return Err(bad());
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        (0..count).map(|k| start + k as f64 * step).collect()
    } else if parts.len() == 1 {
        s.split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        return Err(bad());
    };
    if grid.is_empty() || grid.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
        return Err(bad());
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(RunError::Config(format!("beta grid {s:?} is not strictly increasing")));
    }
    Ok(grid)
}

/// Simulation settings as read from a `--config` JSON file. Any field may be
/// omitted; command-line flags take precedence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateFile {
    pub scenarios: Option<Vec<String>>,
    pub n: Option<Vec<usize>>,
    pub gamma: Option<Vec<f64>>,
    pub methods: Option<Vec<MethodName>>,
    pub lambdas: Option<Vec<f64>>,
    pub reps: Option<u32>,
    pub seed: Option<u64>,
    pub eta: Option<f64>,
    pub a1_twos_rule: Option<String>,
}

impl SimulateFile {
    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))
    }
}

/// Fully resolved simulation settings. Its hash identifies an output table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub scenarios: Vec<String>,
    pub n: Vec<usize>,
    pub gamma: Vec<f64>,
    pub methods: Vec<MethodName>,
    pub lambdas: Vec<f64>,
    pub reps: u32,
    pub seed: u64,
    pub eta: f64,
    pub a1_twos_rule: String,
}

impl Default for SimulateConfig {
    /// The default size/power grid without Chen.
    fn default() -> Self {
        Self {
            scenarios: ["null", "a1", "a2", "a3", "a4"].map(String::from).to_vec(),
            n: vec![20, 40, 80],
            gamma: vec![0.2, 0.5, 0.8],
            methods: vec![MethodName::Rlrt, MethodName::Clrt, MethodName::Lw],
            lambdas: vec![0.2, 0.5, 0.8],
            reps: 10_000,
            seed: 0,
            eta: 0.05,
            a1_twos_rule: "max".into(),
        }
    }
}

/// Hex SHA-256 of the canonical JSON form of `value`.
pub fn config_hash<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("config serializes");
    Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
