//! The `rlrt` command-line tool.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rlrt_core::hypothesis::PreparedTest;
use rlrt_core::rmt::SpikePolicy;
use rlrt_core::sampling::{stream_rng, MvnSampler};
use rlrt_core::{DimensionSetup, Method, NullAsymptotics, ShrinkageParams};
use serde::Serialize;
use thiserror::Error;

use crate::config::{
    config_hash, expand_methods, parse_a1_rule, parse_beta_grid, parse_scenario, MethodName,
    SimulateConfig, SimulateFile,
};
use crate::error::{IoError, RunError};
use crate::io::{read_matrix_file, write_matrix, Header, ReadOptions};
use crate::montecarlo::{analytic_power, dimension_for, is_close_spike, Runner, SimulationGrid};
use crate::records::{
    CellRecord, CriticalValueRecord, Document, Format, NullParamsRecord, PowerRecord, Provenance,
    TestRecord,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Run(#[from] RunError),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Model(#[from] rlrt_core::Error),
}

/// What a successful command observed, for the exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Done,
    /// At least one test rejected and `--exit-on-reject` was given.
    Rejected,
}

#[derive(Debug, Parser)]
#[command(
    name = "rlrt",
    version,
    about = "Regularized likelihood ratio test of H0: Σ = I for high-dimensional data",
    long_about = "Regularized likelihood ratio test of H0: Σ = I for high-dimensional data, \
                  with the corrected LRT, Ledoit-Wolf and Chen tests for comparison and a \
                  Monte Carlo engine for size and power studies.\n\n\
                  Exit status: 0 on success (including fail-to-reject), 1 on error, \
                  2 when a test rejects and --exit-on-reject is set."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test H0: Σ = I on a data file (rows = observations).
    Test(TestArgs),
    /// Print the null mean, variance and centering of the regularized statistic.
    NullParams(NullParamsArgs),
    /// Size/power table over scenarios × n × γ × methods.
    Simulate(SimulateArgs),
    /// Analytic and empirical power under compound symmetry I + (β/p)J.
    PowerCurve(PowerCurveArgs),
    /// Empirical (1 − η) null quantile of a test's standardized score.
    CriticalValue(CriticalValueArgs),
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write here instead of standard output. The file appears only once
    /// the command has succeeded.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DimensionArgs {
    /// Sample size.
    #[arg(long)]
    pub n: usize,
    /// Dimension. Exactly one of --p and --gamma is required.
    #[arg(long, conflicts_with = "gamma", required_unless_present = "gamma")]
    pub p: Option<usize>,
    /// Aspect ratio; p = round(γ n).
    #[arg(long)]
    pub gamma: Option<f64>,
}

impl DimensionArgs {
    fn resolve(&self) -> Result<DimensionSetup, RunError> {
        let p = match (self.p, self.gamma) {
            (Some(p), _) => p,
            (None, Some(g)) if g.is_finite() && g > 0.0 => dimension_for(self.n, g),
            (None, g) => return Err(RunError::Config(format!("invalid gamma {g:?}"))),
        };
        Ok(DimensionSetup::new(self.n, p)?)
    }
}

#[derive(Debug, Args)]
pub struct TestArgs {
    /// Delimited text file (CSV, TSV or semicolon); `#` lines are ignored
    /// and a non-numeric first row is taken as a header.
    pub input: PathBuf,
    /// Tests to run, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "rlrt")]
    pub method: Vec<MethodName>,
    /// Shrinkage intensities for rlrt, comma separated, each in (0, 1].
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    pub lambda: Vec<f64>,
    /// Significance level.
    #[arg(long, default_value_t = 0.05)]
    pub eta: f64,
    /// The file stores variables in rows and observations in columns.
    #[arg(long)]
    pub transpose: bool,
    /// Treat the first row as data even if it is not numeric.
    #[arg(long)]
    pub no_header: bool,
    /// Exit with status 2 when any test rejects.
    #[arg(long)]
    pub exit_on_reject: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct NullParamsArgs {
    /// Shrinkage intensities in (0, 1], comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    pub lambda: Vec<f64>,
    #[command(flatten)]
    pub dims: DimensionArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// JSON file with any of: scenarios, n, gamma, methods, lambdas, reps,
    /// seed, eta, a1_twos_rule. Flags given on the command line win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Scenarios: null, a1, a2, a3, a4, cs:β, custom:PATH [default: null,a1,a2,a3,a4].
    #[arg(long, value_delimiter = ',')]
    pub scenario: Vec<String>,
    /// Sample sizes [default: 20,40,80].
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Aspect ratios; p = round(γ n) [default: 0.2,0.5,0.8].
    #[arg(long, value_delimiter = ',')]
    pub gamma: Vec<f64>,
    /// Tests [default: rlrt,clrt,lw].
    #[arg(long, value_enum, value_delimiter = ',')]
    pub method: Vec<MethodName>,
    /// Shrinkage intensities for rlrt [default: 0.2,0.5,0.8].
    #[arg(long, value_delimiter = ',')]
    pub lambda: Vec<f64>,
    /// Replications per cell [default: 10000].
    #[arg(long)]
    pub reps: Option<u32>,
    /// Master seed [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Significance level [default: 0.05].
    #[arg(long)]
    pub eta: Option<f64>,
    /// Number of 2s in scenario a1: max (max{1, ⌊p/5⌋}), min (min{1, ⌊p/5⌋}) or fixed:k [default: max].
    #[arg(long)]
    pub a1_twos_rule: Option<String>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Instead of a table, write the data of one replication of the single
    /// configured cell to this file.
    #[arg(long)]
    pub emit_data: Option<PathBuf>,
    /// Replication index used by --emit-data.
    #[arg(long, default_value_t = 0, requires = "emit_data")]
    pub replication: u32,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PowerCurveArgs {
    /// Shrinkage intensities of the regularized curves; the corrected LRT is always included.
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    pub lambda: Vec<f64>,
    #[command(flatten)]
    pub dims: DimensionArgs,
    /// β values as start:stop:step or a comma list, strictly increasing.
    #[arg(long)]
    pub beta_grid: String,
    /// Permit β ≤ √γ̃′; such rows are flagged in the close_spike column.
    #[arg(long)]
    pub allow_close_spike: bool,
    #[arg(long, default_value_t = 10_000)]
    pub reps: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.05)]
    pub eta: f64,
    #[arg(long)]
    pub workers: Option<usize>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CriticalValueArgs {
    #[arg(long, value_enum, default_value = "rlrt")]
    pub method: MethodName,
    #[arg(long, default_value_t = 0.5)]
    pub lambda: f64,
    #[command(flatten)]
    pub dims: DimensionArgs,
    #[arg(long, default_value_t = 0.05)]
    pub eta: f64,
    /// Null replications, at least 1000.
    #[arg(long, default_value_t = 10_000)]
    pub reps: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub workers: Option<usize>,
    #[command(flatten)]
    pub out: OutputArgs,
}

pub fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Test(a) => cmd_test(&a),
        Command::NullParams(a) => cmd_null_params(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::PowerCurve(a) => cmd_power_curve(&a),
        Command::CriticalValue(a) => cmd_critical_value(&a),
    }
}

fn check_eta(eta: f64) -> Result<(), RunError> {
    if eta > 0.0 && eta < 1.0 {
        Ok(())
    } else {
        Err(RunError::Config(format!("eta must lie in (0, 1), got {eta}")))
    }
}

/// Writes to stdout, or to `path` through a temporary file in the same
/// directory so that a failed write leaves nothing behind.
pub fn emit(bytes: &[u8], path: Option<&Path>) -> Result<(), IoError> {
    let Some(path) = path else {
        let mut out = std::io::stdout().lock();
        out.write_all(bytes)?;
        return Ok(out.flush()?);
    };
    let file_err = |source| IoError::File {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(file_err)?;
    tmp.write_all(bytes).map_err(file_err)?;
    tmp.persist(path).map_err(|e| file_err(e.error))?;
    Ok(())
}

fn write_document<R: Serialize>(doc: &Document<R>, out: &OutputArgs) -> Result<(), CliError> {
    let bytes = doc.render(out.format)?;
    emit(&bytes, out.output.as_deref())?;
    Ok(())
}

pub fn cmd_test(a: &TestArgs) -> Result<Outcome, CliError> {
    check_eta(a.eta)?;
    let methods = expand_methods(&a.method, &a.lambda)?;
    let opts = ReadOptions {
        delimiter: None,
        header: if a.no_header { Header::Absent } else { Header::Detect },
        transpose: a.transpose,
    };
    let data = read_matrix_file(&a.input, opts)?;
    let input = a.input.display().to_string();
    let mut records = Vec::with_capacity(methods.len());
    for m in &methods {
        let r = m.run(&data, a.eta)?;
        records.push(TestRecord::new(&input, &r, a.eta));
    }
    let hash = config_hash(&(&input, &a.method, &a.lambda, a.eta, a.transpose, a.no_header));
    let mut provenance = Provenance::new("test", None, hash);
    provenance.timestamp =
        Some(chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true));
    let rejected = records.iter().any(|r| r.reject);
    write_document(&Document { provenance, records }, &a.out)?;
    Ok(if rejected && a.exit_on_reject {
        Outcome::Rejected
    } else {
        Outcome::Done
    })
}

pub fn cmd_null_params(a: &NullParamsArgs) -> Result<Outcome, CliError> {
    let setup = a.dims.resolve()?;
    let mut records = Vec::new();
    for &l in &a.lambda {
        let params = ShrinkageParams::new(l)
            .map_err(|_| RunError::Config(format!("lambda must lie in (0, 1], got {l}")))?;
        let null = NullAsymptotics::compute(params, &setup)?;
        records.push(NullParamsRecord::new(l, setup.n, setup.p, setup.gamma_tilde, &null));
    }
    let hash = config_hash(&(&a.lambda, setup.n, setup.p));
    let doc = Document {
        provenance: Provenance::new("null-params", None, hash),
        records,
    };
    write_document(&doc, &a.out)?;
    Ok(Outcome::Done)
}

/// Merges flags over the config file over defaults.
pub fn resolve_simulate(a: &SimulateArgs) -> Result<SimulateConfig, RunError> {
    let file = match &a.config {
        Some(p) => SimulateFile::load(p)?,
        None => SimulateFile::default(),
    };
    let d = SimulateConfig::default();
    fn pick<T: Clone>(flag: &[T], file: Option<Vec<T>>, default: Vec<T>) -> Vec<T> {
        if !flag.is_empty() {
            flag.to_vec()
        } else {
            file.unwrap_or(default)
        }
    }
    Ok(SimulateConfig {
        scenarios: pick(&a.scenario, file.scenarios, d.scenarios),
        n: pick(&a.n, file.n, d.n),
        gamma: pick(&a.gamma, file.gamma, d.gamma),
        methods: pick(&a.method, file.methods, d.methods),
        lambdas: pick(&a.lambda, file.lambdas, d.lambdas),
        reps: a.reps.or(file.reps).unwrap_or(d.reps),
        seed: a.seed.or(file.seed).unwrap_or(d.seed),
        eta: a.eta.or(file.eta).unwrap_or(d.eta),
        a1_twos_rule: a
            .a1_twos_rule
            .clone()
            .or(file.a1_twos_rule)
            .unwrap_or(d.a1_twos_rule),
    })
}

/// Builds and validates the grid described by `cfg`.
pub fn build_grid(cfg: &SimulateConfig) -> Result<SimulationGrid, RunError> {
    let rule = parse_a1_rule(&cfg.a1_twos_rule)?;
    let scenarios = cfg
        .scenarios
        .iter()
        .map(|s| parse_scenario(s, rule))
        .collect::<Result<Vec<_>, _>>()?;
    let grid = SimulationGrid {
        scenarios,
        sample_sizes: cfg.n.clone(),
        gammas: cfg.gamma.clone(),
        methods: expand_methods(&cfg.methods, &cfg.lambdas)?,
        reps: cfg.reps,
        master_seed: cfg.seed,
        eta: cfg.eta,
    };
    grid.validate()?;
    Ok(grid)
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<Outcome, CliError> {
    let cfg = resolve_simulate(a)?;
    let grid = build_grid(&cfg)?;
    let hash = config_hash(&cfg);
    if let Some(path) = &a.emit_data {
        let cells = grid.cells();
        let [cell] = cells.as_slice() else {
            return Err(RunError::Config(format!(
                "--emit-data needs exactly one scenario, n and gamma; the grid has {} cells",
                cells.len()
            ))
            .into());
        };
        let sampler = MvnSampler::new(&cell.scenario.materialize(cell.p)?)?;
        let mut rng = stream_rng(cfg.seed, cell.index, a.replication);
        let data = sampler.sample(cell.n, &mut rng)?;
        let provenance = Provenance::new("simulate --emit-data", Some(cfg.seed), hash);
        let mut comments = vec![
            format!("{} {}", provenance.tool, provenance.tool_version),
            format!("command: {}", provenance.command),
            format!("seed: {}", cfg.seed),
            format!("config_sha256: {}", provenance.config_sha256),
        ];
        comments.push(format!(
            "scenario: {}, n: {}, p: {}, replication: {}",
            cell.scenario.label(),
            cell.n,
            cell.p,
            a.replication
        ));
        let mut bytes = Vec::new();
        write_matrix(&mut bytes, &data, &comments)?;
        emit(&bytes, Some(path))?;
        return Ok(Outcome::Done);
    }
    let runner = Runner::new(a.workers)?;
    let results = runner.run_grid(&grid)?;
    let records = results
        .iter()
        .map(|c| CellRecord::new(c, cfg.seed))
        .collect();
    let doc = Document {
        provenance: Provenance::new("simulate", Some(cfg.seed), hash),
        records,
    };
    write_document(&doc, &a.out)?;
    Ok(Outcome::Done)
}

pub fn cmd_power_curve(a: &PowerCurveArgs) -> Result<Outcome, CliError> {
    check_eta(a.eta)?;
    if a.reps == 0 {
        return Err(RunError::Config("reps must be at least 1".into()).into());
    }
    let setup = a.dims.resolve()?;
    setup.require_calibrated()?;
    let betas = parse_beta_grid(&a.beta_grid)?;
    let close: Vec<bool> = betas.iter().map(|&b| is_close_spike(b, &setup)).collect();
    if !a.allow_close_spike {
        if let Some((b, _)) = betas.iter().zip(&close).find(|(b, c)| **c && **b > 0.0) {
            return Err(RunError::Config(format!(
                "beta {b} is not a distant spike (needs beta > sqrt({:.6})); \
                 pass --allow-close-spike to include it",
                setup.gamma_tilde
            ))
            .into());
        }
    }
    let mut methods = expand_methods(&[MethodName::Rlrt], &a.lambda)?;
    methods.push(Method::Clrt);
    let policy = if a.allow_close_spike {
        SpikePolicy::AllowClose
    } else {
        SpikePolicy::RequireDistant
    };

    let runner = Runner::new(a.workers)?;
    let points = runner.empirical_power_curve(&betas, setup.n, setup.p, &methods, a.reps, a.seed, a.eta)?;
    let mut records = Vec::with_capacity(points.len());
    for (k, pt) in points.iter().enumerate() {
        let lambda = pt.method.lambda().unwrap_or(1.0);
        let beta_idx = k / methods.len();
        let analytic = analytic_power(lambda, &setup, pt.beta, a.eta, policy).ok();
        records.push(PowerRecord {
            beta: pt.beta,
            method: pt.method.id().into(),
            lambda,
            analytic_power: analytic,
            empirical_power: pt.power,
            mc_se: pt.monte_carlo_se,
            close_spike: close[beta_idx] && pt.beta > 0.0,
        });
    }
    let hash = config_hash(&(
        &a.lambda,
        setup.n,
        setup.p,
        &betas,
        a.allow_close_spike,
        a.reps,
        a.seed,
        a.eta,
    ));
    let doc = Document {
        provenance: Provenance::new("power-curve", Some(a.seed), hash),
        records,
    };
    write_document(&doc, &a.out)?;
    Ok(Outcome::Done)
}

pub fn cmd_critical_value(a: &CriticalValueArgs) -> Result<Outcome, CliError> {
    check_eta(a.eta)?;
    let setup = a.dims.resolve()?;
    let method = expand_methods(&[a.method], &[a.lambda])?[0];
    // surfaces calibration errors before any replication runs
    PreparedTest::new(method, setup.n, setup.p)?;
    let runner = Runner::new(a.workers)?;
    let cv = runner.empirical_critical_value(method, &setup, a.eta, a.reps, a.seed)?;
    let record = CriticalValueRecord {
        method: cv.method.id().into(),
        lambda: match cv.method {
            Method::Rlrt(_) | Method::Clrt => cv.method.lambda(),
            _ => None,
        },
        n: setup.n,
        p: setup.p,
        eta: a.eta,
        reps: a.reps,
        seed: a.seed,
        z_critical: cv.z,
        raw_critical: cv.raw,
    };
    let hash = config_hash(&(a.method, a.lambda, setup.n, setup.p, a.eta, a.reps, a.seed));
    let doc = Document {
        provenance: Provenance::new("critical-value", Some(a.seed), hash),
        records: vec![record],
    };
    write_document(&doc, &a.out)?;
    Ok(Outcome::Done)
}
