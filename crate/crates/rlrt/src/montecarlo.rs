//! Parallel Monte Carlo experiments: size/power grids, power curves,
//! statistic histograms and empirical critical values.
//!
//! Replication `r` of data cell `c` always draws from the stream keyed by
//! `(master_seed, c, r)`, and all reductions run in replication order, so
//! results do not depend on the number of workers.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use rlrt_core::hypothesis::PreparedTest;
use rlrt_core::rmt::{analytic_power_cs, SpikePolicy, SpikedModel};
use rlrt_core::sampling::MvnSampler;
use rlrt_core::simulation::CellPlan;
use rlrt_core::{DimensionSetup, Method, Scenario, ShrinkageParams, TestResult};

use crate::error::RunError;

/// `p = round(γ n)`.
pub fn dimension_for(n: usize, gamma: f64) -> usize {
    (gamma * n as f64).round() as usize
}

/// Rejection rate and its binomial standard error `√(r(1 − r)/reps)`.
pub fn rate_and_se(rejections: u64, reps: u32) -> (f64, f64) {
    let r = rejections as f64 / reps as f64;
    (r, (r * (1.0 - r) / reps as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationGrid {
    pub scenarios: Vec<Scenario>,
    pub sample_sizes: Vec<usize>,
    pub gammas: Vec<f64>,
    pub methods: Vec<Method>,
    pub reps: u32,
    pub master_seed: u64,
    pub eta: f64,
}

/// One `(scenario, n, γ)` combination. Every method of the grid runs on the
/// same draws within a data cell.
#[derive(Debug, Clone, PartialEq)]
pub struct DataCell {
    pub index: u32,
    pub scenario: Scenario,
    pub n: usize,
    pub gamma: f64,
    pub p: usize,
}

impl SimulationGrid {
    pub fn validate(&self) -> Result<(), RunError> {
        if self.reps == 0 {
            return Err(RunError::Config("reps must be at least 1".into()));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(RunError::Config(format!("eta must lie in (0, 1), got {}", self.eta)));
        }
        if self.scenarios.is_empty() || self.sample_sizes.is_empty() || self.gammas.is_empty() {
            return Err(RunError::Config("grid needs at least one scenario, n and gamma".into()));
        }
        if self.methods.is_empty() {
            return Err(RunError::Config("grid needs at least one method".into()));
        }
        for &g in &self.gammas {
            if !(g.is_finite() && g > 0.0) {
                return Err(RunError::Config(format!("gamma must be positive, got {g}")));
            }
        }
        for &n in &self.sample_sizes {
            if n < 2 {
                return Err(RunError::Config(format!("n must be at least 2, got {n}")));
            }
            for &g in &self.gammas {
                if dimension_for(n, g) == 0 {
                    return Err(RunError::Config(format!("p = round({g} * {n}) is zero")));
                }
            }
        }
        let cells = self.scenarios.len() * self.sample_sizes.len() * self.gammas.len();
        if cells > u32::MAX as usize {
            return Err(RunError::Config("too many cells".into()));
        }
        Ok(())
    }

    /// Data cells in scenario-major, then `n`, then `γ` order.
    pub fn cells(&self) -> Vec<DataCell> {
        let mut out = Vec::new();
        for s in &self.scenarios {
            for &n in &self.sample_sizes {
                for &gamma in &self.gammas {
                    out.push(DataCell {
                        index: out.len() as u32,
                        scenario: s.clone(),
                        n,
                        gamma,
                        p: dimension_for(n, gamma),
                    });
                }
            }
        }
        out
    }
}

/// Size or power of one method in one data cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub scenario: Scenario,
    pub n: usize,
    pub p: usize,
    pub gamma: f64,
    pub method: Method,
    pub reps: u32,
    pub rejections: u64,
    /// `NaN` when `error` is set.
    pub rejection_rate: f64,
    pub monte_carlo_se: f64,
    /// Wall time of the whole data cell.
    pub elapsed: Duration,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default)]
struct Tally {
    rejections: u64,
    // lowest failing replication and its message
    first_error: Option<(u32, String)>,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.rejections += other.rejections;
        self.first_error = match (self.first_error, other.first_error) {
            (Some(a), Some(b)) => Some(if a.0 <= b.0 { a } else { b }),
            (a, b) => a.or(b),
        };
        self
    }

    fn fail(&mut self, rep: u32, msg: String) {
        if self.first_error.as_ref().is_none_or(|(r, _)| rep < *r) {
            self.first_error = Some((rep, msg));
        }
    }
}

/// Owns the worker pool used by every experiment.
#[derive(Debug)]
pub struct Runner {
    pool: rayon::ThreadPool,
}

impl Runner {
    /// `workers = None` uses one worker per available core.
    pub fn new(workers: Option<usize>) -> Result<Self, RunError> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(w) = workers {
            if w == 0 {
                return Err(RunError::Config("workers must be at least 1".into()));
            }
            b = b.num_threads(w);
        }
        let pool = b.build().map_err(|e| RunError::Pool(e.to_string()))?;
        Ok(Self { pool })
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }

    fn tally(&self, plan: &CellPlan, seed: u64, cell: u32, reps: u32) -> Vec<Tally> {
        let k = plan.tests.len();
        self.pool.install(|| {
            (0..reps)
                .into_par_iter()
                .map(|rep| {
                    let mut t = vec![Tally::default(); k];
                    match plan.replicate(seed, cell, rep) {
                        Ok(results) => {
                            for (slot, r) in t.iter_mut().zip(results) {
                                match r {
                                    Ok(r) => slot.rejections += r.reject as u64,
                                    Err(e) => slot.fail(rep, e.to_string()),
                                }
                            }
                        }
                        Err(e) => t.iter_mut().for_each(|s| s.fail(rep, e.to_string())),
                    }
                    t
                })
                .reduce(
                    || vec![Tally::default(); k],
                    |a, b| a.into_iter().zip(b).map(|(x, y)| x.merge(y)).collect(),
                )
        })
    }

    /// Every test result of every replication, in replication order.
    ///
    /// Fails with the error of the lowest failing replication.
    pub fn replications(
        &self,
        plan: &CellPlan,
        seed: u64,
        cell: u32,
        reps: u32,
    ) -> Result<Vec<Vec<TestResult>>, RunError> {
        self.pool.install(|| {
            (0..reps)
                .into_par_iter()
                .map(|rep| {
                    plan.replicate(seed, cell, rep)?
                        .into_iter()
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Vec<_>>()
        })
        .into_iter()
        .collect::<Result<Vec<_>, _>>()
        .map_err(RunError::from)
    }

    /// One [`CellResult`] per (data cell, method), data cells in grid order
    /// and methods in grid order within each cell.
    pub fn run_grid(&self, grid: &SimulationGrid) -> Result<Vec<CellResult>, RunError> {
        grid.validate()?;
        let mut out = Vec::new();
        for cell in grid.cells() {
            let start = Instant::now();
            let mut rows: Vec<CellResult> = grid
                .methods
                .iter()
                .map(|&m| CellResult {
                    scenario: cell.scenario.clone(),
                    n: cell.n,
                    p: cell.p,
                    gamma: cell.gamma,
                    method: m,
                    reps: grid.reps,
                    rejections: 0,
                    rejection_rate: f64::NAN,
                    monte_carlo_se: f64::NAN,
                    elapsed: Duration::ZERO,
                    error: None,
                })
                .collect();

            let sampler = cell
                .scenario
                .materialize(cell.p)
                .and_then(|sigma| MvnSampler::new(&sigma));
            let sampler = match sampler {
                Ok(s) => s,
                Err(e) => {
                    rows.iter_mut().for_each(|r| r.error = Some(e.to_string()));
                    out.extend(rows);
                    continue;
                }
            };

            // methods whose calibration fails are reported and skipped
            let mut tests = Vec::new();
            let mut slots = Vec::new();
            for (i, row) in rows.iter_mut().enumerate() {
                match PreparedTest::new(row.method, cell.n, cell.p) {
                    Ok(t) => {
                        tests.push(t);
                        slots.push(i);
                    }
                    Err(e) => row.error = Some(e.to_string()),
                }
            }
            if !tests.is_empty() {
                let plan = CellPlan::new(tests, sampler, grid.eta)?;
                let tallies = self.tally(&plan, grid.master_seed, cell.index, grid.reps);
                for (slot, t) in slots.into_iter().zip(tallies) {
                    let row = &mut rows[slot];
                    match t.first_error {
                        Some((rep, msg)) => {
                            row.error = Some(format!("replication {rep}: {msg}"));
                        }
                        None => {
                            let (r, se) = rate_and_se(t.rejections, grid.reps);
                            row.rejections = t.rejections;
                            row.rejection_rate = r;
                            row.monte_carlo_se = se;
                        }
                    }
                }
            }
            let elapsed = start.elapsed();
            rows.iter_mut().for_each(|r| r.elapsed = elapsed);
            out.extend(rows);
        }
        Ok(out)
    }

    /// Empirical power of each method under `Σ = I + (β/p)J` along `betas`.
    /// The `k`-th β uses data cell `k`; `β = 0` is the null.
    pub fn empirical_power_curve(
        &self,
        betas: &[f64],
        n: usize,
        p: usize,
        methods: &[Method],
        reps: u32,
        seed: u64,
        eta: f64,
    ) -> Result<Vec<PowerPoint>, RunError> {
        if reps == 0 {
            return Err(RunError::Config("reps must be at least 1".into()));
        }
        let tests = methods
            .iter()
            .map(|&m| PreparedTest::new(m, n, p))
            .collect::<Result<Vec<_>, _>>()?;
        let mut out = Vec::with_capacity(betas.len() * methods.len());
        for (k, &beta) in betas.iter().enumerate() {
            let scenario = if beta == 0.0 {
                Scenario::Null
            } else {
                Scenario::CsBeta(beta)
            };
            let sampler = MvnSampler::new(&scenario.materialize(p)?)?;
            let plan = CellPlan::new(tests.clone(), sampler, eta)?;
            let tallies = self.tally(&plan, seed, k as u32, reps);
            for (test, t) in plan.tests.iter().zip(tallies) {
                if let Some((rep, msg)) = t.first_error {
                    return Err(RunError::Replication { rep, msg });
                }
                let (rate, se) = rate_and_se(t.rejections, reps);
                out.push(PowerPoint {
                    beta,
                    method: test.method(),
                    power: rate,
                    monte_carlo_se: se,
                });
            }
        }
        Ok(out)
    }

    /// Normalized histogram of the raw statistic over `reps` draws.
    #[allow(clippy::too_many_arguments)]
    pub fn empirical_density(
        &self,
        method: Method,
        scenario: &Scenario,
        n: usize,
        p: usize,
        reps: u32,
        seed: u64,
        bins: usize,
    ) -> Result<Histogram, RunError> {
        let raws = self.statistics(method, scenario, n, p, reps, seed)?;
        Histogram::from_samples(raws.iter().map(|r| r.raw), bins)
    }

    /// Results of `method` over `reps` draws under `scenario`, data cell 0.
    pub fn statistics(
        &self,
        method: Method,
        scenario: &Scenario,
        n: usize,
        p: usize,
        reps: u32,
        seed: u64,
    ) -> Result<Vec<TestResult>, RunError> {
        if reps == 0 {
            return Err(RunError::Config("reps must be at least 1".into()));
        }
        let test = PreparedTest::new(method, n, p)?;
        let sampler = MvnSampler::new(&scenario.materialize(p)?)?;
        let plan = CellPlan::new(vec![test], sampler, rlrt_core::hypothesis::DEFAULT_ETA)?;
        Ok(self
            .replications(&plan, seed, 0, reps)?
            .into_iter()
            .map(|mut r| r.swap_remove(0))
            .collect())
    }

    /// Empirical `(1 − η)` quantile of the standardized statistic under `Σ = I`.
    pub fn empirical_critical_value(
        &self,
        method: Method,
        setup: &DimensionSetup,
        eta: f64,
        reps: u32,
        seed: u64,
    ) -> Result<CriticalValue, RunError> {
        if reps < 1000 {
            return Err(RunError::Config(format!(
                "critical values need at least 1000 replications, got {reps}"
            )));
        }
        if !(eta > 0.0 && eta < 1.0) {
            return Err(RunError::Config(format!("eta must lie in (0, 1), got {eta}")));
        }
        let results = self.statistics(method, &Scenario::Null, setup.n, setup.p, reps, seed)?;
        let mut z: Vec<f64> = results.iter().map(|r| r.z).collect();
        let mut raw: Vec<f64> = results.iter().map(|r| r.raw).collect();
        Ok(CriticalValue {
            method: results[0].method,
            eta,
            reps,
            z: upper_quantile(&mut z, eta),
            raw: upper_quantile(&mut raw, eta),
        })
    }
}

/// Smallest order statistic with at least `1 − η` of the sample at or below it.
pub fn upper_quantile(values: &mut [f64], eta: f64) -> f64 {
    values.sort_by(f64::total_cmp);
    let m = values.len();
    let k = ((1.0 - eta) * m as f64).ceil() as usize;
    values[k.clamp(1, m) - 1]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalValue {
    pub method: Method,
    pub eta: f64,
    pub reps: u32,
    /// Cutoff for the standardized score; reject when `z` exceeds it.
    pub z: f64,
    /// Same cutoff on the raw statistic.
    pub raw: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerPoint {
    pub beta: f64,
    pub method: Method,
    pub power: f64,
    pub monte_carlo_se: f64,
}

/// Analytic power of the regularized test (`λ = 1` gives the corrected LRT)
/// under `I + (β/p)J`. Close spikes are evaluated only under `AllowClose`.
pub fn analytic_power(
    lambda: f64,
    setup: &DimensionSetup,
    beta: f64,
    eta: f64,
    policy: SpikePolicy,
) -> Result<f64, RunError> {
    let params = ShrinkageParams::new(lambda)?;
    if beta == 0.0 {
        return Ok(eta);
    }
    Ok(analytic_power_cs(params, setup, beta, eta, policy)?)
}

/// Whether `1 + β` lies outside the distant-spike range at `γ̃′`.
pub fn is_close_spike(beta: f64, setup: &DimensionSetup) -> bool {
    !SpikedModel::is_distant(1.0 + beta, setup.gamma_tilde)
}

/// Equal-width histogram normalized to unit area.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// `bins + 1` increasing edges.
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
}

impl Histogram {
    pub fn from_samples<I: IntoIterator<Item = f64>>(samples: I, bins: usize) -> Result<Self, RunError> {
        if bins == 0 {
            return Err(RunError::Config("bins must be at least 1".into()));
        }
        let xs: Vec<f64> = samples.into_iter().collect();
        if xs.is_empty() {
            return Err(RunError::Config("histogram of an empty sample".into()));
        }
        if xs.iter().any(|x| !x.is_finite()) {
            return Err(RunError::Config("histogram of non-finite values".into()));
        }
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let mut hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi <= lo {
            hi = lo + 1.0;
        }
        let width = (hi - lo) / bins as f64;
        let mut counts = vec![0u64; bins];
        for &x in &xs {
            let k = (((x - lo) / width) as usize).min(bins - 1);
            counts[k] += 1;
        }
        let total = xs.len() as f64;
        let edges = (0..=bins).map(|k| lo + k as f64 * width).collect();
        let density = counts.iter().map(|&c| c as f64 / (total * width)).collect();
        Ok(Self { edges, density })
    }

    pub fn bins(&self) -> usize {
        self.density.len()
    }

    /// `Σ density · width`; 1 up to rounding.
    pub fn mass(&self) -> f64 {
        self.density
            .iter()
            .zip(self.edges.windows(2))
            .map(|(d, e)| d * (e[1] - e[0]))
            .sum()
    }
}
