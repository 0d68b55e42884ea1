//! Tests of `H0: Σ = I`: regularized LRT, corrected LRT, Ledoit–Wolf and Chen.
//!
//! Every test produces a standardized score `z` that is asymptotically
//! `N(0, 1)` under the null and rejects in the upper tail.

use core::fmt;

use alloc::vec::Vec;

use crate::covariance::{sample_covariance, DataMatrix, SampleCovariance};
use crate::error::{Error, Result};
use crate::normal;
use crate::rmt::{DimensionSetup, NullAsymptotics, ShrinkageParams};

/// Default significance level.
pub const DEFAULT_ETA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Regularized LRT with shrinkage intensity `λ`. `λ = 1` coincides with [`Method::Clrt`].
    Rlrt(ShrinkageParams),
    /// Corrected LRT on the sample covariance itself.
    Clrt,
    /// Ledoit–Wolf identity test.
    LedoitWolf,
    /// Chen's U-statistic test.
    Chen,
}

impl Method {
    pub fn id(&self) -> &'static str {
        match self {
            Method::Rlrt(_) => "rlrt",
            Method::Clrt => "clrt",
            Method::LedoitWolf => "lw",
            Method::Chen => "chen",
        }
    }

    pub fn lambda(&self) -> Option<f64> {
        match self {
            Method::Rlrt(p) => Some(p.lambda()),
            Method::Clrt => Some(1.0),
            _ => None,
        }
    }

    /// Minimum sample size the statistic is defined for.
    pub fn min_observations(&self) -> usize {
        match self {
            Method::Chen => 4,
            _ => 2,
        }
    }

    /// Evaluates this test on `data` at level `eta`.
    pub fn run(&self, data: &DataMatrix, eta: f64) -> Result<TestResult> {
        check_eta(eta)?;
        PreparedTest::new(*self, data.n(), data.p())?.evaluate(data, eta)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Rlrt(p) => write!(f, "rlrt({})", p.lambda()),
            other => f.write_str(other.id()),
        }
    }
}

/// Outcome of one test on one data set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    pub method: Method,
    /// Statistic before standardization.
    pub raw: f64,
    pub z: f64,
    /// `1 − Φ(z)`.
    pub p_value: f64,
    /// `p_value < eta`.
    pub reject: bool,
    pub setup: DimensionSetup,
}

impl TestResult {
    pub fn from_score(method: Method, raw: f64, z: f64, eta: f64, setup: DimensionSetup) -> Self {
        let p_value = normal::sf(z);
        Self {
            method,
            raw,
            z,
            p_value,
            reject: p_value < eta,
            setup,
        }
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain("level eta must lie in (0, 1)"))
    }
}

/// `Σ g(l_i)` over the given sample eigenvalues.
pub fn rlrt_from_eigenvalues(eigenvalues: &[f64], params: ShrinkageParams) -> Result<f64> {
    if params.is_unregularized() && eigenvalues.iter().any(|&l| l <= 0.0) {
        return Err(Error::SingularCovariance);
    }
    Ok(eigenvalues.iter().map(|&l| params.g(l)).sum())
}

/// `tr(Σ̂) − log|Σ̂| − p` with `Σ̂ = λS + (1 − λ)I`, evaluated on the spectrum of `S`.
pub fn rlrt_statistic(s: &SampleCovariance, params: ShrinkageParams) -> Result<f64> {
    rlrt_from_eigenvalues(&s.eigenvalues()?, params)
}

/// A test bound to a fixed `(n, p)` with its null calibration precomputed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreparedTest {
    method: Method,
    setup: DimensionSetup,
    null: Option<NullAsymptotics>,
}

impl PreparedTest {
    /// Validates the regime (`p/(n−1) < 1` for the likelihood ratio tests,
    /// `n ≥ 4` for Chen) and computes the null mean, variance and centering.
    pub fn new(method: Method, n: usize, p: usize) -> Result<Self> {
        let setup = DimensionSetup::new(n, p)?;
        let required = method.min_observations();
        if n < required {
            return Err(Error::TooFewObservations { n, required });
        }
        let (method, null) = match method {
            Method::Rlrt(params) if params.is_unregularized() => {
                (Method::Clrt, Some(NullAsymptotics::compute(params, &setup)?))
            }
            Method::Rlrt(params) => (method, Some(NullAsymptotics::compute(params, &setup)?)),
            Method::Clrt => (
                method,
                Some(NullAsymptotics::compute(ShrinkageParams::unregularized(), &setup)?),
            ),
            Method::LedoitWolf | Method::Chen => (method, None),
        };
        Ok(Self { method, setup, null })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn setup(&self) -> &DimensionSetup {
        &self.setup
    }

    pub fn null_asymptotics(&self) -> Option<&NullAsymptotics> {
        self.null.as_ref()
    }

    pub fn evaluate(&self, data: &DataMatrix, eta: f64) -> Result<TestResult> {
        self.evaluate_sample(&mut Sample::new(data), eta)
    }

    /// Like [`PreparedTest::evaluate`], reusing whatever `sample` has already computed.
    pub fn evaluate_sample(&self, sample: &mut Sample<'_>, eta: f64) -> Result<TestResult> {
        check_eta(eta)?;
        let data = sample.data();
        if data.n() != self.setup.n || data.p() != self.setup.p {
            return Err(Error::DimensionMismatch {
                expected: self.setup.n * self.setup.p,
                found: data.n() * data.p(),
            });
        }
        let (n, p) = (self.setup.n, self.setup.p);
        let (raw, z) = match (self.method, self.null.as_ref()) {
            (Method::Rlrt(params), Some(null)) => {
                let raw = rlrt_from_eigenvalues(sample.eigenvalues()?, params)?;
                (raw, null.standardize(raw, p))
            }
            (Method::Clrt, Some(null)) => {
                let raw = rlrt_from_eigenvalues(sample.eigenvalues()?, ShrinkageParams::unregularized())?;
                (raw, null.standardize(raw, p))
            }
            (Method::LedoitWolf, _) => {
                let raw = lw_statistic(sample.covariance(), n);
                (raw, (n as f64 * raw - p as f64 - 1.0) / 2.0)
            }
            (Method::Chen, _) => {
                let raw = chen_sums(&data.centered())?.statistic(p);
                (raw, n as f64 * raw / 2.0)
            }
            _ => return Err(Error::Internal("likelihood ratio test without calibration")),
        };
        Ok(TestResult::from_score(self.method, raw, z, eta, self.setup))
    }
}

/// A data set with its sample covariance and spectrum computed on first use,
/// so several tests on the same data share the work.
#[derive(Debug)]
pub struct Sample<'a> {
    data: &'a DataMatrix,
    covariance: Option<SampleCovariance>,
    eigenvalues: Option<Vec<f64>>,
}

impl<'a> Sample<'a> {
    pub fn new(data: &'a DataMatrix) -> Self {
        Self {
            data,
            covariance: None,
            eigenvalues: None,
        }
    }

    pub fn data(&self) -> &'a DataMatrix {
        self.data
    }

    pub fn covariance(&mut self) -> &SampleCovariance {
        let data = self.data;
        self.covariance.get_or_insert_with(|| sample_covariance(data))
    }

    pub fn eigenvalues(&mut self) -> Result<&[f64]> {
        if self.eigenvalues.is_none() {
            let values = self.covariance().eigenvalues()?;
            self.eigenvalues = Some(values);
        }
        Ok(self.eigenvalues.as_deref().unwrap_or_default())
    }
}

/// Regularized LRT at level `eta`. Requires `p/(n−1) < 1`.
///
/// `z = (rLRT − p ∫ g dF^{γ̃′} − μ(g)) / √v(g)`.
pub fn rlrt_test(data: &DataMatrix, params: ShrinkageParams, eta: f64) -> Result<TestResult> {
    check_eta(eta)?;
    PreparedTest::new(Method::Rlrt(params), data.n(), data.p())?.evaluate(data, eta)
}

/// Corrected LRT `tr(S) − log|S| − p`.
pub fn clrt_test(data: &DataMatrix, eta: f64) -> Result<TestResult> {
    check_eta(eta)?;
    PreparedTest::new(Method::Clrt, data.n(), data.p())?.evaluate(data, eta)
}

/// `(1/p) tr{(S − I)²} − (p/n) {(1/p) tr S}² + p/n`.
pub fn lw_statistic(s: &SampleCovariance, n: usize) -> f64 {
    let p = s.dim();
    let pf = p as f64;
    let nf = n as f64;
    let mut frob = 0.0;
    for i in 0..p {
        for (j, &v) in s.matrix.row(i).iter().enumerate() {
            let d = if i == j { v - 1.0 } else { v };
            frob += d * d;
        }
    }
    let mean_trace = s.matrix.trace() / pf;
    frob / pf - pf / nf * mean_trace * mean_trace + pf / nf
}

/// Ledoit–Wolf test; `n·T − p` is asymptotically `N(1, 4)`.
pub fn lw_test(data: &DataMatrix, eta: f64) -> Result<TestResult> {
    check_eta(eta)?;
    PreparedTest::new(Method::LedoitWolf, data.n(), data.p())?.evaluate(data, eta)
}

/// Chen's unbiased estimators: `v1` targets `tr Σ`, `v2` targets `tr Σ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChenSums {
    pub v1: f64,
    pub v2: f64,
}

impl ChenSums {
    /// `T_C = v2/p − 2 v1/p + 1`.
    pub fn statistic(&self, p: usize) -> f64 {
        let pf = p as f64;
        self.v2 / pf - 2.0 * self.v1 / pf + 1.0
    }
}

fn falling(n: f64, r: u32) -> f64 {
    (0..r).map(|k| n - k as f64).product()
}

/// Distinct-index sums reduced to Gram-matrix quantities, `O(n²p)`.
///
/// With `G = X Xᵀ`, off-diagonal part `O` and row sums `r_j` of `O`:
/// `Σ_{i≠j} G_ij² = ‖O‖²`, the three-index sum is `Σ r_j² − ‖O‖²` and the
/// four-index sum is `(Σ r_j)² − 2‖O‖² − 4·(three-index sum)`.
pub fn chen_sums(x: &DataMatrix) -> Result<ChenSums> {
    let n = x.n();
    if n < 4 {
        return Err(Error::TooFewObservations { n, required: 4 });
    }
    let mut diag_sum = 0.0;
    let mut off_sq = 0.0;
    let mut row_off = alloc::vec![0.0; n];
    for i in 0..n {
        let xi = x.row(i);
        diag_sum += xi.iter().map(|v| v * v).sum::<f64>();
        for j in (i + 1)..n {
            let g: f64 = xi.iter().zip(x.row(j)).map(|(a, b)| a * b).sum();
            off_sq += 2.0 * g * g;
            row_off[i] += g;
            row_off[j] += g;
        }
    }
    let off_sum: f64 = row_off.iter().sum();
    let pairs_sq = off_sq;
    let triples = row_off.iter().map(|r| r * r).sum::<f64>() - pairs_sq;
    let quads = off_sum * off_sum - 2.0 * pairs_sq - 4.0 * triples;

    let nf = n as f64;
    let (p2, p3, p4) = (falling(nf, 2), falling(nf, 3), falling(nf, 4));
    Ok(ChenSums {
        v1: diag_sum / nf - off_sum / p2,
        v2: pairs_sq / p2 - 2.0 * triples / p3 + quads / p4,
    })
}

/// Literal `O(n⁴p)` evaluation of the distinct-index sums. Reference only.
pub fn chen_sums_brute_force(x: &DataMatrix) -> Result<ChenSums> {
    let n = x.n();
    if n < 4 {
        return Err(Error::TooFewObservations { n, required: 4 });
    }
    let dot = |i: usize, j: usize| -> f64 { x.row(i).iter().zip(x.row(j)).map(|(a, b)| a * b).sum() };
    let mut diag = 0.0;
    let mut pairs = 0.0;
    let mut pairs_sq = 0.0;
    let mut triples = 0.0;
    let mut quads = 0.0;
    for i in 0..n {
        diag += dot(i, i);
        for j in 0..n {
            if j == i {
                continue;
            }
            let gij = dot(i, j);
            pairs += gij;
            pairs_sq += gij * gij;
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                triples += gij * dot(j, k);
                for l in 0..n {
                    if l == i || l == j || l == k {
                        continue;
                    }
                    quads += gij * dot(k, l);
                }
            }
        }
    }
    let nf = n as f64;
    Ok(ChenSums {
        v1: diag / nf - pairs / falling(nf, 2),
        v2: pairs_sq / falling(nf, 2) - 2.0 * triples / falling(nf, 3) + quads / falling(nf, 4),
    })
}

/// Chen's test on the column-centered data; `n·T_C/2` is the score.
pub fn chen_test(data: &DataMatrix, eta: f64) -> Result<TestResult> {
    check_eta(eta)?;
    PreparedTest::new(Method::Chen, data.n(), data.p())?.evaluate(data, eta)
}
