//! Population covariance scenarios for size and power experiments.

use alloc::format;
use alloc::string::String;

use crate::error::{Error, Result};
use crate::linalg::{sym_eigenvalues, SymMatrix};

/// How many diagonal entries equal 2 in the heteroscedastic alternative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum A1TwosRule {
    /// `max{1, ⌊0.2p⌋}`.
    #[default]
    Max,
    /// `min{1, ⌊0.2p⌋}` as literally printed; a single 2 for every `p ≥ 5`.
    Min,
    /// A fixed count.
    Fixed(usize),
}

impl A1TwosRule {
    pub fn count(&self, p: usize) -> Result<usize> {
        let fifth = p / 5;
        let k = match *self {
            A1TwosRule::Max => fifth.max(1),
            A1TwosRule::Min => fifth.min(1),
            A1TwosRule::Fixed(k) => k,
        };
        if k > p {
            return Err(Error::Domain("more twos than dimensions in heteroscedastic scenario"));
        }
        Ok(k)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    /// `Σ = I`.
    Null,
    /// `diag(2, …, 2, 1, …, 1)`.
    A1(A1TwosRule),
    /// `diag(1 + 0.2p, 1, …, 1)`.
    A2,
    /// Compound symmetry `I + 0.2J`.
    A3,
    /// Compound symmetry `I + 0.1J`.
    A4,
    /// `I + (β/p)J`, a single spike `1 + β`.
    CsBeta(f64),
    Custom(SymMatrix),
}

impl Scenario {
    pub fn label(&self) -> String {
        match self {
            Scenario::Null => "null".into(),
            Scenario::A1(A1TwosRule::Max) => "a1".into(),
            Scenario::A1(A1TwosRule::Min) => "a1[min]".into(),
            Scenario::A1(A1TwosRule::Fixed(k)) => format!("a1[fixed:{k}]"),
            Scenario::A2 => "a2".into(),
            Scenario::A3 => "a3".into(),
            Scenario::A4 => "a4".into(),
            Scenario::CsBeta(b) => format!("cs_beta({b})"),
            Scenario::Custom(m) => format!("custom({})", m.dim()),
        }
    }

    /// Population covariance at dimension `p`.
    pub fn materialize(&self, p: usize) -> Result<SymMatrix> {
        if p == 0 {
            return Err(Error::Domain("dimension p must be at least 1"));
        }
        let pf = p as f64;
        match self {
            Scenario::Null => Ok(SymMatrix::identity(p)),
            Scenario::A1(rule) => {
                let twos = rule.count(p)?;
                let diag: alloc::vec::Vec<f64> =
                    (0..p).map(|i| if i < twos { 2.0 } else { 1.0 }).collect();
                Ok(SymMatrix::from_diagonal(&diag))
            }
            Scenario::A2 => {
                let mut m = SymMatrix::identity(p);
                m.set(0, 0, 1.0 + 0.2 * pf);
                Ok(m)
            }
            Scenario::A3 => compound_symmetry(p, 0.2),
            Scenario::A4 => compound_symmetry(p, 0.1),
            Scenario::CsBeta(beta) => compound_symmetry(p, beta / pf),
            Scenario::Custom(m) => {
                if m.dim() != p {
                    return Err(Error::DimensionMismatch {
                        expected: p,
                        found: m.dim(),
                    });
                }
                let ev = sym_eigenvalues(m)?;
                let floor = -1e-10 * m.max_abs().max(1.0);
                if ev.last().is_some_and(|&l| l < floor) {
                    return Err(Error::NotPositiveSemidefinite);
                }
                Ok(m.clone())
            }
        }
    }
}

/// `I + ρJ`, eigenvalues `1 + ρp` (once) and 1; positive semidefinite iff `1 + ρp ≥ 0`.
fn compound_symmetry(p: usize, rho: f64) -> Result<SymMatrix> {
    if !rho.is_finite() || 1.0 + rho * (p as f64) < 0.0 {
        return Err(Error::NotPositiveSemidefinite);
    }
    Ok(SymMatrix::from_fn(p, |i, j| if i == j { 1.0 + rho } else { rho }))
}

/// Population covariance for `scenario` at dimension `p`.
pub fn materialize_sigma(scenario: &Scenario, p: usize) -> Result<SymMatrix> {
    scenario.materialize(p)
}
