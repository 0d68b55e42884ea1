//! Regularized likelihood ratio testing of `H0: Σ = I` in high dimensions.
//!
//! This crate holds everything that is pure computation and runs without the
//! standard library (an allocator is required):
//!
//! - [`rmt`]: Marčenko–Pastur law, the `M`/`N` roots, null mean and variance of
//!   the regularized statistic, centering integrals, the spiked centering
//!   constant and the analytic power under compound symmetry.
//! - [`covariance`]: data matrices, centered sample covariance, linear shrinkage.
//! - [`linalg`]: dense symmetric matrices and a tridiagonal QL eigensolver.
//! - [`hypothesis`]: the regularized LRT, corrected LRT, Ledoit–Wolf and Chen tests.
//! - [`scenario`] and [`sampling`]: covariance scenarios, multivariate normal
//!   draws and keyed random streams used by Monte Carlo experiments.
//! - [`simulation`]: a single seeded replication, shared by every runner.
//!
//! The std companion crate `rlrt` adds parallel experiment scheduling, file
//! formats and the command-line tool.
#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod covariance;
pub mod error;
pub mod hypothesis;
pub mod linalg;
pub mod normal;
pub mod quadrature;
pub mod rmt;
pub mod sampling;
pub mod scenario;
pub mod simulation;

pub use covariance::{sample_covariance, shrink, DataMatrix, SampleCovariance, ShrunkenCovariance};
pub use error::{Error, Result};
pub use hypothesis::{Method, PreparedTest, Sample, TestResult};
pub use linalg::{sym_eigenvalues, SymMatrix};
pub use rmt::{DimensionSetup, MnRoots, MpLaw, NullAsymptotics, ShrinkageParams, SpikedModel};
pub use scenario::{A1TwosRule, Scenario};
