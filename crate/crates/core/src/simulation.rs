//! One seeded replication: draw data under a scenario and run tests on it.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::hypothesis::{PreparedTest, Sample, TestResult};
use crate::sampling::{stream_rng, MvnSampler};

/// Everything a replication needs that does not change across replications.
///
/// All tests in a plan see the same draw, so comparisons between them are paired.
#[derive(Debug, Clone)]
pub struct CellPlan {
    pub tests: Vec<PreparedTest>,
    pub sampler: MvnSampler,
    pub eta: f64,
}

impl CellPlan {
    /// Checks that every test shares one `(n, p)` matching the sampler.
    pub fn new(tests: Vec<PreparedTest>, sampler: MvnSampler, eta: f64) -> Result<Self> {
        let Some(first) = tests.first() else {
            return Err(Error::Domain("a cell needs at least one test"));
        };
        let setup = *first.setup();
        for t in &tests {
            if t.setup().n != setup.n || t.setup().p != setup.p {
                return Err(Error::Domain("tests in one cell must share n and p"));
            }
        }
        if sampler.dim() != setup.p {
            return Err(Error::DimensionMismatch {
                expected: setup.p,
                found: sampler.dim(),
            });
        }
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::Domain("level eta must lie in (0, 1)"));
        }
        Ok(Self { tests, sampler, eta })
    }

    /// Replication `replication` of cell `cell` under `master_seed`, one
    /// result per test in plan order.
    pub fn replicate(
        &self,
        master_seed: u64,
        cell: u32,
        replication: u32,
    ) -> Result<Vec<Result<TestResult>>> {
        let mut rng = stream_rng(master_seed, cell, replication);
        let data = self.sampler.sample(self.n(), &mut rng)?;
        let mut sample = Sample::new(&data);
        Ok(self
            .tests
            .iter()
            .map(|t| t.evaluate_sample(&mut sample, self.eta))
            .collect())
    }

    /// Sample size shared by every test in the plan.
    pub fn n(&self) -> usize {
        self.tests.first().map_or(0, |t| t.setup().n)
    }
}
