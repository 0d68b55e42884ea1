//! Monte Carlo experiments, file formats and the command-line tool for the
//! regularized likelihood ratio test. The numerics live in [`rlrt_core`].

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod montecarlo;
pub mod records;

pub use error::{IoError, RunError};
pub use montecarlo::{CellResult, Runner, SimulationGrid};
