//! Configuration, run driver, convergence studies and scheme comparison for
//! the `kdvgeo` solver. The `kdvgeo` binary is a thin layer over this crate.

pub mod compare;
pub mod config;
pub mod error;
pub mod output;
pub mod run;
pub mod study;

pub use compare::{compare, ComparisonReport};
pub use config::RunConfig;
pub use error::HarnessError;
pub use run::{run, simulate, simulate_with, RunReport, RunSummary, Snapshot};
pub use study::{convergence_study, run_convergence_study, ConvergenceRow, ConvergenceTable};
