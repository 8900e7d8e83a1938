//! Ensemble execution, persistence and command-line plumbing for the
//! annealing simulator.

pub mod cli;
pub mod config;
pub mod error;
pub mod export;
pub mod records;
pub mod runner;
pub mod seeds;

pub use config::{ExperimentConfig, MixedSeedMode, SpectrumSettings, StepPolicy};
pub use error::{HarnessError, Result};
pub use runner::{run_ensemble, run_ensemble_with, RunSummary};
