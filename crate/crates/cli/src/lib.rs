//! Library surface of the experiment harness, so integration tests drive
//! the exact code paths the binary uses.

pub mod config;
pub mod experiments;
pub mod output;

pub use config::{DtChoice, ExperimentConfig, Mode, ReservoirKind, TaskKind};
pub use experiments::{load_task, run_experiment, run_seeds, SearchTarget};
