//! Simulated data under the four confounding structures and the Monte Carlo
//! driver that tabulates bias, variance and interval coverage.

mod dgp;
mod study;
mod summary;

pub use dgp::{generate_dataset, Dag, DgpConfig};
pub use study::{
    run_study, ReplicateRecord, SimulationReport, StudyConfig, DEFAULT_SEED,
    MAX_REPLICATE_FAILURE_RATE, TRUE_NIE,
};
pub use summary::{operating_characteristics, ReportRow};
