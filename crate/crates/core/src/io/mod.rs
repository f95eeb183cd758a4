//! CSV ingestion, study configuration files, report serialization and the
//! `mediate` command-line driver.
//!
//! Reports carry the invocation that produced them and write numbers in
//! shortest round-trip form, so the JSON and CSV renderings of one report
//! agree to the last bit.

mod cli;
mod config;
mod csv_input;
mod report;

pub use cli::{run, EXIT_OK, EXIT_VALIDATION, EXIT_WEAK_ID};
pub use config::{env_threads, load_study_config, parse_json_config, parse_toml_config, THREADS_ENV};
pub use csv_input::{load_csv, load_table_csv, read_csv, read_table_csv, ColumnSpec, LoadedData};
pub use report::{
    num, simulation_csv, simulation_json, write_replicate_dump, EstimateReport, HetReport, Invocation, RrReport,
    TABLE_COLUMNS, VERSION,
};
