pub mod config;
pub mod initial;
pub mod runner;
pub mod suites;

pub use config::{config_hash, RunConfig};
pub use initial::{generate_scalar, generate_velocity, InitialSpec};
pub use runner::{analyze_snapshot, execute_run, load_run, verify_run, VerifyReport};
pub use suites::{commutator_doubling, run_suite, CommutatorRow, SuiteConfig, SuiteName, SuiteResult};
