//! Configuration, orchestration, benchmarks and validation checks.

pub mod benchmark;
pub mod config;
pub mod runner;
pub mod validate;

pub use benchmark::{run_benchmark, suite_configs, BenchmarkRow, Scale, Suite};
pub use config::{Method, RunConfig, ScheduleConfig, TargetSpec};
pub use runner::{run_estimate, RunOutput, RunSummary, WORKERS_ENV};
pub use validate::{run_validate, Check, CheckLine, ValidationReport};

/// Process exit codes of the CLI.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VALIDATION_FAILED: i32 = 1;
    pub const CONFIG_ERROR: i32 = 2;
    pub const DIVERGENCE: i32 = 3;
}

/// Maps a library error to a CLI exit code.
pub fn exit_code(e: &crate::Error) -> i32 {
    match e {
        crate::Error::Config(_) | crate::Error::InvalidParameter(_) | crate::Error::Unsupported(_) | crate::Error::Io(_) => {
            exit::CONFIG_ERROR
        }
        _ => exit::DIVERGENCE,
    }
}
