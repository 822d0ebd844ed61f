//! Experiment drivers behind the command-line tool: configuration, the
//! convergence study, the EM/GM benchmark, the occupation study, the
//! assumption check, and CSV output.

mod benchmark;
mod config;
mod convergence;
mod output;
mod studies;

pub use benchmark::{run_benchmark, run_benchmark_with, BenchmarkRow, BenchmarkSetup, BENCH_PATHS, BENCH_STEPS};
pub use config::{parse_levels, parse_schemes, ExperimentConfig};
pub use convergence::{
    convergence_slope, level_steps, raw_errors, run_convergence, ConvergenceReport, LevelRow, DEGENERATE_RAW_ERROR,
};
pub use output::{write_benchmark, write_check, write_convergence, write_occupation};
pub use studies::{run_check, run_occupation, OccupationReport, CHECK_SAMPLES};
