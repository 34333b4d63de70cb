//! Benchmark orchestration for the `linkpred` toolkit: configuration,
//! single runs, paired method matrices and report files.

pub mod config;
pub mod matrix;
pub mod pipeline;

pub use config::{Method, RunConfig};
pub use matrix::{run_matrix, write_matrix, MatrixOutcome};
pub use pipeline::{execute, load_dataset, run_benchmark, write_outputs, RunOutcome};
