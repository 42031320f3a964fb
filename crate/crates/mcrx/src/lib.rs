//! Everything around the `mcrx-core` engine that needs an operating system:
//! rating-file ingestion, the on-disk index format, the MAE evaluation
//! harness, and deterministic synthetic corpora for benchmarks and tests.
//! The `mcrx` binary wires these into a CLI.

pub mod cli;
pub mod eval;
pub mod ingest;
pub mod store;
pub mod synth;

pub use eval::{
    build_mode_index, emit_report, emit_report_to_path, run_experiment, BaselineRow,
    EvalError, EvalReport, EvalRow, ExperimentConfig, ReportFormat, Rounding, Similarity,
};
pub use ingest::{load_ratings, IngestError, RatingsFormat};
pub use store::{load_index, save_index, StoreError};
