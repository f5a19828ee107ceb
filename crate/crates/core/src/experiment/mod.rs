//! Experiment orchestration: single runs, grid sweeps, classical baselines
//! and reports.

pub mod config;
pub mod pipeline;
pub mod report;
pub mod results;
pub mod sweep;

pub use config::{derive_seed, parse_override, ExperimentConfig, DATA_DIR_ENV};
pub use pipeline::{
    compute_features, compute_latents, load_splits, readout_features, run_classical_baselines,
    run_latent_baseline, run_raw_baseline, run_single, FeatureSet, RunOutcome,
};
pub use report::{emit_report, summarize, GroupKey, ReportFiles, ReportSummary};
pub use results::{append_result, read_results_csv, write_results_csv, ResultRow, RESULTS_HEADER};
pub use sweep::{run_sweep, CellFailure, SweepOutcome, SweepSpec};
