//! End-to-end experiment: configuration, execution and result files.

pub mod config;
pub mod report;
pub mod run;

pub use config::{default_noise, ExperimentConfig, Mode};
pub use report::{
    compare_methods, fits_from_rows, format_table, read_series_csv, render_files, series_rows, write_artifacts, Manifest, MetricRow, MetricsTable,
    SeriesRow,
};
pub use run::{run_pipeline, Case, CaseResult, DelayOutcome, FitOutcome, RunArtifacts, StepResult};
