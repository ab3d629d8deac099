//! Degradation sweeps: for each motion length, fit an embedder on clean
//! training windows, embed the clean test windows as the reference, then
//! score perturbed copies of the test windows over noise grids and
//! repetitions.

mod config;
mod experiment;
mod report;
mod svg;

pub use config::{DatasetSource, ExperimentConfig, SkeletonChoice};
pub use experiment::{embed_clips, load_dataset, run_experiment, split_dataset, LengthPipeline};
pub use report::{emit_report, ExperimentReport, ReportCell, ReportFormat};
pub use svg::render_svg;

/// Toolkit version stamped into reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
