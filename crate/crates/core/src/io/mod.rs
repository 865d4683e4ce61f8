//! Run configuration, fixed-schema tables and the command pipelines built on them.

mod config;
mod pipeline;
mod tables;

use std::path::PathBuf;

pub use config::{parse_config, parse_config_str, Flags, NetworkConfig, OracleSettings, Profile, RunConfig};
pub use pipeline::{
    end_of_solidification, export_tables, fraction_times, fresh_triplet, infer_tables, load_triplet, oracle1d_series,
    oracle2d_series, oracle_targets, parse_grid, run_oracle1d, run_oracle2d, run_pretrain, run_train, save_json,
    validate_model, CycleSummary, Deviation, InstantSummary, ModelView, Thresholds, TrainReport, TrainRun,
    ValidationSummary, COMPARISON_TIMES, END_FRACTION, EXTREMA_GRID, FRACTION_PANELS, PROFILE_POINTS,
};
pub use tables::{Cell, ExportKind, ExportTable};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("table schema: {0}")]
    Schema(String),
    #[error("checkpoint not found: {0}")]
    MissingCheckpoint(PathBuf),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Network(#[from] crate::networks::NetworkError),
    #[error(transparent)]
    Physics(#[from] crate::physics::PhysicsError),
    #[error(transparent)]
    Sampling(#[from] crate::sampling::SamplingError),
    #[error(transparent)]
    Training(#[from] crate::training::TrainingError),
    #[error(transparent)]
    Oracle(#[from] crate::oracles::OracleError),
}
