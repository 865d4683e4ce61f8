//! Composite loss, adaptive weighting and the optimization schedule.

mod adam;
mod families;
pub mod lbfgs;
mod loss;
mod schedule;
mod weights;

pub use adam::AdamState;
pub use families::{Family, Group, LossBreakdown};
pub use lbfgs::{LbfgsConfig, LbfgsOutcome, LbfgsState, StopReason};
pub use loss::{compute_loss, total_weighted_loss, weighted_total, LossFlags, LossProblem};
pub use schedule::{
    pretrain, train_full, CycleRecord, EpochRecord, Phase, PretrainTarget, RefreshRecord, TrainContext, TrainOutcome,
    Trainer, TrainingConfig, TrainingHistory,
};
pub use weights::{update_weights, WeightMode, WeightState, DEFAULT_TAU};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::autodiff::AutodiffError;
use crate::physics::PhysicsError;
use crate::sampling::SamplingError;

#[derive(Debug, Error)]
pub enum TrainingError {
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("non-finite loss in family `{family}` during {phase} step {step}; family values: {values:?}")]
    NonFinite { phase: String, step: usize, family: String, values: BTreeMap<String, f64> },
    #[error(transparent)]
    Autodiff(#[from] AutodiffError),
    #[error(transparent)]
    Physics(#[from] PhysicsError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
}

/// Optimizer state carried in checkpoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OptimizerState {
    Adam(AdamState),
    Lbfgs(LbfgsState),
}
