//! Two-stage radio-map construction: training, inference, evaluation,
//! ablation and measurement-density sweeps over scene datasets.
//!
//! A prediction network maps environment rasters to a coarse radio map; a
//! correction network refines that map with sparse measurements. Both are
//! trained adversarially by [`train::train_stage`] and stored as
//! [`checkpoint::Checkpoint`]s, which [`infer::Model`] turns back into
//! runnable networks.

pub mod ablation;
pub mod checkpoint;
pub mod config;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod export;
pub mod infer;
pub mod manifest;
pub mod plot;
pub mod sweep;
pub mod train;

pub use checkpoint::Checkpoint;
pub use config::{RunConfig, StageSetup};
pub use dataset::{Dataset, SceneEntry};
pub use error::{Error, Result};
pub use infer::Model;
pub use train::{train_rmc, train_rmp, train_stage, TrainConfig, TrainOutcome};

pub type Model32 = Model<f32>;
pub type Model64 = Model<f64>;
