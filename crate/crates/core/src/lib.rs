//! Building blocks for two-stage radio-map construction: a coarse map is
//! predicted from environment rasters, then corrected with sparse on-site
//! measurements.
//!
//! This crate holds the deterministic parts: the scene data model and its
//! on-disk format, the six input maps (transmitter position, obstacle top
//! view, COST-231 empirical map, LoS indicator, sparse measurements and their
//! RBF interpolation), a synthetic scene generator with a propagation oracle,
//! and the RMSE / MAE / SSIM / PSNR metrics.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the aliases at the
//! crate root fix it to `f64`, which is what ingestion and evaluation use.

pub mod error;
pub mod features;
pub mod grid;
pub mod io;
pub mod metrics;
pub mod normalize;
pub mod real;
pub mod scene;
pub mod seed;
pub mod split;
pub mod synth;

pub use error::{Error, Result};
pub use features::{FeatureKind, FeatureMap, InputStack, RbfConfig, RbfKernel, ShapeParam, Stage};
pub use grid::{Grid2, GridSpec};
pub use metrics::MetricsRecord;
pub use normalize::{Direction, NormalizationRange};
pub use real::Real;
pub use scene::{Measurement, MeasurementSet, RadioMap, Scene, TransmitterConfig};
pub use seed::derive_seed;
pub use split::DatasetSplits;
pub use synth::{OracleParams, Span, SynthParams};

pub type Scene64 = Scene<f64>;
pub type RadioMap64 = RadioMap<f64>;
pub type MeasurementSet64 = MeasurementSet<f64>;
pub type GridSpec64 = GridSpec<f64>;
pub type FeatureMap64 = FeatureMap<f64>;
pub type InputStack64 = InputStack<f64>;
pub type NormalizationRange64 = NormalizationRange<f64>;
pub type RbfConfig64 = RbfConfig<f64>;
pub type SynthParams64 = SynthParams<f64>;
pub type OracleParams64 = OracleParams<f64>;
