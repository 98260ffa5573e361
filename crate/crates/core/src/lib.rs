//! Instantaneous fuel-consumption estimation from GNSS speed and IMU
//! acceleration.
//!
//! The crate conditions raw sensor streams into a synchronized 10 Hz dataset
//! ([`pipeline`]), fits three estimators to it ([`estimators`], [`fitting`]),
//! scores them ([`metrics`]), recognizes whether the engine runs while the
//! vehicle is stopped ([`engine`]) and generates synthetic trips with known
//! ground truth ([`synth`]).

pub mod engine;
pub mod error;
pub mod estimators;
pub mod exec;
pub mod fitting;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod synth;

pub use error::{Error, Result};
pub use estimators::{Model, ModelKind, NnParams, PbParams, VtMicroParams};
pub use exec::Execution;
pub use pipeline::{Quantity, SensorSeries, SyncedDataset};
