//! Recursive residual convolutional decomposition of non-stationary signals,
//! with iterative-filtering and spline-envelope baselines.

pub mod baselines;
pub mod error;
pub mod eval;
pub mod lab;
pub mod model;
pub mod signal;
pub mod train;

pub use error::{Error, Result};
pub use model::{ModelParams, ModelShape};
pub use signal::{SampleRecord, SampleSet, Signal, Split};
pub use train::{LossKind, LossSpec, TrainConfig};
