//! Coordinate-network encodings with a trainable sine layer on top of a
//! positional encoding, the baselines it is compared against, a small dense
//! network with exact gradients, training, image metrics and benchmark tasks.

pub mod encoders;
pub mod error;
pub mod network;
pub mod params;
pub mod tasks;
pub mod metrics;
pub mod training;

pub use error::{Error, Result};
pub use params::Parameters;
pub use encoders::{Encoder, EncoderSpec, SpeMode, SpectrumEntry};
pub use metrics::ImageBuffer;
pub use network::{ActivationKind, InitScheme, Model, ModelSpec};
pub use tasks::{compare_encodings, run_experiment, ComparisonReport, Dataset, DatasetSpec, ExperimentSpec, RunReport, Variant};
pub use training::{train, OptimConfig, TrainRecord};
