//! Framewise label quantization and label-noise measurement.
//!
//! High-resolution note annotations ([`annotation`]) are turned into binary
//! piano rolls by one of six labeling functions ([`quantize`]), scored with
//! framewise precision/recall/f-measure ([`metrics`]), and used to train a
//! linear framewise classifier on synthetic features ([`synth`], [`trainer`])
//! to measure how much sub-frame label misalignment costs.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the common choice. Annotation times are always `f64`.

pub mod annotation;
pub mod error;
pub mod io;
pub mod metrics;
pub mod quantize;
pub mod scalar;
pub mod synth;
pub mod trainer;

pub use annotation::{
    parse_midi, parse_tsv, validate, Annotation, NoteEvent, PitchMap, ValidationReport,
};
pub use error::{Error, Result};
pub use metrics::{framewise_counts, prf, resample, truncate, EvalCounts, EvalProtocol};
pub use quantize::{
    noise_ceiling, quantize_interval, rasterize, FrameGrid, LabelMatrix, LabelingFunction,
    QuantizedInterval,
};
pub use scalar::Scalar;
pub use synth::SynthConfig;
pub use trainer::{ExperimentConfig, ExperimentTable, TrainConfig};

pub type EvalResult = metrics::EvalResult<f64>;
pub type EvalResult32 = metrics::EvalResult<f32>;
pub type FeatureMatrix = synth::FeatureMatrix<f64>;
pub type FeatureMatrix32 = synth::FeatureMatrix<f32>;
pub type Dataset = trainer::Dataset<f64>;
pub type Dataset32 = trainer::Dataset<f32>;
pub type ModelParams = trainer::ModelParams<f64>;
pub type ModelParams32 = trainer::ModelParams<f32>;
