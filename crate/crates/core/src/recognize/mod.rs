//! A small causal phase decoder standing in for an image model, and the
//! per-level accuracy metrics used to score it.

pub mod decoder;
pub mod features;
pub mod metrics;

pub use decoder::{corpus_features, fit, fit_features, DecodeMode, LevelModel, PhaseDecoder};
pub use features::{featurize, featurize_sequence, FeatureSpace, FrameFeatures};
pub use metrics::{evaluate, LevelMetrics, Metrics};
