//! Stochastic simulation of fluoroscopy-guided pelvic screw fixation.
//!
//! Each simulated procedure is a sequence of annotated frames labelled at
//! four levels: target corridor, activity, C-arm view and frame value.

pub mod anatomy;
pub mod dataset;
pub mod error;
pub mod geometry;
pub mod ks;
pub mod labels;
pub mod recognize;
pub mod rng;
pub mod simulation;

pub use error::{AnatomyError, ConfigError, CorpusError, DatasetError, GeometryError, RecognizeError, SimError};
pub use labels::{Activity, CorridorId, FrameValue, PhaseLabels, ViewName};
