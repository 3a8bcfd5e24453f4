//! Shared fixtures for the benchmarks.

use std::sync::Arc;

use fluorosim_core::anatomy::AnatomySpec;
use fluorosim_core::simulation::SimConfig;

pub fn template_anatomy() -> Arc<AnatomySpec> {
    Arc::new(AnatomySpec::template())
}

pub fn default_config() -> Arc<SimConfig> {
    Arc::new(SimConfig::default())
}
