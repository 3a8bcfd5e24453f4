//! The procedure model: per-sequence state, the view and wire loops, tool
//! insertion, and frame emission.

pub mod config;
pub mod engine;
pub mod state;
pub mod view;
pub mod wire;

pub use config::{SimConfig, TransitionConfig, WireConfig, ScrewConfig};
pub use engine::{advance_insertion, frame_record, initial_wire, run_sequence, start_sequence, step, InsertionOutcome};
pub use state::{CArmView, DesiredView, PlannedCorridor, ResampleEvent, ScrewState, SequenceState, WireState};
pub use view::{evaluate_view, is_centered, sample_desired_view, sample_view, ViewRejection, ViewVerdict};
pub use wire::{evaluate_wire, false_positive_probability, sample_wire, WireVerdict, WireViewMode};

#[cfg(test)]
pub(crate) mod fixture {
    use std::sync::Arc;

    use super::{start_sequence, SequenceState, SimConfig};
    use crate::anatomy::AnatomySpec;
    use crate::rng::{stream_rng, SimRng};

    pub fn state_with(seed: u64, config: SimConfig) -> (SimRng, SequenceState) {
        let mut rng = stream_rng(seed, 0);
        let state = start_sequence(
            &mut rng,
            0,
            seed,
            Arc::new(AnatomySpec::template()),
            Arc::new(config),
        )
        .unwrap();
        (rng, state)
    }

    pub fn state(seed: u64) -> (SimRng, SequenceState) {
        state_with(seed, SimConfig::default())
    }
}
