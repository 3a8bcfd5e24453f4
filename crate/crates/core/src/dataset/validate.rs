//! Sequence grammar checks. Validation never fails; it reports every
//! violation it finds with the frame it was found at.

use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use super::record::{FrameRecord, ToolKind};
use crate::labels::{Activity, CorridorId, FrameValue, PhaseLabels, ViewName, LABEL_GROUPS};
use crate::anatomy::LANDMARK_COUNT;

/// Relative slack when comparing depths against lengths.
const DEPTH_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    LabelGroup,
    LabelMismatch,
    Landmarks,
    Corridors,
    FrameIndex,
    SequenceId,
    FrameCap,
    ToolCap,
    DepthBounds,
    CorridorRevisited,
    EpisodeStart,
    ActivityOrder,
    HuntingAfterAssessment,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub sequence_id: u64,
    pub frame_index: Option<usize>,
    pub kind: ViolationKind,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.frame_index {
            Some(i) => write!(f, "sequence {} frame {}: {}", self.sequence_id, i, self.message),
            None => write!(f, "sequence {}: {}", self.sequence_id, self.message),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    pub max_frames: usize,
    pub max_instances: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_frames: 1000,
            max_instances: 8,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub sequences: usize,
    pub frames: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.sequences += other.sequences;
        self.frames += other.frames;
        self.violations.extend(other.violations);
    }
}

struct Checker {
    sequence_id: u64,
    violations: Vec<Violation>,
}

impl Checker {
    fn push(&mut self, frame: Option<usize>, kind: ViolationKind, message: String) {
        self.violations.push(Violation {
            sequence_id: self.sequence_id,
            frame_index: frame,
            kind,
            message,
        });
    }
}

pub fn validate_sequence(records: &[FrameRecord], limits: &Limits) -> ValidationReport {
    let sequence_id = records.first().map_or(0, |r| r.sequence_id);
    let mut c = Checker {
        sequence_id,
        violations: Vec::new(),
    };

    if records.len() > limits.max_frames {
        c.push(
            None,
            ViolationKind::FrameCap,
            format!("{} frames exceed the cap of {}", records.len(), limits.max_frames),
        );
    }

    for (i, r) in records.iter().enumerate() {
        let at = Some(i);
        if r.frame_index != i {
            c.push(at, ViolationKind::FrameIndex, format!("frame_index is {}", r.frame_index));
        }
        if r.sequence_id != sequence_id {
            c.push(at, ViolationKind::SequenceId, format!("sequence_id is {}", r.sequence_id));
        }
        check_labels(&mut c, i, r);
        if r.landmarks_2d.len() != LANDMARK_COUNT {
            c.push(
                at,
                ViolationKind::Landmarks,
                format!("{} landmarks, expected {LANDMARK_COUNT}", r.landmarks_2d.len()),
            );
        }
        let ids: HashSet<CorridorId> = r.corridors_2d.iter().map(|p| p.id).collect();
        if r.corridors_2d.len() != CorridorId::COUNT || ids.len() != CorridorId::COUNT {
            c.push(at, ViolationKind::Corridors, "corridor projections incomplete".into());
        }
        let (wires, screws) = r.tool_counts();
        if wires > limits.max_instances || screws > limits.max_instances {
            c.push(
                at,
                ViolationKind::ToolCap,
                format!("{wires} wires and {screws} screws exceed {}", limits.max_instances),
            );
        }
        for t in &r.tools {
            let ok = t.inserted_depth_mm >= 0.0
                && t.inserted_depth_mm <= t.length_mm * (1.0 + DEPTH_TOLERANCE)
                && t.length_mm > 0.0;
            if !ok {
                let kind = match t.kind {
                    ToolKind::Wire => "wire",
                    ToolKind::Screw => "screw",
                };
                c.push(
                    at,
                    ViolationKind::DepthBounds,
                    format!(
                        "{kind} in {} at depth {} of {}",
                        t.corridor, t.inserted_depth_mm, t.length_mm
                    ),
                );
            }
        }
    }

    check_grammar(&mut c, records);

    ValidationReport {
        sequences: 1,
        frames: records.len(),
        violations: c.violations,
    }
}

fn check_labels(c: &mut Checker, i: usize, r: &FrameRecord) {
    match PhaseLabels::from_vector(&r.label_vector) {
        Ok(decoded) if decoded == r.labels => {}
        Ok(decoded) => c.push(
            Some(i),
            ViolationKind::LabelMismatch,
            format!("label_vector encodes {decoded:?}, labels say {:?}", r.labels),
        ),
        Err(_) => {
            let mut offenders = Vec::new();
            if r.label_vector.len() == crate::labels::LABEL_DIM {
                for (name, offset, width) in LABEL_GROUPS {
                    let set = r.label_vector[offset..offset + width].iter().filter(|&&b| b != 0).count();
                    if set != 1 {
                        offenders.push(format!("{name} has {set} active slots"));
                    }
                }
            } else {
                offenders.push(format!("label_vector has {} slots", r.label_vector.len()));
            }
            c.push(Some(i), ViolationKind::LabelGroup, offenders.join("; "));
        }
    }
}

fn check_grammar(c: &mut Checker, records: &[FrameRecord]) {
    let mut finished: HashSet<CorridorId> = HashSet::new();
    let mut episode: Option<(CorridorId, Activity)> = None;
    let mut run: Option<(CorridorId, ViewName, bool)> = None;

    for (i, r) in records.iter().enumerate() {
        let l = r.labels;
        match episode {
            Some((corridor, activity)) if corridor == l.corridor => {
                if l.activity.rank() < activity.rank() {
                    c.push(
                        Some(i),
                        ViolationKind::ActivityOrder,
                        format!("{} after {} in {}", l.activity, activity, corridor),
                    );
                }
                episode = Some((corridor, later(activity, l.activity)));
            }
            previous => {
                if let Some((corridor, _)) = previous {
                    finished.insert(corridor);
                }
                if finished.contains(&l.corridor) {
                    c.push(
                        Some(i),
                        ViolationKind::CorridorRevisited,
                        format!("{} was already treated", l.corridor),
                    );
                }
                if l.activity != Activity::PositionWire {
                    c.push(
                        Some(i),
                        ViolationKind::EpisodeStart,
                        format!("episode for {} starts with {}", l.corridor, l.activity),
                    );
                }
                episode = Some((l.corridor, l.activity));
            }
        }

        let assessed = l.frame_value == FrameValue::Assessment;
        run = match run {
            Some((corridor, view, seen)) if corridor == l.corridor && view == l.view => {
                if seen && !assessed {
                    c.push(
                        Some(i),
                        ViolationKind::HuntingAfterAssessment,
                        format!("hunting for {} after it was assessed", l.view),
                    );
                }
                Some((corridor, view, seen || assessed))
            }
            _ => Some((l.corridor, l.view, assessed)),
        };
    }
}

fn later(a: Activity, b: Activity) -> Activity {
    if b.rank() > a.rank() {
        b
    } else {
        a
    }
}
