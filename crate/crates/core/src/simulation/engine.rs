use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use super::config::SimConfig;
use super::state::{CArmView, PlannedCorridor, ScrewState, SequenceState, WireState};
use super::view::{desired_view, evaluate_view, sample_desired_view, sample_index, sample_view};
use super::wire::{evaluate_wire, sample_wire};
use crate::anatomy::{AnatomySpec, Corridor};
use crate::dataset::record::{
    CameraRecord, CorridorProjection, FrameRecord, LandmarkProjection, Provenance, ToolKind,
    ToolRecord, ViewRecord, SCHEMA_VERSION,
};
use crate::error::SimError;
use crate::geometry::{deg, sample_in_sphere, sample_solid_angle, CameraModel, Point3, Projection, UnitVec3, Vec3};
use crate::labels::{Activity, FrameValue, PhaseLabels};
use crate::rng::{stream_rng, uniform};

/// What happened after an assessment frame during insertion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InsertionOutcome {
    Advanced,
    WireComplete,
    ScrewComplete,
}

pub fn start_sequence<R: Rng + ?Sized>(
    rng: &mut R,
    sequence_id: u64,
    seed: u64,
    anatomy: Arc<AnatomySpec>,
    config: Arc<SimConfig>,
) -> Result<SequenceState, SimError> {
    config.validate()?;
    let views = config.view_table()?;
    let lambda_adj = uniform(rng, config.lambda_adj_range[0], config.lambda_adj_range[1]);
    let sensor = uniform(rng, config.sensor_width_range_mm[0], config.sensor_width_range_mm[1]);
    let sdd = uniform(rng, config.source_detector_range_mm[0], config.source_detector_range_mm[1]);
    let fraction = uniform(
        rng,
        config.source_viewpoint_fraction[0],
        config.source_viewpoint_fraction[1],
    );
    let [height, width] = config.image_size_px;
    let camera = CameraModel::new(sensor, sdd, height, width)?;

    let [kmin, kmax] = config.corridors_per_sequence;
    let count = rng.gen_range(kmin..=kmax);
    let mut ids = anatomy.corridors.iter().map(|c| c.id).collect::<Vec<_>>();
    ids.shuffle(rng);
    let plan = ids
        .into_iter()
        .take(count)
        .map(|id| {
            let corridor = anatomy.corridor(id);
            let retrograde = id.is_ramus() && rng.gen::<f64>() < config.retrograde_probability;
            PlannedCorridor {
                corridor: if retrograde {
                    corridor.reversed()
                } else {
                    corridor.clone()
                },
                retrograde,
            }
        })
        .collect::<Vec<_>>();

    // The first shot of a procedure is an AP through the pelvis center.
    let ap = anatomy
        .app_frame
        .direction_to_anatomy(&views.get(crate::labels::ViewName::Ap).ideal_ray_app);
    let view = CArmView {
        viewpoint: anatomy.app_frame.origin,
        ray: UnitVec3::new_normalize(ap),
    };

    let mut state = SequenceState {
        sequence_id,
        seed,
        config,
        views,
        anatomy,
        lambda_adj,
        camera,
        source_viewpoint_mm: fraction * sdd,
        plan,
        plan_index: 0,
        activity: Activity::PositionWire,
        desired: None,
        view,
        wires: Vec::new(),
        screws: Vec::new(),
        frame_index: 0,
        finished: false,
        tracing: false,
        trace: Vec::new(),
    };
    if state.plan.is_empty() {
        state.finished = true;
    } else {
        begin_corridor(rng, &mut state);
    }
    Ok(state)
}

/// Places a fresh wire near the current target's entry point.
pub fn initial_wire<R: Rng + ?Sized>(rng: &mut R, config: &SimConfig, corridor: &Corridor) -> WireState {
    WireState {
        corridor: corridor.id,
        tip: sample_in_sphere(rng, &corridor.start, config.initial_tip_jitter_mm).expect("validated"),
        direction: sample_solid_angle(rng, &corridor.axis(), deg(config.initial_direction_jitter_deg))
            .expect("validated"),
        inserted_depth_mm: 0.0,
        target_depth_mm: corridor.length(),
    }
}

fn begin_corridor<R: Rng + ?Sized>(rng: &mut R, state: &mut SequenceState) {
    let wire = initial_wire(rng, &state.config, state.target());
    state.wires.push(wire);
    state.activity = Activity::PositionWire;
    choose_view(rng, state);
}

/// Draws a new desired view. If the current pose does not already satisfy
/// it, the C-arm makes its first move toward it before the next shot.
fn choose_view<R: Rng + ?Sized>(rng: &mut R, state: &mut SequenceState) {
    let spec = sample_desired_view(rng, state);
    let desired = desired_view(state, &spec);
    state.desired = Some(desired);
    if !evaluate_view(&state.projection(), &desired).accepted() {
        state.view = sample_view(rng, state, &desired);
    }
}

/// Advances the active wire or screw by one random step, firing the
/// completion transition once the tool is fully inserted.
pub fn advance_insertion<R: Rng + ?Sized>(rng: &mut R, state: &mut SequenceState) -> InsertionOutcome {
    let [lo, hi] = state.config.insertion_step_mm;
    match state.activity {
        Activity::InsertWire => {
            let wire = state.active_wire_mut().expect("insertion needs a wire");
            if wire.inserted_depth_mm < wire.target_depth_mm {
                let step = uniform(rng, lo, hi).min(wire.target_depth_mm - wire.inserted_depth_mm);
                wire.inserted_depth_mm += step;
                wire.tip += wire.direction.into_inner() * step;
                if wire.inserted_depth_mm < wire.target_depth_mm {
                    return InsertionOutcome::Advanced;
                }
            }
            let w = &state.config.transitions.after_wire_inserted;
            if sample_index(rng, &[w.insert_screw, w.next_corridor]) == 0 {
                start_screw(rng, state);
            } else {
                next_corridor(rng, state);
            }
            InsertionOutcome::WireComplete
        }
        Activity::InsertScrew => {
            let screw = state.screws.last_mut().expect("insertion needs a screw");
            if screw.inserted_depth_mm < screw.length_mm {
                let step = uniform(rng, lo, hi).min(screw.length_mm - screw.inserted_depth_mm);
                screw.inserted_depth_mm += step;
                if screw.inserted_depth_mm < screw.length_mm {
                    return InsertionOutcome::Advanced;
                }
            }
            next_corridor(rng, state);
            InsertionOutcome::ScrewComplete
        }
        Activity::PositionWire => panic!("advance_insertion called while positioning"),
    }
}

/// Starts a screw along the active wire and makes its first advance.
fn start_screw<R: Rng + ?Sized>(rng: &mut R, state: &mut SequenceState) {
    let wire = state.active_wire().expect("screw follows a wire").clone();
    let [lo, hi] = state.config.screw.length_range_mm;
    let hi = hi.min(wire.target_depth_mm).max(lo);
    state.screws.push(ScrewState {
        corridor: wire.corridor,
        entry: wire.entry(),
        direction: wire.direction,
        length_mm: uniform(rng, lo, hi),
        inserted_depth_mm: 0.0,
    });
    state.activity = Activity::InsertScrew;
    advance_insertion(rng, state);
}

fn next_corridor<R: Rng + ?Sized>(rng: &mut R, state: &mut SequenceState) {
    state.plan_index += 1;
    if state.plan_index >= state.plan.len() {
        state.finished = true;
    } else {
        begin_corridor(rng, state);
    }
}

/// Acquires one image at the current pose, emits its record, then applies
/// whatever transition the image triggers.
pub fn step<R: Rng + ?Sized>(rng: &mut R, state: &mut SequenceState) -> Result<FrameRecord, SimError> {
    if state.finished || state.frame_index >= state.config.max_frames {
        state.finished = true;
        return Err(SimError::Finished);
    }
    let desired = state.desired.expect("active sequences have a desired view");
    let projection = state.projection();
    let accepted = evaluate_view(&projection, &desired).accepted();
    let labels = PhaseLabels {
        corridor: state.target().id,
        activity: state.activity,
        view: desired.name,
        frame_value: if accepted {
            FrameValue::Assessment
        } else {
            FrameValue::Hunting
        },
    };
    let record = frame_record(state, &projection, labels);
    state.frame_index += 1;

    if !accepted {
        state.view = sample_view(rng, state, &desired);
    } else {
        match state.activity {
            Activity::PositionWire => {
                let wire = state.active_wire().expect("positioning needs a wire").clone();
                let verdict = evaluate_wire(rng, state, &wire, &projection);
                if verdict.good {
                    let g = &state.config.transitions.after_good_wire;
                    match sample_index(rng, &[g.position_wire, g.insert_wire, g.insert_screw]) {
                        0 => choose_view(rng, state),
                        1 => {
                            state.activity = Activity::InsertWire;
                            advance_insertion(rng, state);
                        }
                        _ => start_screw(rng, state),
                    }
                } else {
                    let next = sample_wire(rng, state, &wire, &projection, &verdict);
                    *state.active_wire_mut().expect("positioning needs a wire") = next;
                }
            }
            Activity::InsertWire | Activity::InsertScrew => {
                let before = state.plan_index;
                advance_insertion(rng, state);
                let same_tool = state.plan_index == before && state.activity == labels.activity;
                if !state.finished
                    && same_tool
                    && rng.gen::<f64>() < state.config.transitions.insertion_view_change
                {
                    choose_view(rng, state);
                }
            }
        }
    }
    if state.frame_index >= state.config.max_frames {
        state.finished = true;
    }
    Ok(record)
}

/// Simulates one whole sequence from its seed.
pub fn run_sequence(
    sequence_id: u64,
    seed: u64,
    anatomy: Arc<AnatomySpec>,
    config: Arc<SimConfig>,
) -> Result<Vec<FrameRecord>, SimError> {
    let mut rng = stream_rng(seed, 0);
    let mut state = start_sequence(&mut rng, sequence_id, seed, anatomy, config)?;
    let mut frames = Vec::new();
    while !state.finished {
        frames.push(step(&mut rng, &mut state)?);
    }
    Ok(frames)
}

fn to_array(v: &Vec3) -> [f64; 3] {
    [v.x, v.y, v.z]
}

fn point_array(p: &Point3) -> [f64; 3] {
    [p.x, p.y, p.z]
}

fn project_pair(projection: &Projection, point: &Point3) -> Option<[f64; 2]> {
    projection.project(point).ok().map(|px| [px.x, px.y])
}

/// Builds the canonical record for the current state.
pub fn frame_record(state: &SequenceState, projection: &Projection, labels: PhaseLabels) -> FrameRecord {
    let camera = &state.camera;
    let mut tools: Vec<ToolRecord> = Vec::new();
    // Tools in placement order: each wire is followed by its screw, if any.
    for wire in &state.wires {
        tools.push(ToolRecord {
            kind: ToolKind::Wire,
            corridor: wire.corridor,
            tip: point_array(&wire.tip),
            direction: to_array(&wire.direction),
            inserted_depth_mm: wire.inserted_depth_mm,
            length_mm: wire.target_depth_mm,
        });
        for screw in state.screws.iter().filter(|s| s.corridor == wire.corridor) {
            tools.push(ToolRecord {
                kind: ToolKind::Screw,
                corridor: screw.corridor,
                tip: point_array(&screw.tip()),
                direction: to_array(&screw.direction),
                inserted_depth_mm: screw.inserted_depth_mm,
                length_mm: screw.length_mm,
            });
        }
    }
    let landmarks_2d = state
        .anatomy
        .landmarks
        .iter()
        .map(|l| {
            let px = projection.project(&l.position).ok();
            LandmarkProjection {
                name: l.name.clone(),
                u: px.map(|p| p.x),
                v: px.map(|p| p.y),
                in_image: px.is_some_and(|p| projection.in_image(&p)),
            }
        })
        .collect();
    let corridors_2d = state
        .anatomy
        .corridors
        .iter()
        .map(|c| CorridorProjection {
            id: c.id,
            start: project_pair(projection, &c.start),
            end: project_pair(projection, &c.end),
        })
        .collect();
    let current = state.current().expect("frames need a target");
    FrameRecord {
        schema_version: SCHEMA_VERSION,
        sequence_id: state.sequence_id,
        frame_index: state.frame_index,
        labels,
        label_vector: labels.to_vector().to_vec(),
        camera: CameraRecord {
            projection: projection.matrix_row_major().to_vec(),
            sensor_width_mm: camera.sensor_width_mm,
            source_detector_mm: camera.source_detector_mm,
            source_viewpoint_mm: state.source_viewpoint_mm,
            image_height_px: camera.image_height_px,
            image_width_px: camera.image_width_px,
        },
        view: ViewRecord {
            viewpoint: point_array(&state.view.viewpoint),
            ray: to_array(&state.view.ray),
            ray_app: to_array(&state.anatomy.app_frame.direction_to_app(&state.view.ray)),
        },
        tools,
        landmarks_2d,
        corridors_2d,
        provenance: Provenance {
            sequence_seed: state.seed,
            lambda_adj: state.lambda_adj,
            retrograde: current.retrograde,
        },
    }
    .canonicalize()
}
