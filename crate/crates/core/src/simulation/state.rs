use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::config::SimConfig;
use crate::anatomy::{AnatomySpec, Corridor, ViewTable};
use crate::geometry::{make_projection, CameraModel, Point3, Projection, UnitVec3};
use crate::labels::{Activity, CorridorId, ViewName};

/// Current C-arm pose: viewing point and principal ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CArmView {
    pub viewpoint: Point3,
    pub ray: UnitVec3,
}

/// The view being hunted for or assessed from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesiredView {
    pub name: ViewName,
    pub tolerance_rad: f64,
    pub viewpoint: Point3,
    pub ray: UnitVec3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WireState {
    pub corridor: CorridorId,
    /// Current tip; equals the entry point while uninserted.
    pub tip: Point3,
    pub direction: UnitVec3,
    pub inserted_depth_mm: f64,
    /// Full-insertion depth, the target corridor length.
    pub target_depth_mm: f64,
}

impl WireState {
    pub fn entry(&self) -> Point3 {
        self.tip - self.direction.into_inner() * self.inserted_depth_mm
    }

    pub fn depth_fraction(&self) -> f64 {
        self.inserted_depth_mm / self.target_depth_mm
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScrewState {
    pub corridor: CorridorId,
    /// Axis pose taken from the wire it follows.
    pub entry: Point3,
    pub direction: UnitVec3,
    pub length_mm: f64,
    pub inserted_depth_mm: f64,
}

impl ScrewState {
    pub fn tip(&self) -> Point3 {
        self.entry + self.direction.into_inner() * self.inserted_depth_mm
    }
}

/// A corridor scheduled for treatment, oriented so that `corridor.start` is
/// the entry point.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannedCorridor {
    pub corridor: Corridor,
    pub retrograde: bool,
}

/// Clamp and window sizes actually used by one resampling event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ResampleEvent {
    View {
        radius_mm: f64,
        colatitude_rad: f64,
    },
    WireOrthogonal {
        tip_radius_mm: f64,
        in_plane_bound_rad: f64,
        in_plane_rad: f64,
        out_of_plane_rad: f64,
        theta_star_rad: f64,
    },
    WireBarrel {
        tip_radius_mm: f64,
        colatitude_rad: f64,
    },
}

/// Everything one simulated procedure needs between frames.
#[derive(Debug, Clone)]
pub struct SequenceState {
    pub sequence_id: u64,
    pub seed: u64,
    pub config: Arc<SimConfig>,
    pub views: ViewTable,
    pub anatomy: Arc<AnatomySpec>,
    pub lambda_adj: f64,
    pub camera: CameraModel,
    pub source_viewpoint_mm: f64,
    pub plan: Vec<PlannedCorridor>,
    pub plan_index: usize,
    pub activity: Activity,
    pub desired: Option<DesiredView>,
    pub view: CArmView,
    pub wires: Vec<WireState>,
    pub screws: Vec<ScrewState>,
    pub frame_index: usize,
    pub finished: bool,
    /// When set, resampling events are appended to `trace`.
    pub tracing: bool,
    pub trace: Vec<ResampleEvent>,
}

impl SequenceState {
    pub fn current(&self) -> Option<&PlannedCorridor> {
        self.plan.get(self.plan_index)
    }

    pub fn target(&self) -> &Corridor {
        &self.plan[self.plan_index].corridor
    }

    pub fn projection(&self) -> Projection {
        make_projection(
            &self.view.viewpoint,
            &self.view.ray,
            &self.camera,
            self.source_viewpoint_mm,
        )
        .expect("source distance validated at start")
    }

    pub fn active_wire(&self) -> Option<&WireState> {
        self.wires.last()
    }

    pub fn active_wire_mut(&mut self) -> Option<&mut WireState> {
        self.wires.last_mut()
    }

    pub(crate) fn record(&mut self, event: ResampleEvent) {
        if self.tracing {
            self.trace.push(event);
        }
    }
}
