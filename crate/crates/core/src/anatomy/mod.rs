//! The annotated pelvis: bony corridors, landmarks, the anterior pelvic
//! plane (APP) frame and the standard-view table.

mod synth;
mod views;

pub use synth::{synth_pelvis, PelvisParams};
pub use views::{ideal_view, resolve_oblique, ViewSpec, ViewTable};

use serde::{Deserialize, Serialize};

use crate::error::{AnatomyError, JsonError};
use crate::geometry::{Point3, UnitVec3, Vec3};
use crate::labels::CorridorId;

pub const ANATOMY_SCHEMA_VERSION: u32 = 1;
pub const LANDMARK_COUNT: usize = 16;

pub const ASIS_LEFT: &str = "asis_left";
pub const ASIS_RIGHT: &str = "asis_right";
pub const PUBIC_TUBERCLE_LEFT: &str = "pubic_tubercle_left";
pub const PUBIC_TUBERCLE_RIGHT: &str = "pubic_tubercle_right";

/// The bundled synthetic template, in APP coordinates (mm).
pub const TEMPLATE_JSON: &str = include_str!("../../data/pelvis_template.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Landmark {
    pub name: String,
    pub position: Point3,
}

/// Exactly 16 named landmarks. ASIS and pubic tubercles on both sides are
/// required; the remaining names are free.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Landmark>", into = "Vec<Landmark>")]
pub struct LandmarkSet(Vec<Landmark>);

impl LandmarkSet {
    pub fn new(landmarks: Vec<Landmark>) -> Result<Self, AnatomyError> {
        if landmarks.len() != LANDMARK_COUNT {
            return Err(AnatomyError::LandmarkCount(landmarks.len()));
        }
        if landmarks
            .iter()
            .any(|l| !l.position.coords.iter().all(|c| c.is_finite()))
        {
            return Err(AnatomyError::DegenerateLandmarks("non-finite coordinate"));
        }
        for required in [ASIS_LEFT, ASIS_RIGHT, PUBIC_TUBERCLE_LEFT, PUBIC_TUBERCLE_RIGHT] {
            if !landmarks.iter().any(|l| l.name == required) {
                return Err(AnatomyError::MissingLandmark(required.to_string()));
            }
        }
        Ok(LandmarkSet(landmarks))
    }

    pub fn get(&self, name: &str) -> Option<&Point3> {
        self.0.iter().find(|l| l.name == name).map(|l| &l.position)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Landmark> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn map_positions(&self, mut f: impl FnMut(&Point3) -> Point3) -> Self {
        LandmarkSet(
            self.0
                .iter()
                .map(|l| Landmark {
                    name: l.name.clone(),
                    position: f(&l.position),
                })
                .collect(),
        )
    }
}

impl TryFrom<Vec<Landmark>> for LandmarkSet {
    type Error = AnatomyError;

    fn try_from(value: Vec<Landmark>) -> Result<Self, Self::Error> {
        LandmarkSet::new(value)
    }
}

impl From<LandmarkSet> for Vec<Landmark> {
    fn from(value: LandmarkSet) -> Self {
        value.0
    }
}

/// A bony corridor modeled as a cylinder from `start` (entry) to `end`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corridor {
    pub id: CorridorId,
    pub start: Point3,
    pub end: Point3,
    pub radius_mm: f64,
    /// Landmarks the endpoints are attached to when synthesizing variants.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_anchor: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_anchor: Option<String>,
}

impl Corridor {
    pub fn length(&self) -> f64 {
        (self.end - self.start).norm()
    }

    pub fn axis(&self) -> UnitVec3 {
        UnitVec3::new_normalize(self.end - self.start)
    }

    /// The ideal viewing point.
    pub fn midpoint(&self) -> Point3 {
        nalgebra::center(&self.start, &self.end)
    }

    /// The same corridor approached from the other end.
    pub fn reversed(&self) -> Corridor {
        Corridor {
            id: self.id,
            start: self.end,
            end: self.start,
            radius_mm: self.radius_mm,
            start_anchor: self.end_anchor.clone(),
            end_anchor: self.start_anchor.clone(),
        }
    }

    fn validate(&self) -> Result<(), AnatomyError> {
        let len = self.length();
        if !(len > 1e-9) || !len.is_finite() {
            return Err(AnatomyError::ZeroLengthCorridor(self.id.to_string()));
        }
        if !(self.radius_mm > 0.0) {
            return Err(AnatomyError::InvalidRadius(self.id.to_string()));
        }
        Ok(())
    }
}

/// Rigid frame of the anterior pelvic plane, expressed in anatomy
/// coordinates: x from left to right ASIS, y anterior, z cranial, origin at
/// the pubic-tubercle midpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AppFrame {
    pub origin: Point3,
    pub x_axis: Vec3,
    pub y_axis: Vec3,
    pub z_axis: Vec3,
}

impl AppFrame {
    pub fn identity() -> Self {
        AppFrame {
            origin: Point3::origin(),
            x_axis: Vec3::x(),
            y_axis: Vec3::y(),
            z_axis: Vec3::z(),
        }
    }

    /// Rotation taking anatomy directions to APP directions (rows are the
    /// APP axes).
    pub fn rotation(&self) -> nalgebra::Matrix3<f64> {
        nalgebra::Matrix3::from_rows(&[
            self.x_axis.transpose(),
            self.y_axis.transpose(),
            self.z_axis.transpose(),
        ])
    }

    pub fn to_app(&self, point: &Point3) -> Point3 {
        Point3::from(self.rotation() * (point - self.origin))
    }

    pub fn direction_to_anatomy(&self, dir_app: &Vec3) -> Vec3 {
        self.x_axis * dir_app.x + self.y_axis * dir_app.y + self.z_axis * dir_app.z
    }

    pub fn direction_to_app(&self, dir: &Vec3) -> Vec3 {
        self.rotation() * dir
    }
}

/// Builds the APP frame from both ASIS and both pubic tubercles.
pub fn app_frame_from_landmarks(landmarks: &LandmarkSet) -> Result<AppFrame, AnatomyError> {
    let get = |name: &str| {
        landmarks
            .get(name)
            .copied()
            .ok_or_else(|| AnatomyError::MissingLandmark(name.to_string()))
    };
    let asis_l = get(ASIS_LEFT)?;
    let asis_r = get(ASIS_RIGHT)?;
    let pt_l = get(PUBIC_TUBERCLE_LEFT)?;
    let pt_r = get(PUBIC_TUBERCLE_RIGHT)?;

    let across = asis_r - asis_l;
    if across.norm() < 1e-9 {
        return Err(AnatomyError::DegenerateLandmarks("ASIS points coincide"));
    }
    let x_axis = across.normalize();
    let origin = nalgebra::center(&pt_l, &pt_r);
    let up = nalgebra::center(&asis_l, &asis_r) - origin;
    let up_perp = up - x_axis * up.dot(&x_axis);
    if up_perp.norm() < 1e-6 * up.norm().max(1.0) {
        return Err(AnatomyError::DegenerateLandmarks(
            "ASIS line passes through the pubic-tubercle midpoint",
        ));
    }
    let z_axis = up_perp.normalize();
    let y_axis = z_axis.cross(&x_axis);
    Ok(AppFrame {
        origin,
        x_axis,
        y_axis,
        z_axis,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnatomyMetadata {
    /// Where this anatomy came from, e.g. `template-v1` or `synthetic`.
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// A complete annotated pelvis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnatomySpec {
    pub schema_version: u32,
    pub metadata: AnatomyMetadata,
    pub landmarks: LandmarkSet,
    pub corridors: Vec<Corridor>,
    pub app_frame: AppFrame,
}

#[derive(Deserialize)]
struct AnatomyDocument {
    schema_version: u32,
    #[serde(default)]
    metadata: AnatomyMetadata,
    landmarks: LandmarkSet,
    corridors: Vec<Corridor>,
    #[serde(default)]
    app_frame: Option<AppFrame>,
}

impl AnatomySpec {
    /// Validates the corridor set and derives the APP frame from landmarks.
    pub fn new(
        metadata: AnatomyMetadata,
        landmarks: LandmarkSet,
        mut corridors: Vec<Corridor>,
    ) -> Result<Self, AnatomyError> {
        let app_frame = app_frame_from_landmarks(&landmarks)?;
        corridors.sort_by_key(|c| c.id);
        validate_corridors(&corridors)?;
        Ok(AnatomySpec {
            schema_version: ANATOMY_SCHEMA_VERSION,
            metadata,
            landmarks,
            corridors,
            app_frame,
        })
    }

    pub fn template() -> Self {
        Self::from_json(TEMPLATE_JSON).expect("bundled template is valid")
    }

    pub fn corridor(&self, id: CorridorId) -> &Corridor {
        // validated: all 8 present, sorted by id
        &self.corridors[id.index()]
    }

    pub fn from_json(text: &str) -> Result<Self, AnatomyError> {
        let doc: AnatomyDocument =
            serde_json::from_str(text).map_err(|e| AnatomyError::Json(JsonError::from(e)))?;
        if doc.schema_version != ANATOMY_SCHEMA_VERSION {
            return Err(AnatomyError::SchemaVersion {
                found: doc.schema_version,
                expected: ANATOMY_SCHEMA_VERSION,
            });
        }
        let mut spec = AnatomySpec::new(doc.metadata, doc.landmarks, doc.corridors)?;
        if let Some(frame) = doc.app_frame {
            spec.app_frame = frame;
        }
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("anatomy serializes")
    }
}

fn validate_corridors(sorted: &[Corridor]) -> Result<(), AnatomyError> {
    let ids: Vec<CorridorId> = sorted.iter().map(|c| c.id).collect();
    if ids != CorridorId::ALL {
        return Err(AnatomyError::CorridorSet(format!("found {ids:?}")));
    }
    sorted.iter().try_for_each(Corridor::validate)
}
