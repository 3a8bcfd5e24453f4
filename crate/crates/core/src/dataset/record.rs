use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::labels::{CorridorId, PhaseLabels};

pub const SCHEMA_VERSION: u32 = 1;

/// Significant digits kept for every float in a serialized record.
pub const FLOAT_DIGITS: usize = 9;

/// One acquired image: labels at four levels plus the geometry needed to
/// re-render or re-annotate it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameRecord {
    pub schema_version: u32,
    pub sequence_id: u64,
    pub frame_index: usize,
    pub labels: PhaseLabels,
    /// One-hot, corridors(8) | activities(3) | views(8) | frame values(2).
    pub label_vector: Vec<u8>,
    pub camera: CameraRecord,
    pub view: ViewRecord,
    pub tools: Vec<ToolRecord>,
    pub landmarks_2d: Vec<LandmarkProjection>,
    pub corridors_2d: Vec<CorridorProjection>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraRecord {
    /// 3x4 projection matrix, row-major.
    pub projection: Vec<f64>,
    pub sensor_width_mm: f64,
    pub source_detector_mm: f64,
    pub source_viewpoint_mm: f64,
    pub image_height_px: u32,
    pub image_width_px: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViewRecord {
    pub viewpoint: [f64; 3],
    pub ray: [f64; 3],
    /// The principal ray expressed in the patient's APP frame.
    pub ray_app: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToolKind {
    Wire,
    Screw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolRecord {
    pub kind: ToolKind,
    pub corridor: CorridorId,
    pub tip: [f64; 3],
    pub direction: [f64; 3],
    pub inserted_depth_mm: f64,
    /// Full-insertion depth for wires, thread-to-head length for screws.
    pub length_mm: f64,
}

impl ToolRecord {
    pub fn entry(&self) -> [f64; 3] {
        std::array::from_fn(|i| self.tip[i] - self.direction[i] * self.inserted_depth_mm)
    }
}

/// A landmark in pixel coordinates. `u`/`v` are null when the landmark lies
/// behind the source; `in_image` is false whenever it falls off the detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LandmarkProjection {
    pub name: String,
    pub u: Option<f64>,
    pub v: Option<f64>,
    pub in_image: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorridorProjection {
    pub id: CorridorId,
    pub start: Option<[f64; 2]>,
    pub end: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub sequence_seed: u64,
    pub lambda_adj: f64,
    pub retrograde: bool,
}

impl FrameRecord {
    /// The record as canonical JSON: sorted keys, floats rounded to nine
    /// significant digits, no whitespace.
    pub fn to_canonical_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("records serialize");
        quantize_value(&mut value);
        serde_json::to_string(&value).expect("values serialize")
    }

    /// The record exactly as it reads back after serialization.
    pub fn canonicalize(&self) -> FrameRecord {
        let mut value = serde_json::to_value(self).expect("records serialize");
        quantize_value(&mut value);
        serde_json::from_value(value).expect("quantized record deserializes")
    }

    pub fn active_tool(&self) -> Option<&ToolRecord> {
        self.tools.last()
    }

    pub fn tool_counts(&self) -> (usize, usize) {
        let wires = self.tools.iter().filter(|t| t.kind == ToolKind::Wire).count();
        (wires, self.tools.len() - wires)
    }
}

/// Rounds to `FLOAT_DIGITS` significant digits. Idempotent.
pub fn quantize(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", FLOAT_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses")
}

fn quantize_value(value: &mut Value) {
    match value {
        Value::Number(n) if n.is_f64() => {
            let q = quantize(n.as_f64().expect("f64 number"));
            *n = serde_json::Number::from_f64(q).expect("finite");
        }
        Value::Array(items) => items.iter_mut().for_each(quantize_value),
        Value::Object(map) => map.values_mut().for_each(quantize_value),
        _ => {}
    }
}
