//! The four-level phase taxonomy and its 21-slot one-hot encoding.
//!
//! Slot order is fixed: corridors (8), activities (3), views (8), frame
//! values (2).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::DatasetError;

macro_rules! label_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];
            pub const COUNT: usize = [$($text),+].len();

            pub fn index(self) -> usize {
                self as usize
            }

            pub fn from_index(index: usize) -> Option<Self> {
                Self::ALL.get(index).copied()
            }

            pub fn name(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($text => Ok($name::$variant),)+
                    other => Err(format!("unknown {} `{}`", stringify!($name), other)),
                }
            }
        }
    };
}

label_enum!(
    /// Target bony corridor.
    CorridorId {
        RamusLeft => "ramus_left",
        RamusRight => "ramus_right",
        TeardropLeft => "teardrop_left",
        TeardropRight => "teardrop_right",
        S1Left => "s1_left",
        S1Right => "s1_right",
        S2Left => "s2_left",
        S2Right => "s2_right",
    }
);

label_enum!(
    Activity {
        PositionWire => "position_wire",
        InsertWire => "insert_wire",
        InsertScrew => "insert_screw",
    }
);

label_enum!(
    /// Standard C-arm views. Obliques and teardrops are named by image side,
    /// not by the affected patient side.
    ViewName {
        Ap => "ap",
        Lateral => "lateral",
        Inlet => "inlet",
        Outlet => "outlet",
        ObliqueLeft => "oblique_left",
        ObliqueRight => "oblique_right",
        TeardropLeft => "teardrop_left",
        TeardropRight => "teardrop_right",
    }
);

label_enum!(
    FrameValue {
        Hunting => "hunting",
        Assessment => "assessment",
    }
);

impl CorridorId {
    pub fn is_ramus(self) -> bool {
        matches!(self, CorridorId::RamusLeft | CorridorId::RamusRight)
    }

    pub fn is_left(self) -> bool {
        self.index() % 2 == 0
    }
}

impl Activity {
    /// Position of the activity in the allowed within-corridor order.
    pub fn rank(self) -> usize {
        self.index()
    }
}

/// Total width of the one-hot label vector.
pub const LABEL_DIM: usize =
    CorridorId::COUNT + Activity::COUNT + ViewName::COUNT + FrameValue::COUNT;

const ACTIVITY_OFFSET: usize = CorridorId::COUNT;
const VIEW_OFFSET: usize = ACTIVITY_OFFSET + Activity::COUNT;
const FRAME_OFFSET: usize = VIEW_OFFSET + ViewName::COUNT;

/// Label groups in slot order, as `(name, offset, width)`.
pub const LABEL_GROUPS: [(&str, usize, usize); 4] = [
    ("corridor", 0, CorridorId::COUNT),
    ("activity", ACTIVITY_OFFSET, Activity::COUNT),
    ("view", VIEW_OFFSET, ViewName::COUNT),
    ("frame_value", FRAME_OFFSET, FrameValue::COUNT),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PhaseLabels {
    pub corridor: CorridorId,
    pub activity: Activity,
    pub view: ViewName,
    pub frame_value: FrameValue,
}

impl PhaseLabels {
    pub fn to_vector(&self) -> [u8; LABEL_DIM] {
        let mut out = [0u8; LABEL_DIM];
        out[self.corridor.index()] = 1;
        out[ACTIVITY_OFFSET + self.activity.index()] = 1;
        out[VIEW_OFFSET + self.view.index()] = 1;
        out[FRAME_OFFSET + self.frame_value.index()] = 1;
        out
    }

    /// Decodes a label vector, requiring exactly one set slot per group.
    pub fn from_vector(vector: &[u8]) -> Result<Self, DatasetError> {
        if vector.len() != LABEL_DIM {
            return Err(DatasetError::LabelVector(format!(
                "expected {LABEL_DIM} slots, found {}",
                vector.len()
            )));
        }
        let mut picks = [0usize; 4];
        for (g, (name, offset, width)) in LABEL_GROUPS.iter().enumerate() {
            let group = &vector[*offset..offset + width];
            if group.iter().any(|&s| s > 1) {
                return Err(DatasetError::LabelVector(format!(
                    "{name} group has non-binary slots"
                )));
            }
            let set: Vec<usize> = (0..*width).filter(|&i| group[i] == 1).collect();
            if set.len() != 1 {
                return Err(DatasetError::LabelVector(format!(
                    "{name} group has {} active slots",
                    set.len()
                )));
            }
            picks[g] = set[0];
        }
        Ok(PhaseLabels {
            corridor: CorridorId::from_index(picks[0]).unwrap(),
            activity: Activity::from_index(picks[1]).unwrap(),
            view: ViewName::from_index(picks[2]).unwrap(),
            frame_value: FrameValue::from_index(picks[3]).unwrap(),
        })
    }
}

/// The spatial annotation channels an image encoder would be supervised
/// with: 7 anatomy masks, 8 corridor masks, 2 tool masks and 16 landmark
/// heatmaps.
pub const ANNOTATION_CHANNELS: [&str; 33] = [
    "hip_left",
    "hip_right",
    "femur_left",
    "femur_right",
    "sacrum",
    "vertebra_l5",
    "pelvis",
    "corridor_ramus_left",
    "corridor_ramus_right",
    "corridor_teardrop_left",
    "corridor_teardrop_right",
    "corridor_s1_left",
    "corridor_s1_right",
    "corridor_s2_left",
    "corridor_s2_right",
    "wires",
    "screws",
    "landmark_asis_left",
    "landmark_asis_right",
    "landmark_pubic_tubercle_left",
    "landmark_pubic_tubercle_right",
    "landmark_aiis_left",
    "landmark_aiis_right",
    "landmark_iliopectineal_eminence_left",
    "landmark_iliopectineal_eminence_right",
    "landmark_ischial_spine_left",
    "landmark_ischial_spine_right",
    "landmark_greater_sciatic_notch_left",
    "landmark_greater_sciatic_notch_right",
    "landmark_obturator_foramen_left",
    "landmark_obturator_foramen_right",
    "landmark_pubic_symphysis",
    "landmark_sacral_promontory",
];
