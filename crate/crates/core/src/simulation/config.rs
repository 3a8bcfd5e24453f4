//! Simulation parameters. Every key has a default; the TOML document may
//! override any subset. Angles are given in degrees here and converted to
//! radians by the accessors.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::anatomy::{resolve_oblique, PelvisParams, ViewSpec, ViewTable};
use crate::error::ConfigError;
use crate::geometry::{deg, UnitVec3, Vec3};
use crate::labels::{CorridorId, ViewName};

const PROBABILITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub lambda_adj_range: [f64; 2],
    pub max_frames: usize,
    pub sensor_width_range_mm: [f64; 2],
    pub source_detector_range_mm: [f64; 2],
    /// `[height, width]`.
    pub image_size_px: [u32; 2],
    /// Source-to-viewpoint distance as a fraction of source-to-detector.
    pub source_viewpoint_fraction: [f64; 2],
    pub initial_tip_jitter_mm: f64,
    pub initial_direction_jitter_deg: f64,
    pub view_position_clamp_mm: [f64; 2],
    pub view_angle_clamp_deg: [f64; 2],
    pub tip_resample_clamp_mm: [f64; 2],
    pub in_plane_clamp_deg: [f64; 2],
    pub out_of_plane_fraction: f64,
    /// Inclusive range for the number of corridors treated per sequence.
    pub corridors_per_sequence: [usize; 2],
    pub retrograde_probability: f64,
    /// Upper bound on wires, and separately on screws, per sequence.
    pub max_instances: usize,
    pub insertion_step_mm: [f64; 2],
    pub wire: WireConfig,
    pub screw: ScrewConfig,
    pub transitions: TransitionConfig,
    /// Per-view overrides; views not listed keep their defaults.
    #[serde(deserialize_with = "merge_views")]
    pub views: BTreeMap<ViewName, ViewOverride>,
    /// Per-corridor rows; a listed row replaces that corridor's default row.
    #[serde(deserialize_with = "merge_view_tables")]
    pub view_tables: BTreeMap<CorridorId, BTreeMap<ViewName, f64>>,
    pub anatomy: PelvisParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WireConfig {
    pub diameter_mm: f64,
    /// False-positive probability for an uninserted wire; decays linearly
    /// to zero at full insertion.
    pub false_positive_base: f64,
    /// Ray-to-corridor angle below which a view counts as down-the-barrel.
    pub barrel_threshold_deg: f64,
    /// In-plane alignment tolerance for orthogonal views.
    pub align_tolerance_deg: f64,
    /// Distance along the wire of the second probe point in barrel views.
    pub barrel_probe_mm: f64,
    /// Axial slack beyond the corridor ends for the silhouette test.
    pub entry_margin_mm: f64,
    pub barrel_tip_clamp_mm: [f64; 2],
    pub barrel_angle_clamp_deg: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScrewConfig {
    pub length_range_mm: [f64; 2],
    pub thread_mm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransitionConfig {
    pub after_good_wire: AfterGoodWire,
    pub after_wire_inserted: AfterWireInserted,
    /// Per insertion frame, chance of moving to a different view.
    pub insertion_view_change: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AfterGoodWire {
    pub position_wire: f64,
    pub insert_wire: f64,
    pub insert_screw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AfterWireInserted {
    pub insert_screw: f64,
    pub next_corridor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViewOverride {
    /// Ideal principal ray in APP coordinates; normalized on load.
    pub ray: [f64; 3],
    pub tolerance_deg: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        let table = ViewTable::default();
        let views = table
            .iter()
            .map(|s| {
                let r = s.ideal_ray_app;
                (
                    s.name,
                    ViewOverride {
                        ray: [r.x, r.y, r.z],
                        tolerance_deg: s.tolerance_rad.to_degrees(),
                    },
                )
            })
            .collect();
        SimConfig {
            lambda_adj_range: [0.6, 0.8],
            max_frames: 1000,
            sensor_width_range_mm: [300.0, 400.0],
            source_detector_range_mm: [900.0, 1200.0],
            image_size_px: [384, 384],
            source_viewpoint_fraction: [0.65, 0.75],
            initial_tip_jitter_mm: 5.0,
            initial_direction_jitter_deg: 15.0,
            view_position_clamp_mm: [5.0, 100.0],
            view_angle_clamp_deg: [1.0, 45.0],
            tip_resample_clamp_mm: [5.0, 10.0],
            in_plane_clamp_deg: [3.0, 10.0],
            out_of_plane_fraction: 0.1,
            corridors_per_sequence: [2, 5],
            retrograde_probability: 0.5,
            max_instances: 8,
            insertion_step_mm: [5.0, 25.0],
            wire: WireConfig::default(),
            screw: ScrewConfig::default(),
            transitions: TransitionConfig::default(),
            views,
            view_tables: default_view_tables(),
            anatomy: PelvisParams::default(),
        }
    }
}

impl Default for WireConfig {
    fn default() -> Self {
        WireConfig {
            diameter_mm: 2.0,
            false_positive_base: 0.05,
            barrel_threshold_deg: 15.0,
            align_tolerance_deg: 5.0,
            barrel_probe_mm: 50.0,
            entry_margin_mm: 10.0,
            barrel_tip_clamp_mm: [1.0, 10.0],
            barrel_angle_clamp_deg: [1.0, 10.0],
        }
    }
}

impl Default for ScrewConfig {
    fn default() -> Self {
        ScrewConfig {
            length_range_mm: [30.0, 130.0],
            thread_mm: 16.0,
        }
    }
}

impl Default for TransitionConfig {
    fn default() -> Self {
        TransitionConfig {
            after_good_wire: AfterGoodWire {
                position_wire: 0.4,
                insert_wire: 0.6,
                insert_screw: 0.0,
            },
            after_wire_inserted: AfterWireInserted {
                insert_screw: 1.0,
                next_corridor: 0.0,
            },
            insertion_view_change: 0.2,
        }
    }
}

fn merge_views<'de, D: serde::Deserializer<'de>>(
    d: D,
) -> Result<BTreeMap<ViewName, ViewOverride>, D::Error> {
    let mut views = SimConfig::default().views;
    views.extend(BTreeMap::<ViewName, ViewOverride>::deserialize(d)?);
    Ok(views)
}

fn merge_view_tables<'de, D: serde::Deserializer<'de>>(
    d: D,
) -> Result<BTreeMap<CorridorId, BTreeMap<ViewName, f64>>, D::Error> {
    let mut tables = default_view_tables();
    tables.extend(BTreeMap::<CorridorId, BTreeMap<ViewName, f64>>::deserialize(d)?);
    Ok(tables)
}

/// Per-corridor desired-view distributions. Ramus corridors put most mass
/// on the inlet and on whichever oblique acts as the obturator oblique.
pub fn default_view_tables() -> BTreeMap<CorridorId, BTreeMap<ViewName, f64>> {
    use ViewName::*;
    let mut tables = BTreeMap::new();
    for &id in CorridorId::ALL {
        let row: Vec<(ViewName, f64)> = match id {
            CorridorId::RamusLeft | CorridorId::RamusRight => {
                let obturator = resolve_oblique(id).expect("ramus");
                let iliac = if obturator == ObliqueLeft { ObliqueRight } else { ObliqueLeft };
                vec![(Inlet, 0.4), (obturator, 0.4), (Ap, 0.08), (Outlet, 0.06), (iliac, 0.06)]
            }
            CorridorId::TeardropLeft => vec![
                (TeardropLeft, 0.5),
                (ObliqueLeft, 0.25),
                (Ap, 0.1),
                (Inlet, 0.075),
                (Outlet, 0.075),
            ],
            CorridorId::TeardropRight => vec![
                (TeardropRight, 0.5),
                (ObliqueRight, 0.25),
                (Ap, 0.1),
                (Inlet, 0.075),
                (Outlet, 0.075),
            ],
            _ => vec![(Lateral, 0.3), (Inlet, 0.3), (Outlet, 0.3), (Ap, 0.1)],
        };
        tables.insert(id, row.into_iter().collect());
    }
    tables
}

fn check_range(name: &str, r: [f64; 2]) -> Result<(), ConfigError> {
    if !(r[0].is_finite() && r[1].is_finite() && r[0] <= r[1]) {
        return Err(ConfigError::Invalid(format!(
            "{name} = [{}, {}] is not an ordered finite range",
            r[0], r[1]
        )));
    }
    Ok(())
}

fn check_probability(name: &str, p: f64) -> Result<(), ConfigError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(ConfigError::Invalid(format!("{name} = {p} is not a probability")));
    }
    Ok(())
}

fn check_row(name: &str, row: &[f64]) -> Result<(), ConfigError> {
    for &p in row {
        check_probability(name, p)?;
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > PROBABILITY_TOLERANCE {
        return Err(ConfigError::Invalid(format!("{name} sums to {sum}, not 1")));
    }
    Ok(())
}

impl SimConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let config: SimConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
            line: e.span().map(|s| text[..s.start].matches('\n').count() + 1),
            message: e.to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, r) in [
            ("lambda_adj_range", self.lambda_adj_range),
            ("sensor_width_range_mm", self.sensor_width_range_mm),
            ("source_detector_range_mm", self.source_detector_range_mm),
            ("source_viewpoint_fraction", self.source_viewpoint_fraction),
            ("view_position_clamp_mm", self.view_position_clamp_mm),
            ("view_angle_clamp_deg", self.view_angle_clamp_deg),
            ("tip_resample_clamp_mm", self.tip_resample_clamp_mm),
            ("in_plane_clamp_deg", self.in_plane_clamp_deg),
            ("insertion_step_mm", self.insertion_step_mm),
            ("wire.barrel_tip_clamp_mm", self.wire.barrel_tip_clamp_mm),
            ("wire.barrel_angle_clamp_deg", self.wire.barrel_angle_clamp_deg),
            ("screw.length_range_mm", self.screw.length_range_mm),
        ] {
            check_range(name, r)?;
        }
        if !(self.lambda_adj_range[0] >= 0.0 && self.lambda_adj_range[1] <= 1.0) {
            return Err(ConfigError::Invalid("lambda_adj_range must lie in [0, 1]".into()));
        }
        if self.sensor_width_range_mm[0] <= 0.0 || self.source_detector_range_mm[0] <= 0.0 {
            return Err(ConfigError::Invalid("camera ranges must be positive".into()));
        }
        if self.source_viewpoint_fraction[0] <= 0.0 || self.source_viewpoint_fraction[1] >= 1.0 {
            return Err(ConfigError::Invalid(
                "source_viewpoint_fraction must lie in (0, 1)".into(),
            ));
        }
        if self.image_size_px.contains(&0) {
            return Err(ConfigError::Invalid("image_size_px must be positive".into()));
        }
        if self.max_frames == 0 {
            return Err(ConfigError::Invalid("max_frames must be at least 1".into()));
        }
        if self.view_angle_clamp_deg[0] < 0.0 || self.view_angle_clamp_deg[1] > 180.0 {
            return Err(ConfigError::Invalid("view_angle_clamp_deg must lie in [0, 180]".into()));
        }
        if self.view_position_clamp_mm[0] < 0.0 || self.tip_resample_clamp_mm[0] < 0.0 {
            return Err(ConfigError::Invalid("clamp radii must be non-negative".into()));
        }
        if self.insertion_step_mm[0] <= 0.0 {
            return Err(ConfigError::Invalid("insertion_step_mm must be positive".into()));
        }
        if self.screw.length_range_mm[0] <= 0.0 {
            return Err(ConfigError::Invalid("screw lengths must be positive".into()));
        }
        let [kmin, kmax] = self.corridors_per_sequence;
        if kmin > kmax || kmax > CorridorId::COUNT || kmax > self.max_instances {
            return Err(ConfigError::Invalid(format!(
                "corridors_per_sequence = [{kmin}, {kmax}] must be ordered and at most min(8, max_instances)"
            )));
        }
        if self.wire.diameter_mm <= 0.0 {
            return Err(ConfigError::Invalid("wire.diameter_mm must be positive".into()));
        }
        check_probability("retrograde_probability", self.retrograde_probability)?;
        check_probability("wire.false_positive_base", self.wire.false_positive_base)?;
        check_probability(
            "transitions.insertion_view_change",
            self.transitions.insertion_view_change,
        )?;
        let g = &self.transitions.after_good_wire;
        check_row(
            "transitions.after_good_wire",
            &[g.position_wire, g.insert_wire, g.insert_screw],
        )?;
        let w = &self.transitions.after_wire_inserted;
        check_row("transitions.after_wire_inserted", &[w.insert_screw, w.next_corridor])?;
        for &id in CorridorId::ALL {
            let row = self.view_tables.get(&id).ok_or_else(|| {
                ConfigError::Invalid(format!("view_tables is missing corridor {id}"))
            })?;
            let probs: Vec<f64> = row.values().copied().collect();
            check_row(&format!("view_tables.{id}"), &probs)?;
        }
        self.view_table()?;
        Ok(())
    }

    pub fn view_table(&self) -> Result<ViewTable, ConfigError> {
        let mut specs = Vec::with_capacity(ViewName::COUNT);
        for &name in ViewName::ALL {
            let o = self
                .views
                .get(&name)
                .ok_or_else(|| ConfigError::Invalid(format!("views is missing {name}")))?;
            let ray = Vec3::from(o.ray);
            if !(ray.norm() > 1e-9) {
                return Err(ConfigError::Invalid(format!("views.{name}.ray is zero")));
            }
            specs.push(ViewSpec {
                name,
                ideal_ray_app: UnitVec3::new_normalize(ray),
                tolerance_rad: deg(o.tolerance_deg),
            });
        }
        let specs: [ViewSpec; ViewName::COUNT] = specs.try_into().expect("eight views");
        ViewTable::new(specs).map_err(ConfigError::Invalid)
    }

    /// Desired-view distribution for a corridor, in `ViewName` order.
    pub fn view_distribution(&self, corridor: CorridorId) -> [f64; ViewName::COUNT] {
        let mut out = [0.0; ViewName::COUNT];
        if let Some(row) = self.view_tables.get(&corridor) {
            for (v, p) in row {
                out[v.index()] = *p;
            }
        }
        out
    }

    pub fn max_frames(&self) -> usize {
        self.max_frames
    }
}
