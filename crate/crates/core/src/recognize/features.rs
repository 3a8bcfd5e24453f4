//! Per-frame observations for the decoder, read off a record the way an
//! image model would see them: the beam direction relative to the
//! patient, where the active tool sits among the projected corridors, how
//! far it has gone in, and whether the target is centered.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::record::{FrameRecord, ToolKind, ToolRecord};
use crate::error::ConfigError;
use crate::geometry::{angle_between, any_orthogonal, deg, UnitVec3, Vec3};
use crate::labels::{CorridorId, ViewName};
use crate::rng::standard_normal;
use crate::simulation::SimConfig;

/// Number of points in the midpoint rule over the adjustment factor.
const FRACTION_STEPS: usize = 16;

/// Standard-view rays and tolerances in APP coordinates, plus the shape of
/// a fluoro-hunting move, used to guess which view a move was aimed at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpace {
    pub views: Vec<ViewProbe>,
    /// Range of the fraction of the angular error a move keeps.
    pub move_fraction: [f64; 2],
    /// Clamp on the cap a move lands in.
    pub move_cap_rad: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewProbe {
    pub name: ViewName,
    pub ray_app: [f64; 3],
    pub tolerance_rad: f64,
}

impl FeatureSpace {
    pub fn from_config(config: &SimConfig) -> Result<Self, ConfigError> {
        let table = config.view_table()?;
        let [lo, hi] = config.view_angle_clamp_deg;
        Ok(FeatureSpace {
            views: table
                .iter()
                .map(|s| ViewProbe {
                    name: s.name,
                    ray_app: [s.ideal_ray_app.x, s.ideal_ray_app.y, s.ideal_ray_app.z],
                    tolerance_rad: s.tolerance_rad,
                })
                .collect(),
            move_fraction: config.lambda_adj_range,
            move_cap_rad: [deg(lo), deg(hi)],
        })
    }

    /// Density, up to a constant, of moving from `before` to `after` when
    /// aiming at `target`: the new ray is uniform on a cap around the
    /// target whose size is a uniformly drawn fraction of the old error.
    fn move_likelihood(&self, before: &Vec3, after: &Vec3, target: &Vec3) -> f64 {
        let error = angle_between(before, target);
        let landed = angle_between(after, target);
        let [lo, hi] = self.move_fraction;
        (0..FRACTION_STEPS)
            .map(|i| {
                let fraction = lo + (hi - lo) * (i as f64 + 0.5) / FRACTION_STEPS as f64;
                let cap = (fraction * error).clamp(self.move_cap_rad[0], self.move_cap_rad[1]);
                if landed <= cap {
                    1.0 / (1.0 - libm::cos(cap))
                } else {
                    0.0
                }
            })
            .sum()
    }
}

impl Default for FeatureSpace {
    fn default() -> Self {
        FeatureSpace::from_config(&SimConfig::default()).expect("default config is valid")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameFeatures {
    /// Observed principal ray in APP coordinates, after noise.
    pub ray_app: [f64; 3],
    /// Angle between the true and the observed ray.
    pub view_residual_rad: f64,
    pub nearest_view: ViewName,
    /// Angle from the observed ray to the nearest standard view.
    pub view_angle_rad: f64,
    pub view_tolerance_rad: f64,
    /// Projected corridor that best matches the active tool and sits
    /// nearest the image center.
    pub nearest_corridor: Option<CorridorId>,
    /// Endpoint mismatch in pixels between the tool and that corridor.
    pub corridor_mismatch_px: Option<f64>,
    /// Image-plane angle between the active tool and that corridor.
    pub in_plane_angle_rad: Option<f64>,
    /// Distance of that corridor's projected midpoint from the image
    /// center, as a fraction of the centering limit.
    pub center_offset: Option<f64>,
    pub active_tool: Option<ToolKind>,
    pub depth_fraction: f64,
    pub wires: usize,
    pub screws: usize,
    /// The C-arm moved since the previous frame. Always false for a frame
    /// featurized on its own.
    pub pose_changed: bool,
    /// After a move, the standard view the move was most likely aimed at.
    pub approached_view: Option<ViewName>,
}

fn project(p: &[f64], x: &[f64; 3]) -> Option<[f64; 2]> {
    let h = |r: usize| p[4 * r] * x[0] + p[4 * r + 1] * x[1] + p[4 * r + 2] * x[2] + p[4 * r + 3];
    let w = h(2);
    (w > 0.0).then(|| [h(0) / w, h(1) / w])
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Endpoint mismatch between the projected tool and a projected corridor,
/// in whichever orientation fits better, plus how far the corridor's
/// midpoint sits from the image center. Views are centered on the
/// corridor being treated, so the second term breaks overlaps.
fn corridor_score(tool: ([f64; 2], [f64; 2]), a: [f64; 2], b: [f64; 2], center: [f64; 2]) -> (f64, f64) {
    let (e, f) = tool;
    let ends = (distance(e, a) + distance(f, b)).min(distance(e, b) + distance(f, a));
    (ends + distance([(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0], center), ends)
}

/// Rotates `ray` by an isotropic tangent Gaussian of scale `sigma`. The
/// rotation angle is then Rayleigh distributed with that scale.
fn perturb<R: Rng + ?Sized>(rng: &mut R, ray: &Vec3, sigma: f64) -> (Vec3, f64) {
    let g1 = sigma * standard_normal(rng);
    let g2 = sigma * standard_normal(rng);
    let m = (g1 * g1 + g2 * g2).sqrt();
    if m == 0.0 {
        return (*ray, 0.0);
    }
    let r = UnitVec3::new_normalize(*ray);
    let e1 = any_orthogonal(&r);
    let e2 = r.cross(&e1);
    let t = (e1.into_inner() * g1 + e2 * g2) / m;
    (r.into_inner() * libm::cos(m) + t * libm::sin(m), m)
}

/// Entry point and the point the tool reaches at full length.
fn tool_points(tool: &ToolRecord) -> ([f64; 3], [f64; 3]) {
    let entry = tool.entry();
    let end = std::array::from_fn(|i| entry[i] + tool.direction[i] * tool.length_mm);
    (entry, end)
}

/// Noise draws happen in a fixed order, so features are a function of the
/// record, the generator state and `sigma_rad`.
pub fn featurize<R: Rng + ?Sized>(
    record: &FrameRecord,
    space: &FeatureSpace,
    rng: &mut R,
    sigma_rad: f64,
) -> FrameFeatures {
    let (ray, view_residual_rad) = perturb(rng, &Vec3::from(record.view.ray_app), sigma_rad);
    let in_plane_noise = sigma_rad * standard_normal(rng);

    let (nearest, view_angle_rad) = space
        .views
        .iter()
        .map(|v| (v, angle_between(&ray, &Vec3::from(v.ray_app))))
        .fold(None, |best: Option<(&ViewProbe, f64)>, (v, a)| match best {
            Some((_, b)) if b <= a => best,
            _ => Some((v, a)),
        })
        .expect("feature space has views");

    let p = &record.camera.projection;
    let tool = record.tools.last();
    let mut nearest_corridor = None;
    let mut corridor_mismatch_px = None;
    let mut in_plane_angle_rad = None;
    let mut center_offset = None;
    let (hh, ww) = (record.camera.image_height_px as f64, record.camera.image_width_px as f64);
    let center = [ww / 2.0, hh / 2.0];
    if let Some(tool) = tool {
        let (entry, end) = tool_points(tool);
        if let (Some(e), Some(q)) = (project(p, &entry), project(p, &end)) {
            let best = record
                .corridors_2d
                .iter()
                .filter_map(|c| Some((c.id, c.start?, c.end?)))
                .map(|(id, a, b)| (id, a, b, corridor_score((e, q), a, b, center)))
                .fold(None, |best: Option<(CorridorId, [f64; 2], [f64; 2], (f64, f64))>, cand| {
                    match best {
                        Some(b) if b.3 .0 <= cand.3 .0 => Some(b),
                        _ => Some(cand),
                    }
                });
            if let Some((id, a, b, (_, ends))) = best {
                nearest_corridor = Some(id);
                corridor_mismatch_px = Some(ends);
                let w = [q[0] - e[0], q[1] - e[1]];
                let c = [b[0] - a[0], b[1] - a[1]];
                let cross = w[0] * c[1] - w[1] * c[0];
                let dot = w[0] * c[0] + w[1] * c[1];
                if cross != 0.0 || dot != 0.0 {
                    // Corridors are unoriented here: fold into [-90, 90].
                    let mut t = libm::atan2(cross, dot);
                    if t > std::f64::consts::FRAC_PI_2 {
                        t -= std::f64::consts::PI;
                    } else if t < -std::f64::consts::FRAC_PI_2 {
                        t += std::f64::consts::PI;
                    }
                    in_plane_angle_rad = Some(t + in_plane_noise);
                }
                let mid = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
                let limit = 2.0 * hh.min(ww) / 5.0;
                center_offset = Some(distance(mid, center) / limit);
            }
        }
    }
    let (wires, screws) = record.tool_counts();
    FrameFeatures {
        ray_app: [ray.x, ray.y, ray.z],
        view_residual_rad,
        nearest_view: nearest.name,
        view_angle_rad,
        view_tolerance_rad: nearest.tolerance_rad,
        nearest_corridor,
        corridor_mismatch_px,
        in_plane_angle_rad,
        center_offset,
        active_tool: tool.map(|t| t.kind),
        depth_fraction: tool.map_or(0.0, |t| t.inserted_depth_mm / t.length_mm),
        wires,
        screws,
        pose_changed: false,
        approached_view: None,
    }
}

pub fn featurize_sequence<R: Rng + ?Sized>(
    records: &[FrameRecord],
    space: &FeatureSpace,
    rng: &mut R,
    sigma_rad: f64,
) -> Vec<FrameFeatures> {
    let mut out: Vec<FrameFeatures> = records.iter().map(|r| featurize(r, space, rng, sigma_rad)).collect();
    for i in 1..out.len() {
        if records[i].camera.projection == records[i - 1].camera.projection {
            continue;
        }
        let (before, after) = (Vec3::from(out[i - 1].ray_app), Vec3::from(out[i].ray_app));
        out[i].pose_changed = true;
        out[i].approached_view = space
            .views
            .iter()
            .map(|v| (v.name, space.move_likelihood(&before, &after, &Vec3::from(v.ray_app))))
            .fold(None, |best: Option<(ViewName, f64)>, (v, l)| match best {
                Some((_, b)) if b >= l => best,
                _ => Some((v, l)),
            })
            .filter(|&(_, l)| l > 0.0)
            .map(|(v, _)| v);
    }
    out
}
