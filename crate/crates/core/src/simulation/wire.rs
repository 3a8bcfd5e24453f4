//! Wire-placement evaluation and repositioning.
//!
//! A placement is judged by how it *appears* in the current shot against the
//! target corridor, modeled as a cylinder. Shots whose principal ray lies
//! within a threshold of the corridor axis are down-the-barrel: the corridor
//! projects to a disk and the wire must appear as a point inside it.
//! Otherwise the projected wire must be parallel to the projected corridor
//! and its tip must sit in the corridor silhouette.

use rand::Rng;

use super::state::{ResampleEvent, SequenceState, WireState};
use crate::anatomy::Corridor;
use crate::geometry::{
    angle_between, any_orthogonal, clamp, deg, rotate_about_axis, sample_in_sphere,
    sample_solid_angle, Point3, Projection, UnitVec3, Vec3,
};
use crate::rng::uniform;

/// Length of the wire segment used to measure its projected direction.
const DIRECTION_PROBE_MM: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WireViewMode {
    DownTheBarrel,
    Orthogonal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WireVerdict {
    pub mode: WireViewMode,
    /// Outcome of the geometric test alone.
    pub geometric_good: bool,
    /// Final outcome, after the false-positive draw.
    pub good: bool,
    /// Signed in-plane angle that rotates the projected wire onto the
    /// projected corridor (orthogonal shots only).
    pub theta_star_rad: Option<f64>,
}

/// Whether the half-line `origin + t * dir, t > 0` passes within `radius`
/// of the corridor axis at an axial position in `[-margin, length + margin]`.
pub fn ray_hits_cylinder(
    origin: &Point3,
    dir: &Vec3,
    corridor: &Corridor,
    radius: f64,
    margin: f64,
) -> bool {
    let axis = corridor.axis();
    let length = corridor.length();
    let w = origin - corridor.start;
    let s0 = w.dot(&axis);
    let ds = dir.dot(&axis);
    let w_perp = w - axis.into_inner() * s0;
    let d_perp = dir - axis.into_inner() * ds;

    // Radial interval: |w_perp + t d_perp|^2 <= radius^2.
    let a = d_perp.norm_squared();
    let b = 2.0 * w_perp.dot(&d_perp);
    let c = w_perp.norm_squared() - radius * radius;
    let (mut lo, mut hi) = if a < 1e-18 {
        if c > 0.0 {
            return false;
        }
        (f64::NEG_INFINITY, f64::INFINITY)
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            return false;
        }
        let sq = disc.sqrt();
        ((-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a))
    };

    // Axial interval: -margin <= s0 + t ds <= length + margin.
    let (smin, smax) = (-margin, length + margin);
    if ds.abs() < 1e-18 {
        if s0 < smin || s0 > smax {
            return false;
        }
    } else {
        let (t1, t2) = ((smin - s0) / ds, (smax - s0) / ds);
        lo = lo.max(t1.min(t2));
        hi = hi.min(t1.max(t2));
    }
    lo = lo.max(0.0);
    lo <= hi
}

/// Whether `point` appears inside the projected corridor in this shot.
fn appears_in_corridor(proj: &Projection, point: &Point3, corridor: &Corridor, radius: f64, margin: f64) -> bool {
    if proj.depth(point) <= 0.0 {
        return false;
    }
    let dir = point - proj.source();
    ray_hits_cylinder(proj.source(), &dir, corridor, radius, margin)
}

/// Signed in-plane angle from the projected wire to the projected corridor,
/// measured in image coordinates.
pub fn in_plane_angle(proj: &Projection, wire: &WireState, corridor: &Corridor) -> Option<f64> {
    let entry = wire.entry();
    let w0 = proj.project(&entry).ok()?;
    let w1 = proj
        .project(&(entry + wire.direction.into_inner() * DIRECTION_PROBE_MM))
        .ok()?;
    let c0 = proj.project(&corridor.start).ok()?;
    let c1 = proj.project(&corridor.end).ok()?;
    let w = w1 - w0;
    let c = c1 - c0;
    if w.norm() < 1e-9 || c.norm() < 1e-9 {
        return None;
    }
    let cross = w.x * c.y - w.y * c.x;
    Some(libm::atan2(cross, w.dot(&c)))
}

pub fn view_mode(proj: &Projection, corridor: &Corridor, barrel_threshold_rad: f64) -> WireViewMode {
    let a = angle_between(proj.ray(), &corridor.axis());
    if a.min(std::f64::consts::PI - a) <= barrel_threshold_rad {
        WireViewMode::DownTheBarrel
    } else {
        WireViewMode::Orthogonal
    }
}

/// Purely geometric verdict for a wire in the current shot.
pub fn geometric_wire_check(
    state: &SequenceState,
    wire: &WireState,
    proj: &Projection,
) -> (WireViewMode, bool, Option<f64>) {
    let cfg = &state.config.wire;
    let corridor = state.target();
    let radius = (corridor.radius_mm - cfg.diameter_mm / 2.0).max(0.0);
    let margin = cfg.entry_margin_mm;
    let entry = wire.entry();
    match view_mode(proj, corridor, deg(cfg.barrel_threshold_deg)) {
        WireViewMode::DownTheBarrel => {
            let probe = entry + wire.direction.into_inner() * cfg.barrel_probe_mm;
            let good = appears_in_corridor(proj, &entry, corridor, radius, margin)
                && appears_in_corridor(proj, &probe, corridor, radius, margin);
            (WireViewMode::DownTheBarrel, good, None)
        }
        WireViewMode::Orthogonal => {
            let theta = in_plane_angle(proj, wire, corridor);
            let aligned = theta.is_some_and(|t| t.abs() <= deg(cfg.align_tolerance_deg));
            let good = aligned && appears_in_corridor(proj, &entry, corridor, radius, margin);
            // Degenerate projections (wire pointing at the source) count as
            // maximally misaligned.
            (WireViewMode::Orthogonal, good, Some(theta.unwrap_or(std::f64::consts::FRAC_PI_2)))
        }
    }
}

/// False-positive probability: the base rate, decaying linearly to zero as
/// the wire reaches full depth.
pub fn false_positive_probability(base: f64, wire: &WireState) -> f64 {
    (base * (1.0 - wire.depth_fraction())).clamp(0.0, 1.0)
}

pub fn evaluate_wire<R: Rng + ?Sized>(
    rng: &mut R,
    state: &SequenceState,
    wire: &WireState,
    proj: &Projection,
) -> WireVerdict {
    let (mode, geometric_good, theta_star_rad) = geometric_wire_check(state, wire, proj);
    let good = geometric_good || {
        let p = false_positive_probability(state.config.wire.false_positive_base, wire);
        p > 0.0 && rng.gen::<f64>() < p
    };
    WireVerdict {
        mode,
        geometric_good,
        good,
        theta_star_rad,
    }
}

/// Repositions a wire judged bad.
///
/// Orthogonal shots only change what the shot can show: the tip moves within
/// a small ball around itself, the wire turns about the principal ray to
/// cancel the in-plane error up to a random residual, and a minor
/// out-of-plane tilt is added. Barrel shots pull the wire toward the
/// corridor entry and axis in 3D.
pub fn sample_wire<R: Rng + ?Sized>(
    rng: &mut R,
    state: &mut SequenceState,
    wire: &WireState,
    proj: &Projection,
    verdict: &WireVerdict,
) -> WireState {
    let lambda = state.lambda_adj;
    let corridor = state.target().clone();
    let entry = corridor.start;
    let cfg = state.config.clone();
    let dist = (wire.tip - entry).norm();
    let mut next = wire.clone();
    match (verdict.mode, verdict.theta_star_rad) {
        (WireViewMode::Orthogonal, Some(theta_star)) => {
            let [tlo, thi] = cfg.tip_resample_clamp_mm;
            let tip_radius_mm = clamp(lambda * dist, tlo, thi);
            next.tip = sample_in_sphere(rng, &wire.tip, tip_radius_mm).expect("clamped radius");

            let magnitude = theta_star.abs();
            let [plo, phi] = cfg.in_plane_clamp_deg;
            let bound = clamp(lambda * magnitude, deg(plo), deg(phi));
            let in_plane_rad = uniform(rng, -bound, bound);
            let perp_bound = cfg.out_of_plane_fraction * magnitude;
            let out_of_plane_rad = uniform(rng, -perp_bound, perp_bound);

            let ray = proj.ray();
            let turned = rotate_about_axis(&wire.direction, ray, theta_star + in_plane_rad)
                .expect("unit ray");
            let tilt_axis = {
                let c = wire.direction.cross(ray);
                if c.norm() > 1e-9 {
                    UnitVec3::new_normalize(c)
                } else {
                    any_orthogonal(ray)
                }
            };
            let tilted = rotate_about_axis(&turned, &tilt_axis, out_of_plane_rad).expect("unit axis");
            next.direction = UnitVec3::new_normalize(tilted);
            state.record(ResampleEvent::WireOrthogonal {
                tip_radius_mm,
                in_plane_bound_rad: bound,
                in_plane_rad,
                out_of_plane_rad,
                theta_star_rad: theta_star,
            });
        }
        _ => {
            let [tlo, thi] = cfg.wire.barrel_tip_clamp_mm;
            let [alo, ahi] = cfg.wire.barrel_angle_clamp_deg;
            let axis = corridor.axis();
            let tip_radius_mm = clamp(lambda * dist, tlo, thi);
            let colatitude_rad = clamp(
                lambda * angle_between(&wire.direction, &axis),
                deg(alo),
                deg(ahi),
            );
            next.tip = sample_in_sphere(rng, &entry, tip_radius_mm).expect("clamped radius");
            next.direction = sample_solid_angle(rng, &axis, colatitude_rad).expect("clamped");
            state.record(ResampleEvent::WireBarrel {
                tip_radius_mm,
                colatitude_rad,
            });
        }
    }
    next.inserted_depth_mm = 0.0;
    next
}
