//! Desired-view selection, view evaluation and fluoro-hunting resampling.

use rand::Rng;

use super::state::{CArmView, DesiredView, ResampleEvent, SequenceState};
use crate::anatomy::{ideal_view, ViewSpec};
use crate::error::GeometryError;
use crate::geometry::{angle_between, clamp, deg, sample_in_sphere, sample_solid_angle, Projection};
use crate::labels::ViewName;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ViewRejection {
    Misaligned,
    OffCenter,
    /// The desired viewing point has no image in the current shot.
    BehindSource { depth: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViewVerdict {
    pub angle_error_rad: f64,
    /// Distance of the projected viewing point from the image center.
    pub center_offset_px: Option<f64>,
    pub rejection: Option<ViewRejection>,
}

impl ViewVerdict {
    pub fn accepted(&self) -> bool {
        self.rejection.is_none()
    }
}

/// `offset < (2/5) min(H, W)`, strictly.
pub fn is_centered(offset_px: f64, height_px: u32, width_px: u32) -> bool {
    let limit = 2.0 * height_px.min(width_px) as f64 / 5.0;
    offset_px < limit
}

/// Accepts a shot when its ray is within the view tolerance of the ideal
/// ray and the ideal viewing point projects near the image center.
pub fn evaluate_view(projection: &Projection, desired: &DesiredView) -> ViewVerdict {
    let angle_error_rad = angle_between(projection.ray(), &desired.ray);
    let camera = projection.camera();
    let (center_offset_px, centered) = match projection.project(&desired.viewpoint) {
        Ok(px) => {
            let offset = (px - camera.principal_point_px()).norm();
            (
                Some(offset),
                Ok(is_centered(offset, camera.image_height_px, camera.image_width_px)),
            )
        }
        Err(GeometryError::BehindSource { depth }) => (None, Err(depth)),
        Err(_) => unreachable!("projection only fails behind the source"),
    };
    let rejection = match centered {
        Err(depth) => Some(ViewRejection::BehindSource { depth }),
        Ok(_) if angle_error_rad > desired.tolerance_rad => Some(ViewRejection::Misaligned),
        Ok(false) => Some(ViewRejection::OffCenter),
        Ok(true) => None,
    };
    ViewVerdict {
        angle_error_rad,
        center_offset_px,
        rejection,
    }
}

/// Draws a standard view from the active corridor's distribution.
pub fn sample_desired_view<R: Rng + ?Sized>(rng: &mut R, state: &SequenceState) -> ViewSpec {
    sample_desired_view_excluding(rng, state, None)
}

/// As [`sample_desired_view`], but never returns `exclude` unless it is the
/// only view with mass.
pub fn sample_desired_view_excluding<R: Rng + ?Sized>(
    rng: &mut R,
    state: &SequenceState,
    exclude: Option<ViewName>,
) -> ViewSpec {
    let corridor = state.target().id;
    let mut weights = state.config.view_distribution(corridor);
    if let Some(v) = exclude {
        let others: f64 = weights
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != v.index())
            .map(|(_, w)| w)
            .sum();
        if others > 0.0 {
            weights[v.index()] = 0.0;
        }
    }
    let name = ViewName::ALL[sample_index(rng, &weights)];
    *state.views.get(name)
}

/// Categorical draw; weights need not be normalized.
pub fn sample_index<R: Rng + ?Sized>(rng: &mut R, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        last = i;
        if u < w {
            return i;
        }
        u -= w;
    }
    last
}

pub fn desired_view(state: &SequenceState, spec: &ViewSpec) -> DesiredView {
    let (viewpoint, ray) = ideal_view(spec, state.target(), &state.anatomy.app_frame);
    DesiredView {
        name: spec.name,
        tolerance_rad: spec.tolerance_rad,
        viewpoint,
        ray,
    }
}

/// Fluoro-hunting step: a new pose drawn uniformly around the ideal one,
/// in a window that is the current error scaled by the adjustment factor
/// and clamped.
pub fn sample_view<R: Rng + ?Sized>(
    rng: &mut R,
    state: &mut SequenceState,
    desired: &DesiredView,
) -> CArmView {
    let c = &state.config;
    let distance = (desired.viewpoint - state.view.viewpoint).norm();
    let angle = angle_between(&desired.ray, &state.view.ray);
    let [plo, phi] = c.view_position_clamp_mm;
    let [alo, ahi] = c.view_angle_clamp_deg;
    let radius_mm = clamp(state.lambda_adj * distance, plo, phi);
    let colatitude_rad = clamp(state.lambda_adj * angle, deg(alo), deg(ahi));
    let view = CArmView {
        viewpoint: sample_in_sphere(rng, &desired.viewpoint, radius_mm).expect("clamped radius"),
        ray: sample_solid_angle(rng, &desired.ray, colatitude_rad).expect("clamped colatitude"),
    };
    state.record(ResampleEvent::View {
        radius_mm,
        colatitude_rad,
    });
    view
}

/// Runs the hunting loop from the current pose until the desired view is
/// accepted. Returns the number of resamples, or `None` past `max_iterations`.
pub fn hunt<R: Rng + ?Sized>(
    rng: &mut R,
    state: &mut SequenceState,
    desired: &DesiredView,
    max_iterations: usize,
) -> Option<usize> {
    for i in 0..=max_iterations {
        if evaluate_view(&state.projection(), desired).accepted() {
            return Some(i);
        }
        if i < max_iterations {
            state.view = sample_view(rng, state, desired);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point3;
    use crate::simulation::fixture;
    use crate::simulation::SimConfig;

    fn aligned(state: &mut SequenceState) -> DesiredView {
        let spec = *state.views.get(ViewName::Ap);
        let d = desired_view(state, &spec);
        state.view = CArmView {
            viewpoint: d.viewpoint,
            ray: d.ray,
        };
        d
    }

    #[test]
    fn perfect_view_accepted() {
        let (_, mut state) = fixture::state(1);
        let d = aligned(&mut state);
        let v = evaluate_view(&state.projection(), &d);
        assert!(v.accepted());
        assert!(v.center_offset_px.unwrap() < 1e-9);
    }

    #[test]
    fn one_degree_past_tolerance_rejected() {
        let (_, mut state) = fixture::state(1);
        let d = aligned(&mut state);
        let axis = crate::geometry::any_orthogonal(&d.ray);
        let tilted = crate::geometry::rotate_about_axis(&d.ray, &axis, d.tolerance_rad + deg(1.0)).unwrap();
        state.view.ray = crate::geometry::UnitVec3::new_normalize(tilted);
        let v = evaluate_view(&state.projection(), &d);
        assert_eq!(v.rejection, Some(ViewRejection::Misaligned));
        let inside = crate::geometry::rotate_about_axis(&d.ray, &axis, d.tolerance_rad - deg(0.1)).unwrap();
        state.view.ray = crate::geometry::UnitVec3::new_normalize(inside);
        assert!(evaluate_view(&state.projection(), &d).accepted());
    }

    #[test]
    fn centering_limit_is_strict() {
        // Two fifths of 384 pixels.
        assert!(!is_centered(153.6, 384, 384));
        assert!(is_centered(153.6 - 1e-9, 384, 384));
        assert!(!is_centered(200.0, 384, 512));
    }

    #[test]
    fn centering_boundary_through_projection() {
        let (_, mut state) = fixture::state(2);
        let d = aligned(&mut state);
        let proj = state.projection();
        let cam = *proj.camera();
        // Similar triangles: a lateral offset at the viewpoint depth scales by
        // source-to-detector over source-to-viewpoint, then by pixels per mm.
        let px_per_mm = cam.source_detector_mm / state.source_viewpoint_mm * cam.image_width_px as f64
            / cam.sensor_width_mm;
        let (u_axis, _) = proj.image_axes();
        for (target, accepted) in [(153.6 - 1e-6, true), (153.6 + 1e-6, false)] {
            let mut moved = d;
            moved.viewpoint = d.viewpoint + u_axis * (target / px_per_mm);
            let v = evaluate_view(&proj, &moved);
            assert!((v.center_offset_px.unwrap() - target).abs() < 1e-7);
            assert_eq!(v.accepted(), accepted, "offset {target}");
        }
    }

    #[test]
    fn viewpoint_behind_source_rejected() {
        let (_, mut state) = fixture::state(3);
        let mut d = aligned(&mut state);
        d.viewpoint = state.projection().source() - d.ray.into_inner() * 10.0;
        let v = evaluate_view(&state.projection(), &d);
        assert!(matches!(v.rejection, Some(ViewRejection::BehindSource { .. })));
    }

    #[test]
    fn view_window_clamps() {
        let (mut rng, mut state) = fixture::state(4);
        let d = aligned(&mut state);
        state.lambda_adj = 0.7;
        state.tracing = true;
        state.view.viewpoint = d.viewpoint + Point3::new(200.0, 0.0, 0.0).coords;
        sample_view(&mut rng, &mut state, &d);
        let axis = crate::geometry::any_orthogonal(&d.ray);
        state.view.viewpoint = d.viewpoint;
        state.view.ray = crate::geometry::UnitVec3::new_normalize(
            crate::geometry::rotate_about_axis(&d.ray, &axis, deg(0.5)).unwrap(),
        );
        sample_view(&mut rng, &mut state, &d);
        match state.trace[..] {
            [ResampleEvent::View { radius_mm: r0, .. }, ResampleEvent::View { radius_mm: r1, colatitude_rad: c1 }] => {
                assert_eq!(r0, 100.0);
                assert_eq!(r1, 5.0);
                assert!((c1 - deg(1.0)).abs() < 1e-15);
            }
            _ => panic!("unexpected trace {:?}", state.trace),
        }
    }

    #[test]
    fn hunting_window_shrinks_when_unclamped() {
        let mut config = SimConfig::default();
        config.view_position_clamp_mm = [0.0, 1e9];
        let (mut rng, mut state) = fixture::state_with(5, config);
        let d = aligned(&mut state);
        state.lambda_adj = 0.7;
        let before = 50.0;
        let n = 20_000;
        let mut total = 0.0;
        for _ in 0..n {
            state.view.viewpoint = d.viewpoint + crate::geometry::Vec3::new(0.0, 0.0, before);
            let v = sample_view(&mut rng, &mut state, &d);
            total += (v.viewpoint - d.viewpoint).norm();
        }
        let mean = total / n as f64;
        // Uniform ball of radius 0.7 * 50 has mean radius 3/4 of that.
        assert!((mean - 0.75 * 0.7 * before).abs() < 0.01 * 0.75 * 0.7 * before, "{mean}");
        assert!(mean < before);
    }

    #[test]
    fn desired_view_frequencies_follow_table() {
        let (mut rng, state) = fixture::state(6);
        let table = state.config.view_distribution(state.target().id);
        let n = 100_000;
        let mut counts = [0usize; ViewName::COUNT];
        for _ in 0..n {
            counts[sample_desired_view(&mut rng, &state).name.index()] += 1;
        }
        for (c, p) in counts.iter().zip(table) {
            assert!((*c as f64 / n as f64 - p).abs() < 0.02);
        }
    }

    #[test]
    fn ramus_favors_inlet_and_obturator_oblique() {
        let (mut rng, mut state) = fixture::state(7);
        let ramus = state.anatomy.corridor(crate::labels::CorridorId::RamusRight).clone();
        state.plan[0].corridor = ramus;
        let n = 10_000;
        let hits = (0..n)
            .filter(|_| {
                matches!(
                    sample_desired_view(&mut rng, &state).name,
                    ViewName::Inlet | ViewName::ObliqueLeft
                )
            })
            .count();
        assert!(hits as f64 / n as f64 >= 0.78, "{hits}");
    }

    #[test]
    fn point_mass_table_always_draws_that_view() {
        let mut config = SimConfig::default();
        for row in config.view_tables.values_mut() {
            *row = [(ViewName::Outlet, 1.0)].into_iter().collect();
        }
        let (mut rng, state) = fixture::state_with(8, config);
        for _ in 0..1000 {
            assert_eq!(sample_desired_view(&mut rng, &state).name, ViewName::Outlet);
        }
    }

    #[test]
    fn hunting_terminates_quickly() {
        let (mut rng, mut state) = fixture::state(9);
        state.lambda_adj = 0.6;
        let start = state.view;
        let mut within = 0;
        let trials = 2000;
        for _ in 0..trials {
            state.view = start;
            let spec = sample_desired_view(&mut rng, &state);
            let d = desired_view(&state, &spec);
            if hunt(&mut rng, &mut state, &d, 100).is_some() {
                within += 1;
            }
        }
        assert!(within as f64 >= 0.99 * trials as f64);
    }
}
