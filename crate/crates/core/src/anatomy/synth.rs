use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{AnatomyMetadata, AnatomySpec, Corridor};
use crate::error::AnatomyError;
use crate::geometry::{deg, rotate_about_axis, sample_solid_angle, Point3, UnitVec3, Vec3};
use crate::rng::standard_normal;

/// Variation applied to the template when synthesizing a pelvis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PelvisParams {
    /// Per-axis standard deviation of independent landmark noise.
    pub jitter_mm: f64,
    /// Global isotropic scale, drawn uniformly, applied about the template
    /// origin.
    pub scale_range: [f64; 2],
    /// Upper bound on a random whole-body rotation (uniform axis).
    pub max_rotation_deg: f64,
}

impl Default for PelvisParams {
    fn default() -> Self {
        PelvisParams {
            jitter_mm: 2.0,
            scale_range: [0.9, 1.1],
            max_rotation_deg: 5.0,
        }
    }
}

impl PelvisParams {
    pub fn exact() -> Self {
        PelvisParams {
            jitter_mm: 0.0,
            scale_range: [1.0, 1.0],
            max_rotation_deg: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), AnatomyError> {
        let [lo, hi] = self.scale_range;
        if !(self.jitter_mm >= 0.0 && self.jitter_mm.is_finite()) {
            return Err(AnatomyError::InvalidParams("jitter must be >= 0".into()));
        }
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(AnatomyError::InvalidParams(format!(
                "scale range [{lo}, {hi}] must be positive and ordered"
            )));
        }
        if !(0.0..=180.0).contains(&self.max_rotation_deg) {
            return Err(AnatomyError::InvalidParams(
                "max rotation must lie in [0, 180] degrees".into(),
            ));
        }
        Ok(())
    }
}

/// Draws a near-symmetric pelvis from `template`: global scale, landmark
/// jitter, anchored corridors, then a small rigid rotation.
///
/// Corridor endpoints with an anchor follow their landmark: the endpoint is
/// the jittered anchor plus the scaled template offset from it.
pub fn synth_pelvis<R: Rng + ?Sized>(
    rng: &mut R,
    template: &AnatomySpec,
    params: &PelvisParams,
) -> Result<AnatomySpec, AnatomyError> {
    params.validate()?;
    let [lo, hi] = params.scale_range;
    let scale = lo + (hi - lo) * rng.gen::<f64>();
    let sigma = params.jitter_mm;

    let landmarks = template.landmarks.map_positions(|p| {
        let noise = Vec3::new(
            standard_normal(rng),
            standard_normal(rng),
            standard_normal(rng),
        ) * sigma;
        Point3::from(p.coords * scale + noise)
    });

    let place = |point: &Point3, anchor: &Option<String>| -> Result<Point3, AnatomyError> {
        match anchor {
            Some(name) => {
                let base = template
                    .landmarks
                    .get(name)
                    .ok_or_else(|| AnatomyError::MissingLandmark(name.clone()))?;
                let moved = landmarks.get(name).expect("same names as template");
                Ok(moved + (point - base) * scale)
            }
            None => Ok(Point3::from(point.coords * scale)),
        }
    };
    let mut corridors = Vec::with_capacity(template.corridors.len());
    for c in &template.corridors {
        corridors.push(Corridor {
            id: c.id,
            start: place(&c.start, &c.start_anchor)?,
            end: place(&c.end, &c.end_anchor)?,
            radius_mm: c.radius_mm,
            start_anchor: c.start_anchor.clone(),
            end_anchor: c.end_anchor.clone(),
        });
    }

    let (landmarks, corridors) = if params.max_rotation_deg > 0.0 {
        let pole = UnitVec3::new_normalize(Vec3::z());
        let axis = sample_solid_angle(rng, &pole, std::f64::consts::PI)
            .expect("pi is a valid colatitude");
        let angle = deg(params.max_rotation_deg) * rng.gen::<f64>();
        let rotate = |p: &Point3| {
            Point3::from(rotate_about_axis(&p.coords, &axis, angle).expect("unit axis"))
        };
        let landmarks = landmarks.map_positions(rotate);
        let corridors = corridors
            .into_iter()
            .map(|c| Corridor {
                start: rotate(&c.start),
                end: rotate(&c.end),
                ..c
            })
            .collect();
        (landmarks, corridors)
    } else {
        (landmarks, corridors)
    };

    AnatomySpec::new(
        AnatomyMetadata {
            source: "synthetic".into(),
            seed: None,
        },
        landmarks,
        corridors,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::CorridorId;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_noise_returns_template() {
        let t = AnatomySpec::template();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = synth_pelvis(&mut rng, &t, &PelvisParams::exact()).unwrap();
        assert_eq!(s.landmarks, t.landmarks);
        assert_eq!(s.corridors, t.corridors);
        assert_eq!(s.app_frame, t.app_frame);
    }

    #[test]
    fn pure_scale_scales_distances() {
        let t = AnatomySpec::template();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let params = PelvisParams {
            scale_range: [1.2, 1.2],
            ..PelvisParams::exact()
        };
        let s = synth_pelvis(&mut rng, &t, &params).unwrap();
        let a: Vec<_> = t.landmarks.iter().collect();
        let b: Vec<_> = s.landmarks.iter().collect();
        for i in 0..16 {
            for j in (i + 1)..16 {
                let d0 = (a[i].position - a[j].position).norm();
                let d1 = (b[i].position - b[j].position).norm();
                assert_relative_eq!(d1, 1.2 * d0, epsilon = 1e-9);
            }
        }
        for id in CorridorId::ALL {
            assert_relative_eq!(s.corridor(*id).length(), 1.2 * t.corridor(*id).length(), epsilon = 1e-9);
        }
    }

    #[test]
    fn random_draws_satisfy_invariants() {
        let t = AnatomySpec::template();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let params = PelvisParams {
            jitter_mm: 4.0,
            scale_range: [0.8, 1.25],
            max_rotation_deg: 20.0,
        };
        for _ in 0..100 {
            let s = synth_pelvis(&mut rng, &t, &params).unwrap();
            assert_eq!(s.landmarks.len(), 16);
            assert_eq!(s.corridors.iter().map(|c| c.id).collect::<Vec<_>>(), CorridorId::ALL);
            for c in &s.corridors {
                assert!(c.length() > 30.0);
                assert!(c.radius_mm > 0.0);
            }
            let r = s.app_frame.rotation();
            assert_relative_eq!(r.determinant(), 1.0, epsilon = 1e-9);
            // Bilateral near-symmetry: corridors mirror in length.
            let l = s.corridor(CorridorId::RamusLeft).length();
            let rr = s.corridor(CorridorId::RamusRight).length();
            assert!((l - rr).abs() < 25.0);
        }
    }

    #[test]
    fn collapsing_template_is_rejected() {
        let mut t = AnatomySpec::template();
        let end = t.corridors[0].end;
        t.corridors[0].start = end;
        t.corridors[0].start_anchor = None;
        t.corridors[0].end_anchor = None;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            synth_pelvis(&mut rng, &t, &PelvisParams::exact()),
            Err(AnatomyError::ZeroLengthCorridor(_))
        ));
    }

    #[test]
    fn invalid_params_rejected() {
        let t = AnatomySpec::template();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let bad = PelvisParams {
            scale_range: [1.2, 1.0],
            ..PelvisParams::default()
        };
        assert!(synth_pelvis(&mut rng, &t, &bad).is_err());
    }
}
