use super::{Vec3, UNIT_TOLERANCE};
use crate::error::GeometryError;

/// Rotates `v` about the unit `axis` by `angle` radians (right-hand rule),
/// using Rodrigues' formula.
pub fn rotate_about_axis(v: &Vec3, axis: &Vec3, angle: f64) -> Result<Vec3, GeometryError> {
    let norm = axis.norm();
    if !((norm - 1.0).abs() <= UNIT_TOLERANCE) {
        return Err(GeometryError::NonUnitAxis { norm });
    }
    let (s, c) = (libm::sin(angle), libm::cos(angle));
    Ok(v * c + axis.cross(v) * s + axis * (axis.dot(v) * (1.0 - c)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::{Rotation3, Unit};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn quarter_turn_about_z() {
        let r = rotate_about_axis(&Vec3::x(), &Vec3::z(), FRAC_PI_2).unwrap();
        assert_relative_eq!(r, Vec3::y(), epsilon = 1e-15);
    }

    #[test]
    fn zero_angle_is_identity() {
        let v = Vec3::new(0.2, -4.0, 9.5);
        let axis = Vec3::new(1.0, 2.0, 2.0) / 3.0;
        assert_eq!(rotate_about_axis(&v, &axis, 0.0).unwrap(), v);
    }

    #[test]
    fn non_unit_axis_rejected() {
        let err = rotate_about_axis(&Vec3::x(), &Vec3::new(0.0, 0.0, 2.0), 0.1).unwrap_err();
        assert!(matches!(err, GeometryError::NonUnitAxis { .. }));
        assert!(rotate_about_axis(&Vec3::x(), &Vec3::zeros(), 0.1).is_err());
    }

    #[test]
    fn matches_rotation_matrix_oracle() {
        // Oracle: nalgebra's axis-angle rotation matrix, built independently
        // of the Rodrigues vector form.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let v = Vec3::new(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0));
            let axis = Unit::new_normalize(Vec3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ));
            let angle = rng.gen_range(-7.0..7.0);
            let oracle = Rotation3::from_axis_angle(&axis, angle) * v;
            let got = rotate_about_axis(&v, &axis, angle).unwrap();
            assert_relative_eq!(got, oracle, epsilon = 1e-9 * v.norm().max(1.0));
            assert!((got.norm() - v.norm()).abs() < 1e-9);
        }
    }

    #[test]
    fn preserves_angles_between_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let a = Vec3::new(rng.gen(), rng.gen(), rng.gen()) - Vec3::repeat(0.5);
            let b = Vec3::new(rng.gen(), rng.gen(), rng.gen()) - Vec3::repeat(0.5);
            let axis = Vec3::new(rng.gen(), rng.gen(), rng.gen()).normalize();
            let angle = rng.gen_range(-3.0..3.0);
            let ra = rotate_about_axis(&a, &axis, angle).unwrap();
            let rb = rotate_about_axis(&b, &axis, angle).unwrap();
            assert!((ra.dot(&rb) - a.dot(&b)).abs() < 1e-9);
        }
    }
}
