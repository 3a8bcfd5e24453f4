use rand::Rng;

use super::{any_orthogonal, Point3, UnitVec3, Vec3};
use crate::error::GeometryError;

/// Draws a point uniformly from the closed ball of `radius` around `center`
/// by rejection from the bounding cube.
pub fn sample_in_sphere<R: Rng + ?Sized>(
    rng: &mut R,
    center: &Point3,
    radius: f64,
) -> Result<Point3, GeometryError> {
    if !(radius >= 0.0 && radius.is_finite()) {
        return Err(GeometryError::InvalidRadius(radius));
    }
    if radius == 0.0 {
        return Ok(*center);
    }
    loop {
        let v = Vec3::new(
            2.0 * rng.gen::<f64>() - 1.0,
            2.0 * rng.gen::<f64>() - 1.0,
            2.0 * rng.gen::<f64>() - 1.0,
        );
        if v.norm_squared() <= 1.0 {
            return Ok(center + v * radius);
        }
    }
}

/// Draws a direction uniformly from the spherical cap of half-angle
/// `colatitude` around `dir`. The cosine of the polar angle is uniform on
/// `[cos colatitude, 1]` and the azimuth is uniform.
pub fn sample_solid_angle<R: Rng + ?Sized>(
    rng: &mut R,
    dir: &UnitVec3,
    colatitude: f64,
) -> Result<UnitVec3, GeometryError> {
    if !(0.0..=std::f64::consts::PI).contains(&colatitude) {
        return Err(GeometryError::InvalidColatitude(colatitude));
    }
    if colatitude == 0.0 {
        return Ok(*dir);
    }
    let cos_max = libm::cos(colatitude);
    let cos_t = 1.0 - rng.gen::<f64>() * (1.0 - cos_max);
    let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
    let phi = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
    let e1 = any_orthogonal(dir);
    let e2 = dir.cross(&e1);
    let v = dir.into_inner() * cos_t
        + (e1.into_inner() * libm::cos(phi) + e2 * libm::sin(phi)) * sin_t;
    Ok(UnitVec3::new_normalize(v))
}
