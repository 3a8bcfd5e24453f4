//! Vector and rotation algebra, the pinhole C-arm model and the two
//! sampling distributions used by the workflow simulation.
//!
//! Transcendental functions go through `libm` so that simulated streams do
//! not depend on the platform math library.

mod camera;
mod rotation;
mod sampling;

pub use camera::{make_projection, CameraModel, Pixel, Projection};
pub use rotation::rotate_about_axis;
pub use sampling::{sample_in_sphere, sample_solid_angle};

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Point3 = nalgebra::Point3<f64>;
pub type UnitVec3 = nalgebra::Unit<Vec3>;

/// Tolerance on the norm of vectors treated as unit directions.
pub const UNIT_TOLERANCE: f64 = 1e-9;

/// `min(max(value, lo), hi)`.
pub fn clamp(value: f64, lo: f64, hi: f64) -> f64 {
    debug_assert!(lo <= hi, "clamp bounds out of order: {lo} > {hi}");
    value.max(lo).min(hi)
}

/// Unsigned angle between two vectors in `[0, pi]`.
pub fn angle_between(a: &Vec3, b: &Vec3) -> f64 {
    libm::atan2(a.cross(b).norm(), a.dot(b))
}

pub fn deg(value: f64) -> f64 {
    value.to_radians()
}

/// A unit vector orthogonal to `v`, chosen from the least aligned world axis.
pub fn any_orthogonal(v: &Vec3) -> UnitVec3 {
    let a = v.abs();
    let helper = if a.x <= a.y && a.x <= a.z {
        Vec3::x()
    } else if a.y <= a.z {
        Vec3::y()
    } else {
        Vec3::z()
    };
    UnitVec3::new_normalize(v.cross(&helper))
}
