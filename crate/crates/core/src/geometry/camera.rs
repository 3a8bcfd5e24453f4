use nalgebra::{Matrix3, Matrix3x4, Vector4};
use serde::{Deserialize, Serialize};

use super::{Point3, UnitVec3, Vec3};
use crate::error::GeometryError;

/// Continuous pixel coordinates `(u, v)`; `u` grows to the right, `v` down.
pub type Pixel = nalgebra::Point2<f64>;

/// Intrinsics of the virtual C-arm. The detector has square pixels and the
/// principal point sits at the image center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraModel {
    pub sensor_width_mm: f64,
    pub source_detector_mm: f64,
    pub image_height_px: u32,
    pub image_width_px: u32,
}

impl CameraModel {
    pub fn new(
        sensor_width_mm: f64,
        source_detector_mm: f64,
        image_height_px: u32,
        image_width_px: u32,
    ) -> Result<Self, GeometryError> {
        if !(sensor_width_mm > 0.0 && sensor_width_mm.is_finite()) {
            return Err(GeometryError::InvalidCamera("sensor width must be positive"));
        }
        if !(source_detector_mm > 0.0 && source_detector_mm.is_finite()) {
            return Err(GeometryError::InvalidCamera(
                "source-to-detector distance must be positive",
            ));
        }
        if image_height_px == 0 || image_width_px == 0 {
            return Err(GeometryError::InvalidCamera("image size must be positive"));
        }
        Ok(CameraModel {
            sensor_width_mm,
            source_detector_mm,
            image_height_px,
            image_width_px,
        })
    }

    pub fn pixel_pitch_mm(&self) -> f64 {
        self.sensor_width_mm / self.image_width_px as f64
    }

    pub fn focal_length_px(&self) -> f64 {
        self.source_detector_mm / self.pixel_pitch_mm()
    }

    pub fn principal_point_px(&self) -> Pixel {
        Pixel::new(
            self.image_width_px as f64 / 2.0,
            self.image_height_px as f64 / 2.0,
        )
    }

    pub fn intrinsic_matrix(&self) -> Matrix3<f64> {
        let f = self.focal_length_px();
        let c = self.principal_point_px();
        Matrix3::new(f, 0.0, c.x, 0.0, f, c.y, 0.0, 0.0, 1.0)
    }
}

/// A posed C-arm: the 3x4 projection matrix plus the geometry it was built
/// from.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    matrix: Matrix3x4<f64>,
    source: Point3,
    ray: UnitVec3,
    /// Rows are the image u axis, the image v axis and the principal ray.
    rotation: Matrix3<f64>,
    camera: CameraModel,
    source_viewpoint_mm: f64,
}

/// Builds the projection with the source at `viewpoint - d_sp * ray` looking
/// along `ray`.
///
/// The image u axis is `ray x cranial` (falling back to the anterior axis for
/// near-vertical rays), which puts the patient's right on the image left for
/// an AP shot.
pub fn make_projection(
    viewpoint: &Point3,
    ray: &UnitVec3,
    camera: &CameraModel,
    d_sp: f64,
) -> Result<Projection, GeometryError> {
    if !(d_sp > 0.0 && d_sp.is_finite()) {
        return Err(GeometryError::InvalidSourceDistance(d_sp));
    }
    let source = viewpoint - ray.into_inner() * d_sp;
    let reference = if ray.z.abs() < 0.9 { Vec3::z() } else { Vec3::y() };
    let u_axis = ray.cross(&reference).normalize();
    let v_axis = ray.cross(&u_axis);
    let rotation = Matrix3::from_rows(&[
        u_axis.transpose(),
        v_axis.transpose(),
        ray.into_inner().transpose(),
    ]);
    let translation = -(rotation * source.coords);
    let mut extrinsic = Matrix3x4::zeros();
    extrinsic.fixed_view_mut::<3, 3>(0, 0).copy_from(&rotation);
    extrinsic.set_column(3, &translation);
    Ok(Projection {
        matrix: camera.intrinsic_matrix() * extrinsic,
        source,
        ray: *ray,
        rotation,
        camera: *camera,
        source_viewpoint_mm: d_sp,
    })
}

impl Projection {
    pub fn matrix(&self) -> &Matrix3x4<f64> {
        &self.matrix
    }

    pub fn source(&self) -> &Point3 {
        &self.source
    }

    pub fn ray(&self) -> &UnitVec3 {
        &self.ray
    }

    pub fn camera(&self) -> &CameraModel {
        &self.camera
    }

    pub fn source_viewpoint_mm(&self) -> f64 {
        self.source_viewpoint_mm
    }

    /// Image-plane axes in world coordinates.
    pub fn image_axes(&self) -> (Vec3, Vec3) {
        (
            self.rotation.row(0).transpose(),
            self.rotation.row(1).transpose(),
        )
    }

    /// Depth of `point` along the principal ray, measured from the source.
    pub fn depth(&self, point: &Point3) -> f64 {
        self.ray.dot(&(point - self.source))
    }

    /// Projects and dehomogenizes. Points at or behind the source plane have
    /// no image.
    pub fn project(&self, point: &Point3) -> Result<Pixel, GeometryError> {
        let h = self.matrix * Vector4::new(point.x, point.y, point.z, 1.0);
        if !(h.z > 0.0) {
            return Err(GeometryError::BehindSource { depth: h.z });
        }
        Ok(Pixel::new(h.x / h.z, h.y / h.z))
    }

    /// World direction from the source through `pixel`.
    pub fn back_project(&self, pixel: &Pixel) -> UnitVec3 {
        let f = self.camera.focal_length_px();
        let c = self.camera.principal_point_px();
        let cam = Vec3::new((pixel.x - c.x) / f, (pixel.y - c.y) / f, 1.0);
        UnitVec3::new_normalize(self.rotation.transpose() * cam)
    }

    pub fn in_image(&self, pixel: &Pixel) -> bool {
        pixel.x >= 0.0
            && pixel.y >= 0.0
            && pixel.x < self.camera.image_width_px as f64
            && pixel.y < self.camera.image_height_px as f64
    }

    /// Row-major copy of the 3x4 matrix.
    pub fn matrix_row_major(&self) -> [f64; 12] {
        let mut out = [0.0; 12];
        for r in 0..3 {
            for c in 0..4 {
                out[r * 4 + c] = self.matrix[(r, c)];
            }
        }
        out
    }
}
