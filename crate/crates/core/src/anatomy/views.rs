use super::{AppFrame, Corridor};
use crate::error::AnatomyError;
use crate::geometry::{deg, Point3, UnitVec3, Vec3};
use crate::labels::{CorridorId, ViewName};

/// A standard view: its ideal principal ray in APP coordinates and the
/// angular tolerance used when judging whether a shot matches it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViewSpec {
    pub name: ViewName,
    pub ideal_ray_app: UnitVec3,
    pub tolerance_rad: f64,
}

/// One `ViewSpec` per standard view, indexed by `ViewName`.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewTable([ViewSpec; ViewName::COUNT]);

/// Rays point from source to detector. "Left" obliques and teardrops lean
/// the ray toward the patient's right (+x).
fn conventional_ray(name: ViewName) -> Vec3 {
    let ap_tilted = |caudal_deg: f64, about_z_deg: f64| {
        let (t, p) = (deg(caudal_deg), deg(about_z_deg));
        Vec3::new(
            libm::sin(p) * libm::cos(t),
            -libm::cos(p) * libm::cos(t),
            -libm::sin(t),
        )
    };
    match name {
        ViewName::Ap => Vec3::new(0.0, -1.0, 0.0),
        ViewName::Lateral => Vec3::new(1.0, 0.0, 0.0),
        ViewName::Inlet => ap_tilted(45.0, 0.0),
        ViewName::Outlet => ap_tilted(-30.0, 0.0),
        ViewName::ObliqueLeft => ap_tilted(0.0, 45.0),
        ViewName::ObliqueRight => ap_tilted(0.0, -45.0),
        ViewName::TeardropLeft => ap_tilted(35.0, 25.0),
        ViewName::TeardropRight => ap_tilted(35.0, -25.0),
    }
}

fn conventional_tolerance_deg(name: ViewName) -> f64 {
    match name {
        ViewName::TeardropLeft | ViewName::TeardropRight => 3.0,
        ViewName::Ap => 5.0,
        ViewName::Inlet | ViewName::Outlet => 6.0,
        ViewName::ObliqueLeft | ViewName::ObliqueRight => 7.0,
        ViewName::Lateral => 10.0,
    }
}

impl Default for ViewTable {
    fn default() -> Self {
        ViewTable(std::array::from_fn(|i| {
            let name = ViewName::ALL[i];
            ViewSpec {
                name,
                ideal_ray_app: UnitVec3::new_normalize(conventional_ray(name)),
                tolerance_rad: deg(conventional_tolerance_deg(name)),
            }
        }))
    }
}

impl ViewTable {
    /// Validates tolerances: each in [3, 10] degrees, teardrops the
    /// tightest and lateral the loosest.
    pub fn new(specs: [ViewSpec; ViewName::COUNT]) -> Result<Self, String> {
        for (i, s) in specs.iter().enumerate() {
            if s.name.index() != i {
                return Err(format!("view table out of order at {}", s.name));
            }
            let t = s.tolerance_rad.to_degrees();
            if !(3.0 - 1e-9..=10.0 + 1e-9).contains(&t) {
                return Err(format!("{} tolerance {t} deg outside [3, 10]", s.name));
            }
        }
        let tol = |v: ViewName| specs[v.index()].tolerance_rad;
        let tightest = tol(ViewName::TeardropLeft).max(tol(ViewName::TeardropRight));
        for s in &specs {
            if s.tolerance_rad < tightest && !matches!(s.name, ViewName::TeardropLeft | ViewName::TeardropRight) {
                return Err(format!("{} tolerance is tighter than the teardrop views", s.name));
            }
            if s.tolerance_rad > tol(ViewName::Lateral) {
                return Err(format!("{} tolerance is looser than lateral", s.name));
            }
        }
        Ok(ViewTable(specs))
    }

    pub fn get(&self, name: ViewName) -> &ViewSpec {
        &self.0[name.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = &ViewSpec> {
        self.0.iter()
    }
}

/// Ideal viewing point (corridor midpoint) and ideal principal ray in
/// anatomy coordinates.
pub fn ideal_view(view: &ViewSpec, corridor: &Corridor, app: &AppFrame) -> (Point3, UnitVec3) {
    let ray = app.direction_to_anatomy(&view.ideal_ray_app);
    (corridor.midpoint(), UnitVec3::new_normalize(ray))
}

/// The oblique that plays the obturator-oblique role for a ramus corridor.
/// Obliques are named by image side, so the right ramus uses the left
/// oblique and vice versa.
pub fn resolve_oblique(corridor: CorridorId) -> Result<ViewName, AnatomyError> {
    match corridor {
        CorridorId::RamusRight => Ok(ViewName::ObliqueLeft),
        CorridorId::RamusLeft => Ok(ViewName::ObliqueRight),
        other => Err(AnatomyError::NotRamus(other.to_string())),
    }
}
