//! Vectors, rotations, poses and bounding boxes shared by every module.

use nalgebra::{Matrix3, Quaternion, Unit, UnitQuaternion, Vector3};

pub type Vec3 = Vector3<f64>;

/// Smallest and largest per-axis scale a pose may carry.
pub const MIN_SCALE: f64 = 1e-6;
pub const MAX_SCALE: f64 = 1e6;

pub fn vec3(x: f64, y: f64, z: f64) -> Vec3 {
    Vec3::new(x, y, z)
}

pub fn is_finite(v: &Vec3) -> bool {
    v.iter().all(|c| c.is_finite())
}

/// Norm tolerance under which raw quaternions are accepted without rescaling.
pub const UNIT_SLACK: f64 = 1e-8;

/// Unit quaternion kept in canonical form (`w >= 0`).
///
/// The sign convention picks one representative of the double cover so two
/// equal rotations always compare and serialize identically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(UnitQuaternion<f64>);

impl Rotation {
    pub fn identity() -> Self {
        Rotation(UnitQuaternion::identity())
    }

    /// Builds a rotation from raw `(w, x, y, z)` components. Components whose
    /// norm is already within [`UNIT_SLACK`] of 1 are kept as given, so that
    /// printed quaternions read back unchanged; others are normalized.
    /// Returns `None` for a zero or non-finite quaternion.
    pub fn from_wxyz(w: f64, x: f64, y: f64, z: f64) -> Option<Self> {
        let q = Quaternion::new(w, x, y, z);
        if !q.coords.iter().all(|c| c.is_finite()) {
            return None;
        }
        let norm = q.norm();
        if norm < 1e-12 {
            return None;
        }
        if (norm - 1.0).abs() <= UNIT_SLACK {
            let q = if q.w < 0.0 { -q } else { q };
            return Some(Rotation(UnitQuaternion::new_unchecked(q)));
        }
        Some(Self::canonical(UnitQuaternion::new_unchecked(q / norm)))
    }

    pub fn from_axis_angle(axis: &Vec3, angle: f64) -> Option<Self> {
        let axis = Unit::try_new(*axis, 1e-12)?;
        Some(Self::canonical(UnitQuaternion::from_axis_angle(
            &axis, angle,
        )))
    }

    pub fn from_unit(q: UnitQuaternion<f64>) -> Self {
        Self::canonical(q)
    }

    fn canonical(q: UnitQuaternion<f64>) -> Self {
        // renormalize to keep drift below 1e-9 across long edit chains
        let q = UnitQuaternion::new_normalize(*q.quaternion());
        if q.w < 0.0 {
            Rotation(UnitQuaternion::new_unchecked(-*q.quaternion()))
        } else {
            Rotation(q)
        }
    }

    pub fn wxyz(&self) -> [f64; 4] {
        let q = self.0.quaternion();
        [q.w, q.i, q.j, q.k]
    }

    pub fn unit(&self) -> &UnitQuaternion<f64> {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        Self::canonical(self.0.inverse())
    }

    /// `self` applied after `other`.
    pub fn compose(&self, other: &Rotation) -> Self {
        Self::canonical(self.0 * other.0)
    }

    pub fn rotate(&self, v: &Vec3) -> Vec3 {
        self.0.transform_vector(v)
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        *self.0.to_rotation_matrix().matrix()
    }

    pub fn angle(&self) -> f64 {
        self.0.angle()
    }

    /// Signed angle of the twist component about `axis` (unit length) in a
    /// swing-twist decomposition.
    pub fn twist_angle(&self, axis: &Vec3) -> f64 {
        let q = self.0.quaternion();
        let projected = q.imag().dot(axis);
        if projected.abs() < 1e-15 && q.w.abs() < 1e-15 {
            // pure swing by 180 degrees: twist is undefined, treat as none
            return 0.0;
        }
        let angle = 2.0 * projected.atan2(q.w);
        // keep the result in (-pi, pi]
        if angle > std::f64::consts::PI {
            angle - 2.0 * std::f64::consts::PI
        } else if angle <= -std::f64::consts::PI {
            angle + 2.0 * std::f64::consts::PI
        } else {
            angle
        }
    }
}

impl Default for Rotation {
    fn default() -> Self {
        Self::identity()
    }
}

/// Translation, rotation and per-axis scale, applied scale first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub translation: Vec3,
    pub rotation: Rotation,
    pub scale: Vec3,
}

impl Default for Pose {
    fn default() -> Self {
        Pose {
            translation: Vec3::zeros(),
            rotation: Rotation::identity(),
            scale: Vec3::repeat(1.0),
        }
    }
}

impl Pose {
    pub fn at(translation: Vec3) -> Self {
        Pose {
            translation,
            ..Pose::default()
        }
    }

    pub fn to_world(&self, local: &Vec3) -> Vec3 {
        self.rotation.rotate(&local.component_mul(&self.scale)) + self.translation
    }

    pub fn to_local(&self, world: &Vec3) -> Vec3 {
        let unrotated = self.rotation.inverse().rotate(&(world - self.translation));
        unrotated.component_div(&self.scale)
    }

    /// Linear part `R * diag(scale)` of the local-to-world map.
    pub fn linear(&self) -> Matrix3<f64> {
        self.rotation.matrix() * Matrix3::from_diagonal(&self.scale)
    }

    pub fn min_scale(&self) -> f64 {
        self.scale.min()
    }

    pub fn scale_in_range(&self) -> bool {
        self.scale
            .iter()
            .all(|s| s.is_finite() && (MIN_SCALE..=MAX_SCALE).contains(s))
    }
}

/// Axis-aligned box. A box with `min > max` on any axis is empty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Self {
        Aabb { min, max }
    }

    pub fn empty() -> Self {
        Aabb {
            min: Vec3::repeat(f64::INFINITY),
            max: Vec3::repeat(f64::NEG_INFINITY),
        }
    }

    pub fn is_empty(&self) -> bool {
        (0..3).any(|i| self.min[i] > self.max[i])
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        if self.is_empty() {
            return *other;
        }
        if other.is_empty() {
            return *self;
        }
        Aabb::new(self.min.inf(&other.min), self.max.sup(&other.max))
    }

    pub fn intersection(&self, other: &Aabb) -> Aabb {
        let b = Aabb::new(self.min.sup(&other.min), self.max.inf(&other.max));
        if b.is_empty() {
            Aabb::empty()
        } else {
            b
        }
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn size(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn diagonal(&self) -> f64 {
        self.size().norm()
    }

    pub fn volume(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.size().iter().product()
        }
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }
}

/// Round to 9 significant digits, the precision every text output uses.
pub fn round_sig9(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        // collapse -0.0 too
        return if x == 0.0 { 0.0 } else { x };
    }
    let r: f64 = format!("{x:.8e}").parse().unwrap_or(x);
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Shortest decimal text of `x` rounded to 9 significant digits.
pub fn fmt_sig9(x: f64) -> String {
    format!("{}", round_sig9(x))
}
