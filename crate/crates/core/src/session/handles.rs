//! Virtual handle geometry: three axes with end boxes plus a center sphere.

use std::collections::BTreeSet;
use std::fmt;

use crate::geom::{Aabb, Vec3};
use crate::scene::{PrimitiveId, Scene};
use crate::sdf::primitive_aabb;

/// Shortest axis, in scene units, for tiny selections.
pub const MIN_AXIS_LENGTH: f64 = 0.1;
/// End-box half size relative to the axis length.
pub const BOX_HALF_RATIO: f64 = 0.1;
/// Center sphere radius relative to the axis length.
pub const SPHERE_RADIUS_RATIO: f64 = 0.15;
/// Grab hit zones are this much larger than the drawn handle.
pub const HIT_TOLERANCE: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn unit(&self) -> Vec3 {
        match self {
            Axis::X => Vec3::x(),
            Axis::Y => Vec3::y(),
            Axis::Z => Vec3::z(),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HandleTarget {
    AxisHandle(Axis),
    CenterSphere,
}

impl fmt::Display for HandleTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HandleTarget::AxisHandle(a) => write!(f, "axis-{}", a.as_str()),
            HandleTarget::CenterSphere => f.write_str("center"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HandleLayout {
    pub origin: Vec3,
    pub axis_length: f64,
    pub box_half: f64,
    pub sphere_radius: f64,
    /// End-box centers for x, y and z.
    pub box_centers: [Vec3; 3],
}

impl HandleLayout {
    /// Layout around the world bounding box of the given primitives.
    pub fn around(scene: &Scene, ids: &BTreeSet<PrimitiveId>) -> Option<HandleLayout> {
        let bounds = ids
            .iter()
            .filter_map(|id| scene.primitive(id))
            .map(primitive_aabb)
            .fold(Aabb::empty(), |acc, b| acc.union(&b));
        if bounds.is_empty() {
            return None;
        }
        let origin = bounds.center();
        let axis_length = (0.5 * bounds.diagonal()).max(MIN_AXIS_LENGTH);
        Some(HandleLayout {
            origin,
            axis_length,
            box_half: BOX_HALF_RATIO * axis_length,
            sphere_radius: SPHERE_RADIUS_RATIO * axis_length,
            box_centers: Axis::ALL.map(|a| origin + a.unit() * axis_length),
        })
    }

    /// Handle grabbed by a hand at `pos`; end boxes win over the sphere and
    /// the nearest box wins among boxes.
    pub fn hit(&self, pos: &Vec3) -> Option<HandleTarget> {
        let reach = self.box_half * HIT_TOLERANCE;
        let nearest = Axis::ALL
            .iter()
            .zip(self.box_centers.iter())
            .map(|(a, c)| (*a, (pos - c).norm()))
            .filter(|(_, d)| *d <= reach)
            .min_by(|a, b| a.1.total_cmp(&b.1));
        if let Some((axis, _)) = nearest {
            return Some(HandleTarget::AxisHandle(axis));
        }
        ((pos - self.origin).norm() <= self.sphere_radius * HIT_TOLERANCE)
            .then_some(HandleTarget::CenterSphere)
    }
}
