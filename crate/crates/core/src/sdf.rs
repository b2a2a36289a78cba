//! Signed distance, exact membership and bounding boxes of CSG nodes.
//!
//! Distances are negative inside. Under non-uniform scale the local distance
//! is multiplied by the smallest scale factor, which keeps the sign exact and
//! the magnitude a lower bound on the true Euclidean distance.

use nalgebra::Vector2;

use crate::geom::{Aabb, Vec3};
use crate::scene::{CsgNode, OpKind, Primitive, Scene, Shape};

/// Exact distance to a shape centered at its local origin.
pub fn shape_distance(shape: &Shape, p: &Vec3) -> f64 {
    match *shape {
        Shape::Sphere { radius } => p.norm() - radius,
        Shape::Box { half_extents } => {
            let q = p.abs() - half_extents;
            q.sup(&Vec3::zeros()).norm() + q.max().min(0.0)
        }
        Shape::Cylinder { radius, height } => {
            let d = Vector2::new(
                Vector2::new(p.x, p.z).norm() - radius,
                p.y.abs() - 0.5 * height,
            );
            d.x.max(d.y).min(0.0) + d.sup(&Vector2::zeros()).norm()
        }
    }
}

/// Strict point-in-shape test in local coordinates.
pub fn shape_contains(shape: &Shape, p: &Vec3) -> bool {
    match *shape {
        Shape::Sphere { radius } => p.norm_squared() < radius * radius,
        Shape::Box { half_extents } => (0..3).all(|i| p[i].abs() < half_extents[i]),
        Shape::Cylinder { radius, height } => {
            p.x * p.x + p.z * p.z < radius * radius && p.y.abs() < 0.5 * height
        }
    }
}

pub fn primitive_distance(prim: &Primitive, p: &Vec3) -> f64 {
    let local = prim.pose.to_local(p);
    shape_distance(&prim.shape, &local) * prim.pose.min_scale()
}

pub fn primitive_contains(prim: &Primitive, p: &Vec3) -> bool {
    shape_contains(&prim.shape, &prim.pose.to_local(p))
}

pub fn signed_distance(scene: &Scene, node: &CsgNode, p: &Vec3) -> f64 {
    match node {
        CsgNode::Leaf(id) => match scene.primitive(id) {
            Some(prim) => primitive_distance(prim, p),
            None => f64::INFINITY,
        },
        CsgNode::Op { kind, children, .. } => {
            let mut values = children.iter().map(|c| signed_distance(scene, c, p));
            match kind {
                OpKind::Union => values.fold(f64::INFINITY, f64::min),
                OpKind::Intersection => values.fold(f64::NEG_INFINITY, f64::max),
                OpKind::Difference => {
                    let left = values.next().unwrap_or(f64::INFINITY);
                    values.fold(left, |acc, d| acc.max(-d))
                }
            }
        }
    }
}

/// Membership by direct primitive tests and Boolean logic, with no distances
/// involved.
pub fn contains(scene: &Scene, node: &CsgNode, p: &Vec3) -> bool {
    match node {
        CsgNode::Leaf(id) => scene
            .primitive(id)
            .is_some_and(|prim| primitive_contains(prim, p)),
        CsgNode::Op { kind, children, .. } => match kind {
            OpKind::Union => children.iter().any(|c| contains(scene, c, p)),
            OpKind::Intersection => children.iter().all(|c| contains(scene, c, p)),
            OpKind::Difference => {
                let (first, rest) = children.split_first().expect("difference has two children");
                contains(scene, first, p) && !rest.iter().any(|c| contains(scene, c, p))
            }
        },
    }
}

/// Exact world-space box of a posed primitive.
pub fn primitive_aabb(prim: &Primitive) -> Aabb {
    let m = prim.pose.linear();
    let half = match prim.shape {
        Shape::Sphere { radius } => Vec3::from_fn(|i, _| radius * m.row(i).norm()),
        Shape::Box { half_extents } => {
            Vec3::from_fn(|i, _| (0..3).map(|j| m[(i, j)].abs() * half_extents[j]).sum())
        }
        Shape::Cylinder { radius, height } => Vec3::from_fn(|i, _| {
            let disk = radius * (m[(i, 0)].powi(2) + m[(i, 2)].powi(2)).sqrt();
            disk + 0.5 * height * m[(i, 1)].abs()
        }),
    };
    let c = prim.pose.translation;
    Aabb::new(c - half, c + half)
}

/// Conservative bound of the solid; empty when the solid provably is.
pub fn node_aabb(scene: &Scene, node: &CsgNode) -> Aabb {
    match node {
        CsgNode::Leaf(id) => scene
            .primitive(id)
            .map(primitive_aabb)
            .unwrap_or_else(Aabb::empty),
        CsgNode::Op { kind, children, .. } => {
            let mut boxes = children.iter().map(|c| node_aabb(scene, c));
            match kind {
                OpKind::Union => boxes.fold(Aabb::empty(), |a, b| a.union(&b)),
                OpKind::Intersection => {
                    let first = boxes.next().unwrap_or_else(Aabb::empty);
                    boxes.fold(first, |a, b| a.intersection(&b))
                }
                OpKind::Difference => boxes.next().unwrap_or_else(Aabb::empty),
            }
        }
    }
}
