//! Scene edits. Every function returns a new scene and leaves its input alone.

use std::collections::BTreeSet;

use crate::error::EditError;
use crate::geom::{Rotation, Vec3, MAX_SCALE, MIN_SCALE};
use crate::scene::{CsgNode, NodeId, OpKind, PrimitiveId, Scene};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PoseDelta {
    Translate(Vec3),
    /// Rotation by `angle` radians about `axis` through `pivot`.
    RotateAbout {
        axis: Vec3,
        angle: f64,
        pivot: Vec3,
    },
    /// Per world axis scaling about `pivot`.
    ScaleAxes {
        factors: Vec3,
        pivot: Vec3,
    },
}

/// Applies one rigid or scaling delta to a set of primitives as a unit.
///
/// Rotation and scale act about the shared pivot, so grouped primitives keep
/// their relative placement. A primitive's own per-axis scale picks up the
/// world factors through its rotation: local axis `k` is stretched by the
/// length of `diag(factors) * R * e_k`, which is exact whenever the local
/// axes line up with world axes.
pub fn apply_pose_delta(
    scene: &Scene,
    ids: &BTreeSet<PrimitiveId>,
    delta: &PoseDelta,
) -> Result<Scene, EditError> {
    if let Some(missing) = ids.iter().find(|id| !scene.primitives.contains_key(*id)) {
        return Err(EditError::UnknownId(missing.to_string()));
    }
    let mut out = scene.clone();
    match *delta {
        PoseDelta::Translate(v) => {
            for id in ids {
                let pose = &mut out.primitives.get_mut(id).expect("checked above").pose;
                pose.translation += v;
            }
        }
        PoseDelta::RotateAbout { axis, angle, pivot } => {
            if !axis.iter().all(|c| c.is_finite()) || !angle.is_finite() {
                return Err(EditError::DegenerateAxis);
            }
            let rot = Rotation::from_axis_angle(&axis, angle).ok_or(EditError::DegenerateAxis)?;
            for id in ids {
                let pose = &mut out.primitives.get_mut(id).expect("checked above").pose;
                pose.translation = pivot + rot.rotate(&(pose.translation - pivot));
                pose.rotation = rot.compose(&pose.rotation);
            }
        }
        PoseDelta::ScaleAxes { factors, pivot } => {
            if !factors.iter().all(|f| f.is_finite() && *f > 0.0) {
                return Err(EditError::NonPositiveScale);
            }
            for id in ids {
                let pose = &mut out.primitives.get_mut(id).expect("checked above").pose;
                pose.translation = pivot + (pose.translation - pivot).component_mul(&factors);
                let r = pose.rotation.matrix();
                for k in 0..3 {
                    let column = r.column(k);
                    let stretch =
                        Vec3::from_fn(|i, _| factors[i] * column[i]).norm() / column.norm();
                    pose.scale[k] = (pose.scale[k] * stretch).clamp(MIN_SCALE, MAX_SCALE);
                }
            }
        }
    }
    Ok(out)
}

/// Replaces the operator of `node_id`.
///
/// Turning a node with more than two children into a difference keeps the
/// first child as the minuend and unions the rest into a new node whose id is
/// derived from `node_id`.
pub fn set_operator(scene: &Scene, node_id: &str, new_kind: OpKind) -> Result<Scene, EditError> {
    let fresh_id = fresh_node_id(scene, &format!("{node_id}-rest"));
    let mut out = scene.clone();
    let node = out
        .root
        .find_mut(node_id)
        .ok_or_else(|| EditError::UnknownNode(node_id.to_string()))?;
    match node {
        CsgNode::Leaf(_) => Err(EditError::LeafNotOperator(node_id.to_string())),
        CsgNode::Op { kind, children, .. } => {
            if *kind == new_kind {
                return Ok(out);
            }
            *kind = new_kind;
            if new_kind == OpKind::Difference && children.len() > 2 {
                let rest: Vec<CsgNode> = children.drain(1..).collect();
                children.push(CsgNode::Op {
                    id: NodeId(fresh_id),
                    kind: OpKind::Union,
                    children: rest,
                });
            }
            Ok(out)
        }
    }
}

fn fresh_node_id(scene: &Scene, base: &str) -> String {
    let taken = |s: &str| {
        scene.find_node(s).is_some() || scene.primitives.contains_key(&PrimitiveId::new(s))
    };
    if !taken(base) {
        return base.to_string();
    }
    (2..)
        .map(|n| format!("{base}-{n}"))
        .find(|s| !taken(s))
        .expect("unbounded search")
}

/// Primitive ids of the subtree at `node_id`, depth-first left to right.
pub fn leaves_under(scene: &Scene, node_id: &str) -> Result<Vec<PrimitiveId>, EditError> {
    scene
        .find_node(node_id)
        .map(CsgNode::leaf_ids)
        .ok_or_else(|| EditError::UnknownNode(node_id.to_string()))
}
