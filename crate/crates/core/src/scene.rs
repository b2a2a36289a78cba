//! CSG scene model and its JSON document format.
//!
//! A document looks like
//!
//! ```json
//! {
//!   "name": "bracket",
//!   "primitives": [
//!     {"id": "ball", "kind": "sphere", "params": {"radius": 0.5},
//!      "pose": {"translation": [0, 1, 0], "rotation": [1, 0, 0, 0], "scale": [1, 1, 1]}},
//!     {"id": "cube", "kind": "box", "params": {"half_extents": [0.4, 0.4, 0.4]}}
//!   ],
//!   "root": {"op": "union", "id": "top", "children": [{"leaf": "ball"}, {"leaf": "cube"}]}
//! }
//! ```
//!
//! Parsing is strict: unknown keys, unknown kinds and wrong operator arity are
//! rejected. `pose` and each of its fields are optional and default to the
//! identity. A primitive may carry an optional `"label"` string. Cylinders
//! are centered on their local origin with their axis along local `y`;
//! `height` is the full length. Rotations are `[w, x, y, z]` quaternions.
//!
//! Serialization sorts keys, lists primitives by id and rounds every number
//! to 9 significant digits, so output bytes are a pure function of the scene.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde_json::{Map, Value};

use crate::error::SceneError;
use crate::geom::{round_sig9, Pose, Rotation, Vec3};

/// Identity of a primitive; doubles as the node id of its leaf.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PrimitiveId(pub String);

/// Identity of an operator node.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub String);

impl PrimitiveId {
    pub fn new(s: impl Into<String>) -> Self {
        PrimitiveId(s.into())
    }
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl NodeId {
    pub fn new(s: impl Into<String>) -> Self {
        NodeId(s.into())
    }
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PrimitiveId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Sphere {
        radius: f64,
    },
    Box {
        half_extents: Vec3,
    },
    /// Axis along local y, centered on the origin.
    Cylinder {
        radius: f64,
        height: f64,
    },
}

impl Shape {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Shape::Sphere { .. } => "sphere",
            Shape::Box { .. } => "box",
            Shape::Cylinder { .. } => "cylinder",
        }
    }

    fn dimensions_valid(&self) -> bool {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        match self {
            Shape::Sphere { radius } => ok(*radius),
            Shape::Box { half_extents } => half_extents.iter().all(|v| ok(*v)),
            Shape::Cylinder { radius, height } => ok(*radius) && ok(*height),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Primitive {
    pub id: PrimitiveId,
    pub shape: Shape,
    pub pose: Pose,
    pub label: Option<String>,
}

impl Primitive {
    pub fn new(id: impl Into<String>, shape: Shape, pose: Pose) -> Self {
        Primitive {
            id: PrimitiveId::new(id),
            shape,
            pose,
            label: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    Union,
    Intersection,
    Difference,
}

impl OpKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            OpKind::Union => "union",
            OpKind::Intersection => "intersection",
            OpKind::Difference => "difference",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "union" => Some(OpKind::Union),
            "intersection" => Some(OpKind::Intersection),
            "difference" => Some(OpKind::Difference),
            _ => None,
        }
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CsgNode {
    Leaf(PrimitiveId),
    Op {
        id: NodeId,
        kind: OpKind,
        children: Vec<CsgNode>,
    },
}

impl CsgNode {
    pub fn leaf(id: impl Into<String>) -> Self {
        CsgNode::Leaf(PrimitiveId::new(id))
    }

    pub fn op(id: impl Into<String>, kind: OpKind, children: Vec<CsgNode>) -> Self {
        CsgNode::Op {
            id: NodeId::new(id),
            kind,
            children,
        }
    }

    /// Node id: the op id, or the primitive id for a leaf.
    pub fn id_str(&self) -> &str {
        match self {
            CsgNode::Leaf(p) => p.as_str(),
            CsgNode::Op { id, .. } => id.as_str(),
        }
    }

    /// Depth-first search for the node whose id is `id`.
    pub fn find(&self, id: &str) -> Option<&CsgNode> {
        if self.id_str() == id {
            return Some(self);
        }
        match self {
            CsgNode::Leaf(_) => None,
            CsgNode::Op { children, .. } => children.iter().find_map(|c| c.find(id)),
        }
    }

    pub fn find_mut(&mut self, id: &str) -> Option<&mut CsgNode> {
        if self.id_str() == id {
            return Some(self);
        }
        match self {
            CsgNode::Leaf(_) => None,
            CsgNode::Op { children, .. } => children.iter_mut().find_map(|c| c.find_mut(id)),
        }
    }

    /// Pre-order walk over every node.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a CsgNode, Option<&'a CsgNode>)) {
        fn go<'a>(
            node: &'a CsgNode,
            parent: Option<&'a CsgNode>,
            f: &mut impl FnMut(&'a CsgNode, Option<&'a CsgNode>),
        ) {
            f(node, parent);
            if let CsgNode::Op { children, .. } = node {
                for c in children {
                    go(c, Some(node), f);
                }
            }
        }
        go(self, None, f)
    }

    pub fn leaf_ids(&self) -> Vec<PrimitiveId> {
        let mut out = Vec::new();
        self.visit(&mut |n, _| {
            if let CsgNode::Leaf(p) = n {
                out.push(p.clone());
            }
        });
        out
    }
}

/// A named CSG model. Immutable by convention: edits return new scenes.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub name: String,
    pub primitives: BTreeMap<PrimitiveId, Primitive>,
    pub root: CsgNode,
}

impl Scene {
    /// Builds a scene and checks every invariant.
    pub fn new(
        name: impl Into<String>,
        primitives: impl IntoIterator<Item = Primitive>,
        root: CsgNode,
    ) -> Result<Self, SceneError> {
        let mut map = BTreeMap::new();
        for p in primitives {
            if map.contains_key(&p.id) {
                return Err(SceneError::Schema(format!(
                    "duplicate primitive id '{}'",
                    p.id
                )));
            }
            map.insert(p.id.clone(), p);
        }
        let scene = Scene {
            name: name.into(),
            primitives: map,
            root,
        };
        scene.validate()?;
        Ok(scene)
    }

    pub fn primitive(&self, id: &PrimitiveId) -> Option<&Primitive> {
        self.primitives.get(id)
    }

    pub fn find_node(&self, id: &str) -> Option<&CsgNode> {
        self.root.find(id)
    }

    /// Checks arity, id uniqueness, leaf coverage and primitive values.
    pub fn validate(&self) -> Result<(), SceneError> {
        for p in self.primitives.values() {
            if !p.shape.dimensions_valid() {
                return Err(SceneError::Value(format!(
                    "primitive '{}' has a non-positive or non-finite dimension",
                    p.id
                )));
            }
            let pose_finite = crate::geom::is_finite(&p.pose.translation)
                && p.pose.rotation.wxyz().iter().all(|c| c.is_finite());
            if !pose_finite {
                return Err(SceneError::Value(format!(
                    "primitive '{}' has a non-finite pose",
                    p.id
                )));
            }
            if !p.pose.scale_in_range() {
                return Err(SceneError::Value(format!(
                    "primitive '{}' has scale outside [1e-6, 1e6]",
                    p.id
                )));
            }
        }

        let mut node_ids: HashSet<&str> = HashSet::new();
        let mut seen_leaves: HashSet<&PrimitiveId> = HashSet::new();
        let mut err = None;
        self.root.visit(&mut |n, _| {
            if err.is_some() {
                return;
            }
            match n {
                CsgNode::Leaf(p) => {
                    if !self.primitives.contains_key(p) {
                        err = Some(SceneError::Schema(format!(
                            "leaf references unknown primitive '{p}'"
                        )));
                    } else if !seen_leaves.insert(p) {
                        err = Some(SceneError::Schema(format!(
                            "primitive '{p}' appears in more than one leaf"
                        )));
                    }
                }
                CsgNode::Op { id, kind, children } => {
                    if self.primitives.contains_key(&PrimitiveId(id.0.clone()))
                        || !node_ids.insert(id.as_str())
                    {
                        err = Some(SceneError::Schema(format!("duplicate node id '{id}'")));
                        return;
                    }
                    let arity_ok = match kind {
                        OpKind::Difference => children.len() == 2,
                        _ => children.len() >= 2,
                    };
                    if !arity_ok {
                        err = Some(SceneError::Schema(format!(
                            "{kind} node '{id}' has {} children",
                            children.len()
                        )));
                    }
                }
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        if let Some(orphan) = self.primitives.keys().find(|id| !seen_leaves.contains(id)) {
            return Err(SceneError::Schema(format!(
                "primitive '{orphan}' is not referenced by the tree"
            )));
        }
        Ok(())
    }

    /// Structural equality allowing `tol` absolute slack on every number.
    pub fn approx_eq(&self, other: &Scene, tol: f64) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= tol;
        let vclose = |a: &Vec3, b: &Vec3| (0..3).all(|i| close(a[i], b[i]));
        if self.name != other.name || self.root != other.root {
            return false;
        }
        if self.primitives.len() != other.primitives.len() {
            return false;
        }
        self.primitives
            .iter()
            .zip(other.primitives.iter())
            .all(|((ka, a), (kb, b))| {
                let shape_eq = match (a.shape, b.shape) {
                    (Shape::Sphere { radius: r1 }, Shape::Sphere { radius: r2 }) => close(r1, r2),
                    (Shape::Box { half_extents: h1 }, Shape::Box { half_extents: h2 }) => {
                        vclose(&h1, &h2)
                    }
                    (
                        Shape::Cylinder {
                            radius: r1,
                            height: h1,
                        },
                        Shape::Cylinder {
                            radius: r2,
                            height: h2,
                        },
                    ) => close(r1, r2) && close(h1, h2),
                    _ => false,
                };
                let qa = a.pose.rotation.wxyz();
                let qb = b.pose.rotation.wxyz();
                ka == kb
                    && a.label == b.label
                    && shape_eq
                    && vclose(&a.pose.translation, &b.pose.translation)
                    && vclose(&a.pose.scale, &b.pose.scale)
                    && (0..4).all(|i| close(qa[i], qb[i]))
            })
    }
}

// ---------------------------------------------------------------------------
// parsing

pub fn parse_scene(text: &str) -> Result<Scene, SceneError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| SceneError::Syntax(e.to_string()))?;
    let top = as_object(&doc, "document")?;
    check_keys(
        top,
        "document",
        &["name", "primitives", "root"],
        &["name", "primitives", "root"],
    )?;

    let name = top["name"]
        .as_str()
        .ok_or_else(|| schema("'name' must be a string"))?
        .to_string();
    let prims = top["primitives"]
        .as_array()
        .ok_or_else(|| schema("'primitives' must be an array"))?;
    let primitives = prims
        .iter()
        .map(parse_primitive)
        .collect::<Result<Vec<_>, _>>()?;
    let root = parse_node(&top["root"])?;
    Scene::new(name, primitives, root)
}

fn schema(msg: impl Into<String>) -> SceneError {
    SceneError::Schema(msg.into())
}

fn as_object<'a>(v: &'a Value, what: &str) -> Result<&'a Map<String, Value>, SceneError> {
    v.as_object()
        .ok_or_else(|| schema(format!("{what} must be an object")))
}

fn check_keys(
    obj: &Map<String, Value>,
    what: &str,
    allowed: &[&str],
    required: &[&str],
) -> Result<(), SceneError> {
    if let Some(k) = obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(schema(format!("unknown key '{k}' in {what}")));
    }
    if let Some(k) = required.iter().find(|k| !obj.contains_key(**k)) {
        return Err(schema(format!("missing key '{k}' in {what}")));
    }
    Ok(())
}

fn number(v: &Value, what: &str) -> Result<f64, SceneError> {
    let x = v
        .as_f64()
        .ok_or_else(|| schema(format!("{what} must be a number")))?;
    if !x.is_finite() {
        return Err(SceneError::Value(format!("{what} is not finite")));
    }
    Ok(x)
}

fn numbers<const N: usize>(v: &Value, what: &str) -> Result<[f64; N], SceneError> {
    let arr = v
        .as_array()
        .filter(|a| a.len() == N)
        .ok_or_else(|| schema(format!("{what} must be an array of {N} numbers")))?;
    let mut out = [0.0; N];
    for (slot, item) in out.iter_mut().zip(arr) {
        *slot = number(item, what)?;
    }
    Ok(out)
}

fn vec_of(v: &Value, what: &str) -> Result<Vec3, SceneError> {
    let [x, y, z] = numbers::<3>(v, what)?;
    Ok(Vec3::new(x, y, z))
}

fn parse_primitive(v: &Value) -> Result<Primitive, SceneError> {
    let obj = as_object(v, "primitive")?;
    check_keys(
        obj,
        "primitive",
        &["id", "kind", "params", "pose", "label"],
        &["id", "kind", "params"],
    )?;
    let id = obj["id"]
        .as_str()
        .ok_or_else(|| schema("primitive 'id' must be a string"))?;
    let kind = obj["kind"]
        .as_str()
        .ok_or_else(|| schema("primitive 'kind' must be a string"))?;
    let params = as_object(&obj["params"], "params")?;
    let shape = match kind {
        "sphere" => {
            check_keys(params, "sphere params", &["radius"], &["radius"])?;
            Shape::Sphere {
                radius: number(&params["radius"], "radius")?,
            }
        }
        "box" => {
            check_keys(params, "box params", &["half_extents"], &["half_extents"])?;
            Shape::Box {
                half_extents: vec_of(&params["half_extents"], "half_extents")?,
            }
        }
        "cylinder" => {
            check_keys(
                params,
                "cylinder params",
                &["radius", "height"],
                &["radius", "height"],
            )?;
            Shape::Cylinder {
                radius: number(&params["radius"], "radius")?,
                height: number(&params["height"], "height")?,
            }
        }
        other => return Err(schema(format!("unknown primitive kind '{other}'"))),
    };
    let pose = match obj.get("pose") {
        None => Pose::default(),
        Some(p) => parse_pose(p)?,
    };
    let label = match obj.get("label") {
        None => None,
        Some(l) => Some(
            l.as_str()
                .ok_or_else(|| schema("'label' must be a string"))?
                .to_string(),
        ),
    };
    Ok(Primitive {
        id: PrimitiveId::new(id),
        shape,
        pose,
        label,
    })
}

fn parse_pose(v: &Value) -> Result<Pose, SceneError> {
    let obj = as_object(v, "pose")?;
    check_keys(obj, "pose", &["translation", "rotation", "scale"], &[])?;
    let mut pose = Pose::default();
    if let Some(t) = obj.get("translation") {
        pose.translation = vec_of(t, "translation")?;
    }
    if let Some(r) = obj.get("rotation") {
        let [w, x, y, z] = numbers::<4>(r, "rotation")?;
        pose.rotation = Rotation::from_wxyz(w, x, y, z)
            .ok_or_else(|| SceneError::Value("rotation quaternion has zero norm".into()))?;
    }
    if let Some(s) = obj.get("scale") {
        pose.scale = vec_of(s, "scale")?;
        if pose.scale.iter().any(|c| *c <= 0.0) {
            return Err(SceneError::Value(
                "scale components must be positive".into(),
            ));
        }
    }
    Ok(pose)
}

fn parse_node(v: &Value) -> Result<CsgNode, SceneError> {
    let obj = as_object(v, "node")?;
    if obj.contains_key("leaf") {
        check_keys(obj, "leaf node", &["leaf"], &["leaf"])?;
        let id = obj["leaf"]
            .as_str()
            .ok_or_else(|| schema("'leaf' must be a string"))?;
        return Ok(CsgNode::leaf(id));
    }
    check_keys(
        obj,
        "operator node",
        &["op", "id", "children"],
        &["op", "id", "children"],
    )?;
    let op = obj["op"]
        .as_str()
        .ok_or_else(|| schema("'op' must be a string"))?;
    let kind = OpKind::parse(op).ok_or_else(|| schema(format!("unknown operator '{op}'")))?;
    let id = obj["id"]
        .as_str()
        .ok_or_else(|| schema("node 'id' must be a string"))?;
    let children = obj["children"]
        .as_array()
        .ok_or_else(|| schema("'children' must be an array"))?
        .iter()
        .map(parse_node)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CsgNode::op(id, kind, children))
}

// ---------------------------------------------------------------------------
// serialization

fn num(x: f64) -> Value {
    Value::from(round_sig9(x))
}

fn vec_value(v: &Vec3) -> Value {
    Value::Array(v.iter().map(|c| num(*c)).collect())
}

fn node_value(node: &CsgNode) -> Value {
    let mut obj = Map::new();
    match node {
        CsgNode::Leaf(p) => {
            obj.insert("leaf".into(), Value::from(p.as_str()));
        }
        CsgNode::Op { id, kind, children } => {
            obj.insert("op".into(), Value::from(kind.as_str()));
            obj.insert("id".into(), Value::from(id.as_str()));
            obj.insert(
                "children".into(),
                Value::Array(children.iter().map(node_value).collect()),
            );
        }
    }
    Value::Object(obj)
}

fn primitive_value(p: &Primitive) -> Value {
    let mut params = Map::new();
    match p.shape {
        Shape::Sphere { radius } => {
            params.insert("radius".into(), num(radius));
        }
        Shape::Box { half_extents } => {
            params.insert("half_extents".into(), vec_value(&half_extents));
        }
        Shape::Cylinder { radius, height } => {
            params.insert("radius".into(), num(radius));
            params.insert("height".into(), num(height));
        }
    }
    let mut pose = Map::new();
    pose.insert("translation".into(), vec_value(&p.pose.translation));
    pose.insert(
        "rotation".into(),
        Value::Array(p.pose.rotation.wxyz().iter().map(|c| num(*c)).collect()),
    );
    pose.insert("scale".into(), vec_value(&p.pose.scale));

    let mut obj = Map::new();
    obj.insert("id".into(), Value::from(p.id.as_str()));
    obj.insert("kind".into(), Value::from(p.shape.kind_name()));
    obj.insert("params".into(), Value::Object(params));
    obj.insert("pose".into(), Value::Object(pose));
    if let Some(label) = &p.label {
        obj.insert("label".into(), Value::from(label.as_str()));
    }
    Value::Object(obj)
}

/// JSON value of the scene document (keys sorted, numbers rounded).
pub fn scene_to_value(scene: &Scene) -> Value {
    let mut top = Map::new();
    top.insert("name".into(), Value::from(scene.name.as_str()));
    top.insert(
        "primitives".into(),
        Value::Array(scene.primitives.values().map(primitive_value).collect()),
    );
    top.insert("root".into(), node_value(&scene.root));
    Value::Object(top)
}

pub fn serialize_scene(scene: &Scene) -> String {
    let mut out = serde_json::to_string_pretty(&scene_to_value(scene))
        .expect("scene values are always serializable");
    out.push('\n');
    out
}
