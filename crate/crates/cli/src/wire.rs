//! JSON wire protocol between the session service and its clients.
//!
//! Client frames hold exactly one key: `event` (a script event object),
//! `load_scene` (a scene document) or `request_mesh`
//! (`{"resolution": n, "per_primitive": bool}`). The server answers with
//! `state`, `effects`, `mesh` and `error` frames. [`Connection`] holds the
//! per-connection session and turns client frames into replies.

use std::collections::BTreeSet;

use midair_core::geom::round_sig9;
use midair_core::mesher::{MAX_RESOLUTION, MIN_RESOLUTION};
use midair_core::scene::scene_to_value;
use midair_core::session::{event_from_json, HandleLayout};
use midair_core::{
    mesh_volume, new_session, parse_scene, polygonize, polygonize_node, CsgNode, Effect, GridSpec,
    InputEvent, MeshError, Mode, Scene, SessionState, TriangleMesh, Vec3,
};
use serde_json::{json, Map, Value};

/// Mesh resolution used until a client asks for another.
pub const DEFAULT_MESH_RESOLUTION: u32 = 48;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WireError {
    pub code: &'static str,
    pub message: String,
}

impl WireError {
    fn new(code: &'static str, message: impl Into<String>) -> Self {
        WireError {
            code,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClientMessage {
    Event(InputEvent),
    LoadScene(Scene),
    RequestMesh {
        resolution: u32,
        per_primitive: bool,
    },
}

pub fn parse_client_message(text: &str) -> Result<ClientMessage, WireError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| WireError::new("malformed_frame", e.to_string()))?;
    let obj = value.as_object().filter(|o| o.len() == 1).ok_or_else(|| {
        WireError::new(
            "malformed_frame",
            "frame must be an object with exactly one key",
        )
    })?;
    let (key, payload) = obj.iter().next().expect("one key");
    match key.as_str() {
        "event" => event_from_json(payload)
            .map(ClientMessage::Event)
            .map_err(|m| WireError::new("bad_event", m)),
        "load_scene" => parse_scene(&payload.to_string())
            .map(ClientMessage::LoadScene)
            .map_err(|e| WireError::new("bad_scene", e.to_string())),
        "request_mesh" => parse_mesh_request(payload),
        other => Err(WireError::new(
            "malformed_frame",
            format!("unknown message '{other}'"),
        )),
    }
}

fn parse_mesh_request(payload: &Value) -> Result<ClientMessage, WireError> {
    let bad = |m: String| WireError::new("bad_request", m);
    let obj = payload
        .as_object()
        .ok_or_else(|| bad("request_mesh needs an object".into()))?;
    if let Some(k) = obj
        .keys()
        .find(|k| *k != "resolution" && *k != "per_primitive")
    {
        return Err(bad(format!("unknown key '{k}' in request_mesh")));
    }
    let resolution = obj
        .get("resolution")
        .and_then(Value::as_u64)
        .ok_or_else(|| bad("'resolution' must be a positive integer".into()))?;
    let resolution = u32::try_from(resolution)
        .ok()
        .filter(|r| (MIN_RESOLUTION..=MAX_RESOLUTION).contains(r))
        .ok_or_else(|| {
            WireError::new(
                "bad_resolution",
                MeshError::ResolutionOutOfRange(resolution.min(u32::MAX as u64) as u32).to_string(),
            )
        })?;
    let per_primitive = match obj.get("per_primitive") {
        None => false,
        Some(v) => v
            .as_bool()
            .ok_or_else(|| bad("'per_primitive' must be a boolean".into()))?,
    };
    Ok(ClientMessage::RequestMesh {
        resolution,
        per_primitive,
    })
}

fn vec_json(v: &Vec3) -> Value {
    json!([round_sig9(v.x), round_sig9(v.y), round_sig9(v.z)])
}

fn layout_json(layout: &HandleLayout) -> Value {
    json!({
        "origin": vec_json(&layout.origin),
        "axis_length": round_sig9(layout.axis_length),
        "box_half": round_sig9(layout.box_half),
        "sphere_radius": round_sig9(layout.sphere_radius),
        "box_centers": layout.box_centers.iter().map(vec_json).collect::<Vec<_>>(),
    })
}

/// Tree nodes in pre-order with parent links. A node is highlighted when it
/// lies in the grabbed subtree or is a leaf whose primitive is highlighted.
fn tree_json(state: &SessionState) -> Value {
    let grabbed: BTreeSet<String> = match &state.grabbed_tree_node {
        Some(id) => {
            let mut ids = BTreeSet::new();
            if let Some(node) = state.scene.find_node(id) {
                node.visit(&mut |n, _| {
                    ids.insert(n.id_str().to_string());
                });
            }
            ids
        }
        None => BTreeSet::new(),
    };
    let mut nodes = Vec::new();
    state.scene.root.visit(&mut |n, parent| {
        let kind = match n {
            CsgNode::Leaf(id) => state
                .scene
                .primitive(id)
                .map_or("leaf", |p| p.shape.kind_name()),
            CsgNode::Op { kind, .. } => kind.as_str(),
        };
        let lit = grabbed.contains(n.id_str())
            || matches!(n, CsgNode::Leaf(id) if state.highlighted.contains(id));
        nodes.push(json!({
            "id": n.id_str(),
            "kind": kind,
            "leaf": matches!(n, CsgNode::Leaf(_)),
            "parent": parent.map(|p| p.id_str()),
            "highlighted": lit,
        }));
    });
    json!({
        "visible": state.tree_visible,
        "grabbed": state.grabbed_tree_node,
        "nodes": nodes,
    })
}

pub fn state_message(state: &SessionState, seq: u64) -> Value {
    let display: Map<String, Value> = state
        .display_states()
        .into_iter()
        .map(|(id, d)| (id.to_string(), json!(d.as_str())))
        .collect();
    let board = state.information_board();
    let transform = match state.mode {
        Mode::Manipulation(kind) => Some(kind.as_str()),
        _ => None,
    };
    json!({"state": {
        "seq": seq,
        "mode": state.mode.name(),
        "transform": transform,
        "display_states": display,
        "handle_layout": state.handle_layout().as_ref().map(layout_json),
        "active_grab": state.active_grab.as_ref().map(|g| g.target.to_string()),
        "info_board": {
            "mode_text": board.mode_text,
            "active_transform": board.active_transform,
            "commands": board.commands.iter()
                .map(|(u, e)| json!({"utterance": u, "explanation": e}))
                .collect::<Vec<_>>(),
        },
        "tree": tree_json(state),
        "scene": scene_to_value(&state.scene),
    }})
}

pub fn effects_message(effects: &[Effect], seq: u64) -> Value {
    json!({"effects": effects.iter().map(ToString::to_string).collect::<Vec<_>>(), "seq": seq})
}

pub fn error_message(err: &WireError) -> Value {
    json!({"error": {"code": err.code, "message": err.message}})
}

fn mesh_arrays(mesh: &TriangleMesh) -> (Vec<f64>, Vec<u32>) {
    let vertices = mesh.vertices.iter().flat_map(|v| [v.x, v.y, v.z]).collect();
    let triangles = mesh.triangles.iter().flatten().copied().collect();
    (vertices, triangles)
}

/// A mesh to compute for the scene as of event `seq`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshJob {
    pub seq: u64,
    pub scene: Scene,
    pub resolution: u32,
    pub per_primitive: bool,
}

/// Runs a mesh job and returns the `mesh` frame or an `error` frame.
pub fn run_mesh_job(job: &MeshJob) -> Value {
    let spec = match GridSpec::new(job.resolution) {
        Ok(s) => s,
        Err(e) => return error_message(&WireError::new("bad_resolution", e.to_string())),
    };
    let mesh = match polygonize(&job.scene, &spec) {
        Ok(m) => m,
        Err(e) => return error_message(&WireError::new("mesh_failed", e.to_string())),
    };
    let (vertices, triangles) = mesh_arrays(&mesh);
    let mut body = json!({
        "seq": job.seq,
        "resolution": job.resolution,
        "vertices": vertices,
        "triangles": triangles,
        "volume": mesh_volume(&mesh),
    });
    if job.per_primitive {
        let mut parts = Vec::new();
        for id in job.scene.primitives.keys() {
            let leaf = CsgNode::Leaf(id.clone());
            match polygonize_node(&job.scene, &leaf, &spec) {
                Ok(m) => {
                    let (v, t) = mesh_arrays(&m);
                    parts.push(json!({"id": id.as_str(), "vertices": v, "triangles": t}));
                }
                Err(e) => return error_message(&WireError::new("mesh_failed", e.to_string())),
            }
        }
        body["primitives"] = Value::Array(parts);
    }
    json!({ "mesh": body })
}

/// Replies to one client frame, plus a mesh job when the geometry changed.
#[derive(Debug, Default)]
pub struct Outcome {
    pub replies: Vec<Value>,
    pub mesh_job: Option<MeshJob>,
}

/// One client's session with its sequence counter and mesh settings.
pub struct Connection {
    pub state: SessionState,
    pub seq: u64,
    pub resolution: u32,
    pub per_primitive: bool,
}

impl Connection {
    pub fn new(scene: Scene) -> Self {
        Connection {
            state: new_session(scene),
            seq: 0,
            resolution: DEFAULT_MESH_RESOLUTION,
            per_primitive: false,
        }
    }

    pub fn mesh_job(&self) -> MeshJob {
        MeshJob {
            seq: self.seq,
            scene: self.state.scene.clone(),
            resolution: self.resolution,
            per_primitive: self.per_primitive,
        }
    }

    /// Frames sent right after the client connects.
    pub fn greeting(&self) -> Outcome {
        Outcome {
            replies: vec![state_message(&self.state, self.seq)],
            mesh_job: Some(self.mesh_job()),
        }
    }

    pub fn handle_text(&mut self, text: &str) -> Outcome {
        match parse_client_message(text) {
            Err(e) => Outcome {
                replies: vec![error_message(&e)],
                mesh_job: None,
            },
            Ok(msg) => self.handle(msg),
        }
    }

    pub fn handle(&mut self, msg: ClientMessage) -> Outcome {
        match msg {
            ClientMessage::Event(event) => {
                self.seq += 1;
                let effects = self.state.apply(event);
                let edited = effects
                    .iter()
                    .any(|e| matches!(e, Effect::SceneEdited | Effect::OperatorChanged { .. }));
                Outcome {
                    replies: vec![
                        state_message(&self.state, self.seq),
                        effects_message(&effects, self.seq),
                    ],
                    mesh_job: edited.then(|| self.mesh_job()),
                }
            }
            ClientMessage::LoadScene(scene) => {
                self.seq += 1;
                self.state = new_session(scene);
                Outcome {
                    replies: vec![state_message(&self.state, self.seq)],
                    mesh_job: Some(self.mesh_job()),
                }
            }
            ClientMessage::RequestMesh {
                resolution,
                per_primitive,
            } => {
                self.resolution = resolution;
                self.per_primitive = per_primitive;
                Outcome {
                    replies: Vec::new(),
                    mesh_job: Some(self.mesh_job()),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use midair_core::geom::vec3;
    use midair_core::{Pose, Primitive, Shape};

    fn sphere_scene() -> Scene {
        Scene::new(
            "",
            [Primitive::new(
                "s",
                Shape::Sphere { radius: 1.0 },
                Pose::default(),
            )],
            CsgNode::leaf("s"),
        )
        .unwrap()
    }

    #[test]
    fn client_frames() {
        assert_eq!(
            parse_client_message(r#"{"event": {"voice": "select"}}"#).unwrap(),
            ClientMessage::Event(InputEvent::Voice("select".into()))
        );
        assert_eq!(
            parse_client_message(r#"{"request_mesh": {"resolution": 16}}"#).unwrap(),
            ClientMessage::RequestMesh {
                resolution: 16,
                per_primitive: false
            }
        );
        assert_eq!(
            parse_client_message("{").unwrap_err().code,
            "malformed_frame"
        );
        assert_eq!(
            parse_client_message(r#"{"event": {"jump": 1}}"#)
                .unwrap_err()
                .code,
            "bad_event"
        );
        assert_eq!(
            parse_client_message(r#"{"request_mesh": {"resolution": 4}}"#)
                .unwrap_err()
                .code,
            "bad_resolution"
        );
        assert_eq!(
            parse_client_message(r#"{"load_scene": {}}"#)
                .unwrap_err()
                .code,
            "bad_scene"
        );
        assert_eq!(
            parse_client_message(r#"{"a": 1, "b": 2}"#)
                .unwrap_err()
                .code,
            "malformed_frame"
        );
    }

    #[test]
    fn event_gets_state_and_effects() {
        let mut conn = Connection::new(sphere_scene());
        let out = conn.handle_text(r#"{"event": {"voice": "select"}}"#);
        assert_eq!(out.replies.len(), 2);
        assert_eq!(out.replies[0]["state"]["mode"], "Selection");
        assert_eq!(out.replies[0]["state"]["seq"], 1);
        assert_eq!(out.replies[1]["effects"][0], "ModeChanged Selection");
        assert!(out.mesh_job.is_none());
    }

    #[test]
    fn handles_appear_in_manipulation() {
        let mut conn = Connection::new(sphere_scene());
        for f in [
            r#"{"event": {"voice": "select"}}"#,
            r#"{"event": {"hand": [0, 0, 0]}}"#,
            r#"{"event": {"voice": "append"}}"#,
            r#"{"event": {"voice": "translate"}}"#,
        ] {
            conn.handle_text(f);
        }
        let state = state_message(&conn.state, conn.seq);
        assert_eq!(state["state"]["display_states"]["s"], "selected");
        assert_eq!(
            state["state"]["handle_layout"]["origin"],
            json!([0.0, 0.0, 0.0])
        );
        let out = conn.handle_text(r#"{"event": {"grab_start": {"pos": [0, 0, 0]}}}"#);
        assert_eq!(out.replies[0]["state"]["active_grab"], "center");
        let out = conn.handle_text(r#"{"event": {"grab_move": {"pos": [0.5, 0, 0]}}}"#);
        let job = out.mesh_job.unwrap();
        assert_eq!(job.seq, 6);
        let t = job
            .scene
            .primitives
            .values()
            .next()
            .unwrap()
            .pose
            .translation;
        assert_eq!(t, vec3(0.5, 0.0, 0.0));
    }

    #[test]
    fn mesh_frame() {
        let job = MeshJob {
            seq: 3,
            scene: sphere_scene(),
            resolution: 16,
            per_primitive: true,
        };
        let msg = run_mesh_job(&job);
        let mesh = &msg["mesh"];
        assert_eq!(mesh["seq"], 3);
        assert_eq!(mesh["vertices"].as_array().unwrap().len() % 3, 0);
        assert!(mesh["volume"].as_f64().unwrap() > 3.5);
        assert_eq!(mesh["primitives"][0]["id"], "s");
    }

    #[test]
    fn tree_lists_nodes_with_parents() {
        let conn = Connection::new(sphere_scene());
        let state = state_message(&conn.state, 0);
        let nodes = &state["state"]["tree"]["nodes"];
        assert_eq!(nodes[0]["id"], "s");
        assert_eq!(nodes[0]["kind"], "sphere");
        assert_eq!(nodes[0]["parent"], Value::Null);
    }
}
