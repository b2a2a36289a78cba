//! Headless CSG modeling engine with a deterministic gesture and voice
//! interaction session on top.
//!
//! * [`scene`]: CSG tree model and its strict JSON document format.
//! * [`sdf`]: signed distance, exact membership and bounds.
//! * [`edit`]: pose deltas, operator changes, subtree queries.
//! * [`mesher`]: marching-cubes polygonization, volumes, OBJ/STL export.
//! * [`grammar`]: voice command lexicon and recognition statistics.
//! * [`session`]: the interaction state machine.

pub mod edit;
pub mod error;
pub mod geom;
pub mod grammar;
pub mod mesher;
pub mod scene;
pub mod sdf;
pub mod session;

pub use edit::{apply_pose_delta, leaves_under, set_operator, PoseDelta};
pub use error::{EditError, MeshError, SceneError, ScriptError, StatsError};
pub use geom::{Aabb, Pose, Rotation, Vec3};
pub use grammar::{
    parse_command, recognition_stats, Command, Parsed, RecognitionRecord, RecognitionReport,
    TransformKind,
};
pub use mesher::{
    export_mesh, mesh_volume, monte_carlo_volume, polygonize, polygonize_node, GridSpec,
    MeshFormat, TriangleMesh,
};
pub use scene::{
    parse_scene, serialize_scene, CsgNode, NodeId, OpKind, Primitive, PrimitiveId, Scene, Shape,
};
pub use sdf::{contains, node_aabb, signed_distance};
pub use session::{new_session, run_script, Effect, InputEvent, Mode, SessionState};
