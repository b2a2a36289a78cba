#![allow(dead_code)]

use std::path::PathBuf;

use midair_core::geom::vec3;
use midair_core::session::HandleTarget;
use midair_core::{apply_pose_delta, set_operator, PoseDelta};
use midair_core::{
    new_session, parse_scene, Aabb, CsgNode, Effect, InputEvent, Mode, OpKind, Pose, Primitive,
    PrimitiveId, Rotation, Scene, SessionState, Shape, Vec3,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FIXTURES: [&str; 3] = ["bracket", "lamp", "table"];

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn read_fixture(rel: &str) -> String {
    let path = fixtures_dir().join(rel);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn scene(name: &str) -> Scene {
    parse_scene(&read_fixture(&format!("scenes/{name}.json"))).expect("fixture parses")
}

pub fn fixture_scenes() -> Vec<Scene> {
    FIXTURES.iter().map(|n| scene(n)).collect()
}

fn random_vec(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Vec3 {
    vec3(
        rng.random_range(lo..hi),
        rng.random_range(lo..hi),
        rng.random_range(lo..hi),
    )
}

pub fn random_pose(rng: &mut ChaCha8Rng) -> Pose {
    let axis = random_vec(rng, -1.0, 1.0) + vec3(0.0, 0.0, 1e-3);
    Pose {
        translation: random_vec(rng, -2.0, 2.0),
        rotation: Rotation::from_axis_angle(&axis, rng.random_range(-3.1..3.1)).unwrap(),
        scale: random_vec(rng, 0.3, 2.0),
    }
}

pub fn random_shape(rng: &mut ChaCha8Rng) -> Shape {
    match rng.random_range(0..3) {
        0 => Shape::Sphere {
            radius: rng.random_range(0.1..1.5),
        },
        1 => Shape::Box {
            half_extents: random_vec(rng, 0.1, 1.0),
        },
        _ => Shape::Cylinder {
            radius: rng.random_range(0.1..1.0),
            height: rng.random_range(0.2..2.0),
        },
    }
}

/// Valid scene with 1..=8 primitives under a random operator tree.
pub fn random_scene(seed: u64) -> Scene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=8usize);
    let prims: Vec<Primitive> = (0..n)
        .map(|i| {
            Primitive::new(
                format!("p{i}"),
                random_shape(&mut rng),
                random_pose(&mut rng),
            )
        })
        .collect();
    let mut nodes: Vec<CsgNode> = (0..n).map(|i| CsgNode::leaf(format!("p{i}"))).collect();
    let mut next = 0;
    while nodes.len() > 1 {
        let kind = match rng.random_range(0..3) {
            0 => OpKind::Union,
            1 => OpKind::Intersection,
            _ => OpKind::Difference,
        };
        let take = if kind == OpKind::Difference {
            2
        } else {
            rng.random_range(2..=nodes.len().min(3))
        };
        let at = rng.random_range(0..=nodes.len() - take);
        let children: Vec<CsgNode> = nodes.drain(at..at + take).collect();
        nodes.insert(at, CsgNode::op(format!("n{next}"), kind, children));
        next += 1;
    }
    Scene::new(format!("random {seed}"), prims, nodes.pop().unwrap()).unwrap()
}

/// Uniform points in `b` grown by `margin` on every side.
pub fn sample_points(b: &Aabb, margin: f64, count: usize, seed: u64) -> Vec<Vec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo = b.min - Vec3::repeat(margin);
    let size = b.size() + Vec3::repeat(2.0 * margin);
    (0..count)
        .map(|_| {
            lo + vec3(
                rng.random::<f64>(),
                rng.random::<f64>(),
                rng.random::<f64>(),
            )
            .component_mul(&size)
        })
        .collect()
}

const UTTERANCES: [&str; 16] = [
    "select",
    "append",
    "remove",
    "group",
    "un-group",
    "translate",
    "rotate",
    "scale",
    "change to union",
    "change to inter",
    "change to sub",
    "deselect",
    "",
    "SELECT",
    "un group",
    "ungroup",
];

fn random_rotation(rng: &mut ChaCha8Rng) -> Rotation {
    let axis = random_vec(rng, -1.0, 1.0) + vec3(1e-3, 0.0, 0.0);
    Rotation::from_axis_angle(&axis, rng.random_range(-3.5..3.5)).unwrap()
}

/// The command a purposeful user would likely say next.
fn next_command(state: &SessionState, rng: &mut ChaCha8Rng) -> &'static str {
    const TRANSFORMS: [&str; 3] = ["translate", "rotate", "scale"];
    match state.mode {
        Mode::Idle => "select",
        Mode::Selection if !state.highlighted.is_subset(&state.selected) => "append",
        Mode::Selection if state.selected.len() >= 2 && rng.random_bool(0.3) => "group",
        Mode::Selection if !state.selected.is_empty() => TRANSFORMS[rng.random_range(0..3)],
        Mode::Selection => "append",
        Mode::Manipulation(_) if rng.random_bool(0.3) => "select",
        Mode::Manipulation(_) => TRANSFORMS[rng.random_range(0..3)],
    }
}

/// Event biased toward meaningful input: hands inside primitives, grabs on
/// handles, tree grabs on real node ids.
pub fn random_event(state: &SessionState, rng: &mut ChaCha8Rng) -> InputEvent {
    let prims: Vec<&Primitive> = state.scene.primitives.values().collect();
    let near_prim = |rng: &mut ChaCha8Rng| {
        let p = prims[rng.random_range(0..prims.len())];
        p.pose.translation + random_vec(rng, -0.2, 0.2)
    };
    let handle_pos = |rng: &mut ChaCha8Rng| match state.handle_layout() {
        Some(l) if rng.random_bool(0.8) => {
            let i = rng.random_range(0..4);
            let c = if i == 3 { l.origin } else { l.box_centers[i] };
            c + random_vec(rng, -0.5, 0.5) * l.box_half
        }
        _ => random_vec(rng, -3.0, 3.0),
    };
    match rng.random_range(0..100) {
        0..=24 => {
            let word = if rng.random_bool(0.5) {
                next_command(state, rng)
            } else {
                UTTERANCES[rng.random_range(0..UTTERANCES.len())]
            };
            InputEvent::Voice(word.to_string())
        }
        25..=44 => InputEvent::HandMove(if rng.random_bool(0.8) {
            near_prim(rng)
        } else {
            random_vec(rng, -3.0, 3.0)
        }),
        45..=54 => InputEvent::GrabStart {
            pos: handle_pos(rng),
            orientation: random_rotation(rng),
        },
        55..=74 => {
            let scale = if rng.random_bool(0.05) { 1e3 } else { 1.0 };
            let pos = state.hand_pos + random_vec(rng, -0.5, 0.5) * scale;
            InputEvent::GrabMove {
                pos,
                orientation: random_rotation(rng),
            }
        }
        75..=81 => InputEvent::GrabEnd,
        82..=87 => InputEvent::PalmUp(rng.random_bool(0.6)),
        88..=95 => {
            let mut ids = Vec::new();
            state
                .scene
                .root
                .visit(&mut |n, _| ids.push(n.id_str().to_string()));
            ids.push("missing".into());
            InputEvent::GrabTreeNode(ids[rng.random_range(0..ids.len())].clone())
        }
        _ => InputEvent::ReleaseTreeNode,
    }
}

/// Checks one transition against the confinement, disjointness and clamp
/// rules; `Err` describes the first violation.
pub fn check_step(
    before: &SessionState,
    event: &InputEvent,
    effects: &[Effect],
    after: &SessionState,
) -> Result<(), String> {
    after.check_invariants()?;
    if effects.is_empty() {
        return Err("event produced no effect".into());
    }
    let voice_in_selection =
        matches!(event, InputEvent::Voice(_)) && before.mode == Mode::Selection;
    if (before.selected != after.selected || before.groups != after.groups) && !voice_in_selection {
        return Err(format!(
            "selection changed outside selection mode by {event:?}"
        ));
    }
    if before.scene != after.scene {
        let grab_edit =
            matches!(event, InputEvent::GrabMove { .. }) && before.active_grab.is_some();
        let op_edit = effects
            .iter()
            .any(|e| matches!(e, Effect::OperatorChanged { .. }));
        if !grab_edit && !op_edit {
            return Err(format!("scene changed by {event:?}"));
        }
    }
    if let (Some(grab), InputEvent::GrabMove { .. }) = (&after.active_grab, event) {
        for id in &after.selected {
            let now = after.scene.primitives[id].pose.scale;
            let base = grab.baseline.primitives[id].pose.scale;
            for k in 0..3 {
                let ratio = now[k] / base[k];
                if !(0.01 - 1e-12..=100.0 + 1e-9).contains(&ratio) {
                    return Err(format!("scale ratio {ratio} on {id}"));
                }
            }
        }
        if grab.target == HandleTarget::CenterSphere
            && matches!(
                after.mode,
                Mode::Manipulation(midair_core::TransformKind::Scale)
            )
        {
            return Err("center grab active in scale mode".into());
        }
    }
    let groups: Vec<&PrimitiveId> = after.groups.iter().flatten().collect();
    let unique: std::collections::BTreeSet<_> = groups.iter().collect();
    if unique.len() != groups.len() {
        return Err("groups overlap".into());
    }
    Ok(())
}

pub struct FuzzReport {
    pub steps: u64,
    /// Effect names seen, without payloads except for warnings.
    pub effect_kinds: std::collections::BTreeSet<String>,
}

fn effect_kind(e: &Effect) -> String {
    match e {
        Effect::Warning(_) | Effect::Ignored(_) => e.to_string(),
        _ => e
            .to_string()
            .split(' ')
            .next()
            .unwrap_or_default()
            .to_string(),
    }
}

/// Runs `sequences` random event sequences of up to `max_len` events on
/// `scene`, checking every step.
pub fn fuzz_session(
    scene: &Scene,
    sequences: u64,
    max_len: usize,
    seed: u64,
) -> Result<FuzzReport, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut steps = 0;
    let mut effect_kinds = std::collections::BTreeSet::new();
    for n in 0..sequences {
        let mut state = new_session(scene.clone());
        for _ in 0..rng.random_range(1..=max_len) {
            let event = random_event(&state, &mut rng);
            let before = state.clone();
            let effects = state.apply(event.clone());
            check_step(&before, &event, &effects, &state)
                .map_err(|e| format!("sequence {n}: {e}"))?;
            effect_kinds.extend(effects.iter().map(effect_kind));
            steps += 1;
        }
    }
    Ok(FuzzReport {
        steps,
        effect_kinds,
    })
}

fn ids(list: &[&str]) -> std::collections::BTreeSet<PrimitiveId> {
    list.iter().map(|s| PrimitiveId::new(*s)).collect()
}

/// Expected bracket after the seven study tasks, built from direct edits.
pub fn study_tasks_expected() -> Scene {
    let scene = scene("bracket");
    let pivot = vec3(-0.4, 0.55, 0.0);
    let scene = apply_pose_delta(
        &scene,
        &ids(&["cube"]),
        &PoseDelta::RotateAbout {
            axis: Vec3::y(),
            angle: std::f64::consts::FRAC_PI_2,
            pivot,
        },
    )
    .unwrap();
    let scene = apply_pose_delta(
        &scene,
        &ids(&["cube"]),
        &PoseDelta::ScaleAxes {
            factors: vec3(1.5, 1.0, 1.0),
            pivot,
        },
    )
    .unwrap();
    let scene = apply_pose_delta(
        &scene,
        &ids(&["post"]),
        &PoseDelta::Translate(vec3(-0.2, 0.0, 0.25)),
    )
    .unwrap();
    set_operator(&scene, "tower", OpKind::Difference).unwrap()
}
