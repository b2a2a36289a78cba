//! Interaction session: the model tool (selection and manipulation modes with
//! virtual handles), the tree tool and the information board, driven by a
//! stream of hand and voice events.
//!
//! [`SessionState::step`] is the whole transition relation. It never fails:
//! misuse yields [`Effect::Warning`] or [`Effect::Ignored`], and every event
//! produces at least one effect. Replaying the same events over the same
//! scene always ends in the same state.

mod board;
mod handles;
mod script;

use std::collections::BTreeSet;
use std::fmt;

use crate::edit::{apply_pose_delta, leaves_under, set_operator, PoseDelta};
use crate::geom::{Rotation, Vec3};
use crate::grammar::{parse_command, Command, Parsed, TransformKind};
use crate::scene::{CsgNode, OpKind, PrimitiveId, Scene};
use crate::sdf::primitive_contains;

pub use board::{display_states, information_board, DisplayState, InfoBoard};
pub use handles::{
    Axis, HandleLayout, HandleTarget, BOX_HALF_RATIO, HIT_TOLERANCE, MIN_AXIS_LENGTH,
    SPHERE_RADIUS_RATIO,
};
pub use script::{event_from_json, event_to_json, parse_script, script_line};

/// Scale factors a single axis grab may reach.
pub const MIN_GRAB_SCALE: f64 = 0.01;
pub const MAX_GRAB_SCALE: f64 = 100.0;

/// Rotations smaller than this (radians) are treated as no rotation.
const ANGLE_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum InputEvent {
    Voice(String),
    HandMove(Vec3),
    GrabStart { pos: Vec3, orientation: Rotation },
    GrabMove { pos: Vec3, orientation: Rotation },
    GrabEnd,
    PalmUp(bool),
    GrabTreeNode(String),
    ReleaseTreeNode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Idle,
    Selection,
    Manipulation(TransformKind),
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Idle => "Idle",
            Mode::Selection => "Selection",
            Mode::Manipulation(_) => "Manipulation",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Manipulation(kind) => write!(f, "Manipulation({kind})"),
            other => f.write_str(other.name()),
        }
    }
}

/// An active handle grab. The scene during the grab is always `baseline`
/// plus exactly one delta derived from the hand motion since grab start.
#[derive(Debug, Clone, PartialEq)]
pub struct GrabBinding {
    pub target: HandleTarget,
    pub start_hand_pos: Vec3,
    pub start_hand_orientation: Rotation,
    pub pivot: Vec3,
    pub axis_length: f64,
    pub baseline: Scene,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Warning {
    NoSelection,
    NothingHighlighted,
    NeedTwo,
    NoGroup,
    Unsupported,
    LeafNotOperator,
    NoNodeGrabbed,
    UnknownNode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IgnoreReason {
    NotRecognized,
    WrongMode,
    NoHandleHit,
    NoActiveGrab,
    GrabActive,
    TreeHidden,
    NoNodeGrabbed,
    NoChange,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Effect {
    ModeChanged(Mode),
    HighlightChanged(Vec<PrimitiveId>),
    SelectionChanged(Vec<PrimitiveId>),
    GroupChanged(Vec<Vec<PrimitiveId>>),
    SceneEdited,
    GrabStarted(HandleTarget),
    GrabCommitted,
    TreeShown,
    TreeHidden,
    TreeNodeGrabbed(String),
    TreeNodeReleased,
    OperatorChanged { node: String, kind: OpKind },
    Warning(Warning),
    Ignored(IgnoreReason),
}

fn id_list(ids: &[PrimitiveId]) -> String {
    if ids.is_empty() {
        "-".to_string()
    } else {
        ids.iter()
            .map(PrimitiveId::as_str)
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl fmt::Display for Effect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Effect::ModeChanged(m) => write!(f, "ModeChanged {m}"),
            Effect::HighlightChanged(ids) => write!(f, "HighlightChanged {}", id_list(ids)),
            Effect::SelectionChanged(ids) => write!(f, "SelectionChanged {}", id_list(ids)),
            Effect::GroupChanged(groups) => {
                let text: Vec<String> =
                    groups.iter().map(|g| format!("[{}]", id_list(g))).collect();
                if text.is_empty() {
                    f.write_str("GroupChanged -")
                } else {
                    write!(f, "GroupChanged {}", text.join(" "))
                }
            }
            Effect::SceneEdited => f.write_str("SceneEdited"),
            Effect::GrabStarted(t) => write!(f, "GrabStarted {t}"),
            Effect::GrabCommitted => f.write_str("GrabCommitted"),
            Effect::TreeShown => f.write_str("TreeShown"),
            Effect::TreeHidden => f.write_str("TreeHidden"),
            Effect::TreeNodeGrabbed(id) => write!(f, "TreeNodeGrabbed {id}"),
            Effect::TreeNodeReleased => f.write_str("TreeNodeReleased"),
            Effect::OperatorChanged { node, kind } => write!(f, "OperatorChanged {node} {kind}"),
            Effect::Warning(w) => write!(f, "Warning({w:?})"),
            Effect::Ignored(r) => write!(f, "Ignored({r:?})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogEntry {
    pub event: InputEvent,
    pub effects: Vec<Effect>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionState {
    pub scene: Scene,
    pub mode: Mode,
    pub highlighted: BTreeSet<PrimitiveId>,
    pub selected: BTreeSet<PrimitiveId>,
    /// Disjoint subsets of `selected`, oldest first.
    pub groups: Vec<BTreeSet<PrimitiveId>>,
    pub hand_pos: Vec3,
    pub active_grab: Option<GrabBinding>,
    pub tree_visible: bool,
    pub grabbed_tree_node: Option<String>,
    pub event_log: Vec<LogEntry>,
}

pub fn new_session(scene: Scene) -> SessionState {
    SessionState {
        scene,
        mode: Mode::Idle,
        highlighted: BTreeSet::new(),
        selected: BTreeSet::new(),
        groups: Vec::new(),
        hand_pos: Vec3::zeros(),
        active_grab: None,
        tree_visible: false,
        grabbed_tree_node: None,
        event_log: Vec::new(),
    }
}

/// Left fold of [`SessionState::step`] over `events`.
pub fn run_script(scene: Scene, events: &[InputEvent]) -> (SessionState, Vec<Effect>) {
    let mut state = new_session(scene);
    let mut all = Vec::new();
    for event in events {
        all.extend(state.apply(event.clone()));
    }
    (state, all)
}

impl SessionState {
    pub fn step(mut self, event: InputEvent) -> (SessionState, Vec<Effect>) {
        let effects = self.apply(event);
        (self, effects)
    }

    /// In-place form of [`step`](Self::step) for single-writer owners.
    pub fn apply(&mut self, event: InputEvent) -> Vec<Effect> {
        let effects = self.transition(&event);
        debug_assert!(!effects.is_empty());
        self.event_log.push(LogEntry {
            event,
            effects: effects.clone(),
        });
        effects
    }

    pub fn display_states(&self) -> std::collections::BTreeMap<PrimitiveId, DisplayState> {
        display_states(self)
    }

    pub fn information_board(&self) -> InfoBoard {
        information_board(self)
    }

    /// Handles are shown only in manipulation mode with something selected.
    pub fn handle_layout(&self) -> Option<HandleLayout> {
        match self.mode {
            Mode::Manipulation(_) => HandleLayout::around(&self.scene, &self.selected),
            _ => None,
        }
    }

    /// The effect log, one `<event number> <effect>` line per effect.
    pub fn effect_log_text(&self) -> String {
        let mut out = String::new();
        for (n, entry) in self.event_log.iter().enumerate() {
            for e in &entry.effects {
                out.push_str(&format!("{} {}\n", n + 1, e));
            }
        }
        out
    }

    /// Structural invariants that must hold between any two steps.
    pub fn check_invariants(&self) -> Result<(), String> {
        self.scene.validate().map_err(|e| e.to_string())?;
        let known = |ids: &BTreeSet<PrimitiveId>| {
            ids.iter().all(|id| self.scene.primitives.contains_key(id))
        };
        if !known(&self.highlighted) || !known(&self.selected) {
            return Err("state references unknown primitives".into());
        }
        let mut seen = BTreeSet::new();
        for g in &self.groups {
            if g.len() < 2 {
                return Err("group with fewer than two members".into());
            }
            if !g.is_subset(&self.selected) {
                return Err("group member is not selected".into());
            }
            if g.iter().any(|id| !seen.insert(id.clone())) {
                return Err("groups overlap".into());
            }
        }
        if self.active_grab.is_some() && !matches!(self.mode, Mode::Manipulation(_)) {
            return Err("grab outside manipulation mode".into());
        }
        if self.grabbed_tree_node.is_some() && !self.tree_visible {
            return Err("tree node grabbed while tree hidden".into());
        }
        if let Some(node) = &self.grabbed_tree_node {
            if self.scene.find_node(node).is_none() {
                return Err(format!("grabbed tree node '{node}' not in scene"));
            }
        }
        Ok(())
    }

    fn transition(&mut self, event: &InputEvent) -> Vec<Effect> {
        match event {
            InputEvent::Voice(utterance) => match parse_command(utterance) {
                Parsed::NotRecognized => vec![Effect::Ignored(IgnoreReason::NotRecognized)],
                Parsed::Command(cmd) => self.on_command(cmd),
            },
            InputEvent::HandMove(pos) => self.on_hand_move(*pos),
            InputEvent::GrabStart { pos, orientation } => self.on_grab_start(*pos, *orientation),
            InputEvent::GrabMove { pos, orientation } => self.on_grab_move(*pos, *orientation),
            InputEvent::GrabEnd => match self.active_grab.take() {
                Some(_) => vec![Effect::GrabCommitted],
                None => vec![Effect::Ignored(IgnoreReason::NoActiveGrab)],
            },
            InputEvent::PalmUp(up) => self.on_palm(*up),
            InputEvent::GrabTreeNode(id) => self.on_grab_tree(id),
            InputEvent::ReleaseTreeNode => match self.grabbed_tree_node.take() {
                Some(_) => vec![Effect::TreeNodeReleased],
                None => vec![Effect::Ignored(IgnoreReason::NoNodeGrabbed)],
            },
        }
    }

    fn commit_grab(&mut self, effects: &mut Vec<Effect>) {
        if self.active_grab.take().is_some() {
            effects.push(Effect::GrabCommitted);
        }
    }

    fn on_command(&mut self, cmd: Command) -> Vec<Effect> {
        let mut effects = Vec::new();
        match cmd {
            Command::EnterSelection => {
                if self.mode == Mode::Selection {
                    return vec![Effect::Ignored(IgnoreReason::NoChange)];
                }
                self.commit_grab(&mut effects);
                self.mode = Mode::Selection;
                effects.push(Effect::ModeChanged(self.mode));
            }
            Command::SetTransform(kind) => {
                if self.selected.is_empty() {
                    return vec![Effect::Warning(Warning::NoSelection)];
                }
                if self.mode == Mode::Manipulation(kind) {
                    return vec![Effect::Ignored(IgnoreReason::NoChange)];
                }
                self.commit_grab(&mut effects);
                self.mode = Mode::Manipulation(kind);
                effects.push(Effect::ModeChanged(self.mode));
            }
            Command::ChangeOperator(kind) => return self.on_change_operator(kind),
            Command::Append | Command::Remove | Command::Group | Command::Ungroup => {
                if self.mode != Mode::Selection {
                    return vec![Effect::Ignored(IgnoreReason::WrongMode)];
                }
                match cmd {
                    Command::Append => self.on_append(&mut effects),
                    Command::Remove => self.on_remove(&mut effects),
                    Command::Group => self.on_group(&mut effects),
                    _ => self.on_ungroup(&mut effects),
                }
            }
        }
        effects
    }

    fn groups_effect(&self) -> Effect {
        Effect::GroupChanged(
            self.groups
                .iter()
                .map(|g| g.iter().cloned().collect())
                .collect(),
        )
    }

    fn on_append(&mut self, effects: &mut Vec<Effect>) {
        if self.highlighted.is_empty() {
            effects.push(Effect::Warning(Warning::NothingHighlighted));
            return;
        }
        let before = self.selected.len();
        self.selected.extend(self.highlighted.iter().cloned());
        if self.selected.len() == before {
            effects.push(Effect::Ignored(IgnoreReason::NoChange));
        } else {
            effects.push(Effect::SelectionChanged(
                self.selected.iter().cloned().collect(),
            ));
        }
    }

    fn on_remove(&mut self, effects: &mut Vec<Effect>) {
        if self.highlighted.is_empty() {
            effects.push(Effect::Warning(Warning::NothingHighlighted));
            return;
        }
        let removed: BTreeSet<PrimitiveId> = self
            .selected
            .intersection(&self.highlighted)
            .cloned()
            .collect();
        if removed.is_empty() {
            effects.push(Effect::Ignored(IgnoreReason::NoChange));
            return;
        }
        self.selected.retain(|id| !removed.contains(id));
        effects.push(Effect::SelectionChanged(
            self.selected.iter().cloned().collect(),
        ));
        let groups_before = self.groups.len();
        self.groups.retain(|g| g.is_disjoint(&removed));
        if self.groups.len() != groups_before {
            effects.push(self.groups_effect());
        }
    }

    fn on_group(&mut self, effects: &mut Vec<Effect>) {
        if self.selected.len() < 2 {
            effects.push(Effect::Warning(Warning::NeedTwo));
            return;
        }
        // groups are subsets of the selection, so the new group absorbs them all
        if self.groups.len() == 1 && self.groups[0] == self.selected {
            effects.push(Effect::Ignored(IgnoreReason::NoChange));
            return;
        }
        self.groups = vec![self.selected.clone()];
        effects.push(self.groups_effect());
    }

    fn on_ungroup(&mut self, effects: &mut Vec<Effect>) {
        if self.groups.is_empty() {
            effects.push(Effect::Warning(Warning::NoGroup));
            return;
        }
        let target = self
            .groups
            .iter()
            .position(|g| !g.is_disjoint(&self.highlighted))
            .unwrap_or(self.groups.len() - 1);
        self.groups.remove(target);
        effects.push(self.groups_effect());
    }

    fn on_hand_move(&mut self, pos: Vec3) -> Vec<Effect> {
        self.hand_pos = pos;
        if self.mode != Mode::Selection {
            return vec![Effect::Ignored(IgnoreReason::WrongMode)];
        }
        let hovered: BTreeSet<PrimitiveId> = self
            .scene
            .primitives
            .values()
            .filter(|p| primitive_contains(p, &pos))
            .map(|p| p.id.clone())
            .collect();
        if hovered == self.highlighted {
            return vec![Effect::Ignored(IgnoreReason::NoChange)];
        }
        self.highlighted = hovered;
        vec![Effect::HighlightChanged(
            self.highlighted.iter().cloned().collect(),
        )]
    }

    fn on_grab_start(&mut self, pos: Vec3, orientation: Rotation) -> Vec<Effect> {
        let Mode::Manipulation(kind) = self.mode else {
            return vec![Effect::Ignored(IgnoreReason::WrongMode)];
        };
        if self.active_grab.is_some() {
            return vec![Effect::Ignored(IgnoreReason::GrabActive)];
        }
        let Some(layout) = self.handle_layout() else {
            return vec![Effect::Warning(Warning::NoSelection)];
        };
        let Some(target) = layout.hit(&pos) else {
            return vec![Effect::Ignored(IgnoreReason::NoHandleHit)];
        };
        if target == HandleTarget::CenterSphere && kind == TransformKind::Scale {
            return vec![Effect::Warning(Warning::Unsupported)];
        }
        self.hand_pos = pos;
        self.active_grab = Some(GrabBinding {
            target,
            start_hand_pos: pos,
            start_hand_orientation: orientation,
            pivot: layout.origin,
            axis_length: layout.axis_length,
            baseline: self.scene.clone(),
        });
        vec![Effect::GrabStarted(target)]
    }

    fn on_grab_move(&mut self, pos: Vec3, orientation: Rotation) -> Vec<Effect> {
        let (Some(grab), Mode::Manipulation(kind)) = (&self.active_grab, self.mode) else {
            return vec![Effect::Ignored(IgnoreReason::NoActiveGrab)];
        };
        let delta = grab_delta(grab, kind, pos, orientation);
        let edited = match delta {
            None => Ok(grab.baseline.clone()),
            Some(d) => apply_pose_delta(&grab.baseline, &self.selected, &d),
        };
        self.hand_pos = pos;
        match edited {
            Ok(scene) => {
                self.scene = scene;
                vec![Effect::SceneEdited]
            }
            // only reachable through degenerate hand input; the scene stays put
            Err(_) => vec![Effect::Ignored(IgnoreReason::NoChange)],
        }
    }

    fn on_palm(&mut self, up: bool) -> Vec<Effect> {
        if up == self.tree_visible {
            return vec![Effect::Ignored(IgnoreReason::NoChange)];
        }
        self.tree_visible = up;
        if up {
            return vec![Effect::TreeShown];
        }
        let mut effects = Vec::new();
        if self.grabbed_tree_node.take().is_some() {
            effects.push(Effect::TreeNodeReleased);
        }
        effects.push(Effect::TreeHidden);
        effects
    }

    fn on_grab_tree(&mut self, id: &str) -> Vec<Effect> {
        if !self.tree_visible {
            return vec![Effect::Ignored(IgnoreReason::TreeHidden)];
        }
        let Ok(leaves) = leaves_under(&self.scene, id) else {
            return vec![Effect::Warning(Warning::UnknownNode)];
        };
        self.grabbed_tree_node = Some(id.to_string());
        let mut effects = vec![Effect::TreeNodeGrabbed(id.to_string())];
        let leaves: BTreeSet<PrimitiveId> = leaves.into_iter().collect();
        if leaves != self.highlighted {
            self.highlighted = leaves;
            effects.push(Effect::HighlightChanged(
                self.highlighted.iter().cloned().collect(),
            ));
        }
        effects
    }

    fn on_change_operator(&mut self, kind: OpKind) -> Vec<Effect> {
        let Some(node_id) = self.grabbed_tree_node.clone() else {
            return vec![Effect::Warning(Warning::NoNodeGrabbed)];
        };
        match self.scene.find_node(&node_id) {
            Some(CsgNode::Leaf(_)) => return vec![Effect::Warning(Warning::LeafNotOperator)],
            Some(CsgNode::Op { kind: current, .. }) if *current == kind => {
                return vec![Effect::Ignored(IgnoreReason::NoChange)]
            }
            Some(_) => {}
            None => return vec![Effect::Warning(Warning::UnknownNode)],
        }
        let Ok(scene) = set_operator(&self.scene, &node_id, kind) else {
            return vec![Effect::Warning(Warning::UnknownNode)];
        };
        self.scene = scene;
        if let Some(grab) = &mut self.active_grab {
            if let Ok(baseline) = set_operator(&grab.baseline, &node_id, kind) {
                grab.baseline = baseline;
            }
        }
        vec![Effect::OperatorChanged {
            node: node_id,
            kind,
        }]
    }
}

/// Delta implied by the hand motion since grab start; `None` for no motion.
fn grab_delta(
    grab: &GrabBinding,
    kind: TransformKind,
    pos: Vec3,
    orientation: Rotation,
) -> Option<PoseDelta> {
    let moved = pos - grab.start_hand_pos;
    let turned = orientation.compose(&grab.start_hand_orientation.inverse());
    match (grab.target, kind) {
        (HandleTarget::AxisHandle(axis), TransformKind::Translate) => {
            let along = moved.dot(&axis.unit());
            (along != 0.0).then(|| PoseDelta::Translate(axis.unit() * along))
        }
        (HandleTarget::AxisHandle(axis), TransformKind::Scale) => {
            let factor = (1.0 + moved.dot(&axis.unit()) / grab.axis_length)
                .clamp(MIN_GRAB_SCALE, MAX_GRAB_SCALE);
            let mut factors = Vec3::repeat(1.0);
            factors[axis as usize] = factor;
            (factor != 1.0).then_some(PoseDelta::ScaleAxes {
                factors,
                pivot: grab.pivot,
            })
        }
        (HandleTarget::AxisHandle(axis), TransformKind::Rotate) => {
            let angle = turned.twist_angle(&axis.unit());
            (angle.abs() > ANGLE_EPSILON).then(|| PoseDelta::RotateAbout {
                axis: axis.unit(),
                angle,
                pivot: grab.pivot,
            })
        }
        (HandleTarget::CenterSphere, TransformKind::Translate) => {
            (moved != Vec3::zeros()).then_some(PoseDelta::Translate(moved))
        }
        (HandleTarget::CenterSphere, TransformKind::Rotate) => {
            let (axis, angle) = turned.unit().axis_angle()?;
            (angle.abs() > ANGLE_EPSILON).then(|| PoseDelta::RotateAbout {
                axis: axis.into_inner(),
                angle,
                pivot: grab.pivot,
            })
        }
        // refused at grab start
        (HandleTarget::CenterSphere, TransformKind::Scale) => None,
    }
}
