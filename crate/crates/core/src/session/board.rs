//! Projections of a session state for display: per-primitive colors and the
//! information board.

use std::collections::BTreeMap;
use std::fmt;

use crate::grammar::LEXICON;
use crate::scene::PrimitiveId;

use super::{Mode, SessionState};

/// Per-primitive display state. Grouped beats selected beats highlighted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DisplayState {
    Default,
    Highlighted,
    Selected,
    Grouped,
}

impl DisplayState {
    pub fn as_str(&self) -> &'static str {
        match self {
            DisplayState::Default => "default",
            DisplayState::Highlighted => "highlighted",
            DisplayState::Selected => "selected",
            DisplayState::Grouped => "grouped",
        }
    }
}

impl fmt::Display for DisplayState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn display_states(state: &SessionState) -> BTreeMap<PrimitiveId, DisplayState> {
    state
        .scene
        .primitives
        .keys()
        .map(|id| {
            let display = if state.groups.iter().any(|g| g.contains(id)) {
                DisplayState::Grouped
            } else if state.selected.contains(id) {
                DisplayState::Selected
            } else if state.highlighted.contains(id) {
                DisplayState::Highlighted
            } else {
                DisplayState::Default
            };
            (id.clone(), display)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfoBoard {
    pub mode_text: String,
    pub active_transform: Option<String>,
    /// Every voice command with its explanation.
    pub commands: Vec<(String, String)>,
}

pub fn information_board(state: &SessionState) -> InfoBoard {
    let active_transform = match state.mode {
        Mode::Manipulation(kind) => Some(kind.as_str().to_string()),
        _ => None,
    };
    InfoBoard {
        mode_text: state.mode.name().to_string(),
        active_transform,
        commands: LEXICON
            .iter()
            .map(|(word, _, help)| (word.to_string(), help.to_string()))
            .collect(),
    }
}
