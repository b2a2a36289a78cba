//! Voice command lexicon and recognition statistics.
//!
//! Utterances are matched exactly against a fixed lexicon after
//! normalization. There is no fuzzy matching: a miss is reported as
//! [`Parsed::NotRecognized`] and left to the caller to log.

use std::fmt;

use crate::error::StatsError;
use crate::scene::OpKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransformKind {
    Translate,
    Rotate,
    Scale,
}

impl TransformKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TransformKind::Translate => "translate",
            TransformKind::Rotate => "rotate",
            TransformKind::Scale => "scale",
        }
    }
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Command {
    EnterSelection,
    Append,
    Remove,
    Group,
    Ungroup,
    SetTransform(TransformKind),
    ChangeOperator(OpKind),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parsed {
    Command(Command),
    NotRecognized,
}

/// Every utterance with its command and the explanation shown to the user.
pub const LEXICON: [(&str, Command, &str); 11] = [
    (
        "select",
        Command::EnterSelection,
        "switch to selection mode",
    ),
    (
        "append",
        Command::Append,
        "add the highlighted primitives to the selection",
    ),
    (
        "remove",
        Command::Remove,
        "drop the highlighted primitives from the selection",
    ),
    (
        "group",
        Command::Group,
        "join all selected primitives into one group",
    ),
    (
        "un-group",
        Command::Ungroup,
        "dissolve the highlighted or most recent group",
    ),
    (
        "translate",
        Command::SetTransform(TransformKind::Translate),
        "move the selection with the handles",
    ),
    (
        "rotate",
        Command::SetTransform(TransformKind::Rotate),
        "rotate the selection with the handles",
    ),
    (
        "scale",
        Command::SetTransform(TransformKind::Scale),
        "scale the selection along a handle axis",
    ),
    (
        "change to union",
        Command::ChangeOperator(OpKind::Union),
        "make the grabbed tree node a union",
    ),
    (
        "change to inter",
        Command::ChangeOperator(OpKind::Intersection),
        "make the grabbed tree node an intersection",
    ),
    (
        "change to sub",
        Command::ChangeOperator(OpKind::Difference),
        "make the grabbed tree node a subtraction",
    ),
];

/// Trim, lowercase and collapse whitespace runs to one space.
pub fn normalize(utterance: &str) -> String {
    utterance
        .split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn parse_command(utterance: &str) -> Parsed {
    let text = normalize(utterance);
    // "un-group", "un group" and "un - group" all name the same command
    let ungroup = text.replace('-', " ");
    if normalize(&ungroup) == "un group" {
        return Parsed::Command(Command::Ungroup);
    }
    LEXICON
        .iter()
        .find(|(word, _, _)| *word == text)
        .map_or(Parsed::NotRecognized, |(_, cmd, _)| Parsed::Command(*cmd))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecognitionRecord {
    pub user_label: String,
    pub recognized: u64,
    pub unrecognized: u64,
}

impl RecognitionRecord {
    pub fn new(user_label: impl Into<String>, recognized: u64, unrecognized: u64) -> Self {
        RecognitionRecord {
            user_label: user_label.into(),
            recognized,
            unrecognized,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecognitionReport {
    /// Percentages rounded to one decimal, in record order.
    pub per_user_rate: Vec<f64>,
    /// Unweighted mean of the rounded per-user rates, rounded to one decimal.
    pub mean_rate: f64,
    pub total_recognized: u64,
    pub total_unrecognized: u64,
}

impl RecognitionReport {
    /// Share of all utterances recognized, for comparison with the mean.
    pub fn pooled_rate(&self) -> f64 {
        round1(
            100.0 * self.total_recognized as f64
                / (self.total_recognized + self.total_unrecognized) as f64,
        )
    }
}

fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

/// Per-user success rates and their mean.
///
/// The mean is taken over the per-user rates as reported (already rounded to
/// one decimal), not over the pooled counts.
pub fn recognition_stats(records: &[RecognitionRecord]) -> Result<RecognitionReport, StatsError> {
    if records.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let mut per_user_rate = Vec::with_capacity(records.len());
    for r in records {
        let total = r.recognized + r.unrecognized;
        if total == 0 {
            return Err(StatsError::ZeroTotal(r.user_label.clone()));
        }
        per_user_rate.push(round1(100.0 * r.recognized as f64 / total as f64));
    }
    let mean_rate = round1(per_user_rate.iter().sum::<f64>() / per_user_rate.len() as f64);
    Ok(RecognitionReport {
        per_user_rate,
        mean_rate,
        total_recognized: records.iter().map(|r| r.recognized).sum(),
        total_unrecognized: records.iter().map(|r| r.unrecognized).sum(),
    })
}
