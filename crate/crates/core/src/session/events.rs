//! Session event log and its line-delimited JSON encoding.
//!
//! Each line is one object with the keys `time_s`, `kind` and `payload`, in
//! that order. Payload keys follow field declaration order.

use serde::{Deserialize, Serialize};

use crate::difficulty::ScoreBracket;
use crate::error::{Error, Result};
use crate::exercise::{ExerciseId, Side};
use crate::session::cognitive::WordVerdict;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionEvent {
    pub time_s: f64,
    #[serde(flatten)]
    pub data: EventData,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case", deny_unknown_fields)]
pub enum EventData {
    SessionStart {
        seed: u64,
        exercises: usize,
    },
    CalibrationSample {
        exercise: ExerciseId,
        side: Side,
        fraction: f64,
        touched: bool,
        time_to_touch: f64,
    },
    CalibrationDone {
        exercise: ExerciseId,
        side: Side,
        max_reached_fraction: f64,
        f_diff_start: f64,
    },
    SetStart {
        exercise: ExerciseId,
        side: Side,
        set: u32,
        f_diff: f64,
        target: [f64; 3],
    },
    Rep {
        exercise: ExerciseId,
        side: Side,
        set: u32,
        count: u32,
        peak_pa: f64,
    },
    TooHard {
        exercise: ExerciseId,
        side: Side,
        set: u32,
        peak_pa: f64,
    },
    CognitiveWord {
        exercise: ExerciseId,
        side: Side,
        set: u32,
        category: String,
        word: String,
        verdict: WordVerdict,
    },
    SetComplete {
        exercise: ExerciseId,
        side: Side,
        set: u32,
        reps: u32,
        rpm: f64,
        bracket: ScoreBracket,
    },
    DifficultyChanged {
        exercise: ExerciseId,
        side: Side,
        set: u32,
        bracket: ScoreBracket,
        delta: f64,
        old: f64,
        new: f64,
    },
    TugStart {
        exercise: ExerciseId,
        distance_m: f64,
    },
    TugComplete {
        exercise: ExerciseId,
        duration_s: f64,
    },
    ExerciseComplete {
        exercise: ExerciseId,
        /// Final difficulty per side; absent for timed exercises.
        f_diff_right: Option<f64>,
        f_diff_left: Option<f64>,
    },
    SessionEnd {
        duration_s: f64,
    },
}

impl EventData {
    pub fn kind(&self) -> &'static str {
        match self {
            EventData::SessionStart { .. } => "session_start",
            EventData::CalibrationSample { .. } => "calibration_sample",
            EventData::CalibrationDone { .. } => "calibration_done",
            EventData::SetStart { .. } => "set_start",
            EventData::Rep { .. } => "rep",
            EventData::TooHard { .. } => "too_hard",
            EventData::CognitiveWord { .. } => "cognitive_word",
            EventData::SetComplete { .. } => "set_complete",
            EventData::DifficultyChanged { .. } => "difficulty_changed",
            EventData::TugStart { .. } => "tug_start",
            EventData::TugComplete { .. } => "tug_complete",
            EventData::ExerciseComplete { .. } => "exercise_complete",
            EventData::SessionEnd { .. } => "session_end",
        }
    }
}

impl SessionEvent {
    pub fn kind(&self) -> &'static str {
        self.data.kind()
    }
}

pub fn serialize_log(events: &[SessionEvent]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&serde_json::to_string(e).expect("events always serialize"));
        out.push('\n');
    }
    out
}

/// Parses a JSONL log. Blank lines are skipped; errors carry the 1-based
/// line number.
pub fn parse_log(text: &str) -> Result<Vec<SessionEvent>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::parse(i + 1, e.to_string())))
        .collect()
}
