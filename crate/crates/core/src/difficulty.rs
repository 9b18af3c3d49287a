//! Score brackets and the between-set difficulty update.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default step applied to the difficulty factor per bracket.
pub const DEFAULT_DELTA: f64 = 0.2;

/// Repetition-rate thresholds for one exercise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerformanceBrackets {
    pub excellent_min_rpm: f64,
    pub good_min_rpm: f64,
}

impl Default for PerformanceBrackets {
    fn default() -> Self {
        Self {
            excellent_min_rpm: 20.0,
            good_min_rpm: 10.0,
        }
    }
}

impl PerformanceBrackets {
    pub fn validate(&self) -> Result<()> {
        if !(self.good_min_rpm > 0.0 && self.excellent_min_rpm > self.good_min_rpm) {
            return Err(Error::validation(
                "brackets",
                format!(
                    "need excellent_min_rpm ({}) > good_min_rpm ({}) > 0",
                    self.excellent_min_rpm, self.good_min_rpm
                ),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ScoreBracket {
    Poor,
    Good,
    Excellent,
}

impl ScoreBracket {
    pub const ALL: [ScoreBracket; 3] = [ScoreBracket::Excellent, ScoreBracket::Good, ScoreBracket::Poor];

    pub fn as_str(self) -> &'static str {
        match self {
            ScoreBracket::Excellent => "Excellent",
            ScoreBracket::Good => "Good",
            ScoreBracket::Poor => "Poor",
        }
    }
}

impl fmt::Display for ScoreBracket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn reps_per_minute(reps: u32, set_duration: f64) -> Result<f64> {
    if !(set_duration > 0.0 && set_duration.is_finite()) {
        return Err(Error::OutOfRange {
            what: "set_duration",
            value: set_duration,
            lo: f64::MIN_POSITIVE,
            hi: f64::INFINITY,
        });
    }
    Ok(f64::from(reps) * 60.0 / set_duration)
}

/// Classifies a set. A rate exactly on a threshold earns the higher bracket.
pub fn bracket_score(reps: u32, set_duration: f64, brackets: &PerformanceBrackets) -> Result<ScoreBracket> {
    let rpm = reps_per_minute(reps, set_duration)?;
    Ok(if rpm >= brackets.excellent_min_rpm {
        ScoreBracket::Excellent
    } else if rpm >= brackets.good_min_rpm {
        ScoreBracket::Good
    } else {
        ScoreBracket::Poor
    })
}

pub fn delta_for(bracket: ScoreBracket, delta: f64) -> f64 {
    match bracket {
        ScoreBracket::Excellent => delta,
        ScoreBracket::Good => 0.0,
        ScoreBracket::Poor => -delta,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DifficultyUpdate {
    pub set_index: usize,
    pub bracket: ScoreBracket,
    pub f_diff_after: f64,
}

/// Difficulty factor for one exercise side, with its update history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifficultyState {
    pub f_diff: f64,
    pub delta: f64,
    pub history: Vec<DifficultyUpdate>,
}

impl DifficultyState {
    pub fn new(f_diff: f64, delta: f64) -> Result<Self> {
        crate::error::check_range("f_diff", f_diff, 0.0, 1.0)?;
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::OutOfRange {
                what: "delta",
                value: delta,
                lo: 0.0,
                hi: 1.0,
            });
        }
        Ok(Self {
            f_diff,
            delta,
            history: Vec::new(),
        })
    }

    /// Applies one set's bracket and returns the next state; the new factor is
    /// clamped to `[0, 1]`.
    pub fn update(&self, bracket: ScoreBracket) -> Self {
        let f_diff = (self.f_diff + delta_for(bracket, self.delta)).clamp(0.0, 1.0);
        let mut history = self.history.clone();
        history.push(DifficultyUpdate {
            set_index: history.len(),
            bracket,
            f_diff_after: f_diff,
        });
        Self {
            f_diff,
            delta: self.delta,
            history,
        }
    }
}

/// Free-function form of [`DifficultyState::update`].
pub fn update_difficulty(state: &DifficultyState, bracket: ScoreBracket) -> DifficultyState {
    state.update(bracket)
}
