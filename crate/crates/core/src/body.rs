//! Per-person segment lengths in meters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest accepted segment length. Anything shorter is almost certainly a
/// unit mistake (cm entered as m would be far above the upper bound instead).
pub const MIN_SEGMENT_M: f64 = 0.05;
pub const MAX_SEGMENT_M: f64 = 2.0;

/// Body dimensions used by every exercise model.
///
/// Seated quantities are measured from the hip-frame origin, which sits
/// between the hip joints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodyDimensions {
    pub upper_leg_length: f64,
    pub lower_leg_length: f64,
    pub hip_width: f64,
    pub upper_arm_length: f64,
    pub forearm_length: f64,
    pub shoulder_width: f64,
    /// Hip-frame origin to shoulder while seated.
    pub seated_shoulder_height: f64,
    /// Floor to shoulder while standing.
    pub standing_shoulder_height: f64,
    /// Floor to hip joint while standing.
    pub standing_hip_height: f64,
}

impl BodyDimensions {
    /// Segment proportions of an adult of the given stature, from classic
    /// anthropometric ratio tables.
    pub fn from_height(height: f64) -> Self {
        Self {
            upper_leg_length: 0.245 * height,
            lower_leg_length: 0.246 * height,
            hip_width: 0.191 * height,
            upper_arm_length: 0.186 * height,
            forearm_length: 0.146 * height,
            shoulder_width: 0.259 * height,
            seated_shoulder_height: 0.34 * height,
            standing_shoulder_height: 0.818 * height,
            standing_hip_height: 0.53 * height,
        }
    }

    pub fn fields(&self) -> [(&'static str, f64); 9] {
        [
            ("upper_leg_length", self.upper_leg_length),
            ("lower_leg_length", self.lower_leg_length),
            ("hip_width", self.hip_width),
            ("upper_arm_length", self.upper_arm_length),
            ("forearm_length", self.forearm_length),
            ("shoulder_width", self.shoulder_width),
            ("seated_shoulder_height", self.seated_shoulder_height),
            ("standing_shoulder_height", self.standing_shoulder_height),
            ("standing_hip_height", self.standing_hip_height),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in self.fields() {
            if !(MIN_SEGMENT_M..=MAX_SEGMENT_M).contains(&value) {
                return Err(Error::validation(
                    name,
                    format!("{value} m is outside [{MIN_SEGMENT_M}, {MAX_SEGMENT_M}]"),
                ));
            }
        }
        if self.hip_width >= self.shoulder_width + 0.5 {
            return Err(Error::validation(
                "hip_width",
                format!(
                    "{} m is implausibly wide for shoulder_width {} m (swapped fields?)",
                    self.hip_width, self.shoulder_width
                ),
            ));
        }
        Ok(())
    }

    pub fn arm_length(&self) -> f64 {
        self.upper_arm_length + self.forearm_length
    }

    /// Parses and validates a JSON document with one key per field.
    pub fn from_json(text: &str) -> Result<Self> {
        let body: BodyDimensions = serde_json::from_str(text)?;
        body.validate()?;
        Ok(body)
    }
}
