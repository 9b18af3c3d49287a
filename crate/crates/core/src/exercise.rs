//! Body-parameterized exercise geometry in the hip frame.
//!
//! The hip frame has its origin midway between the hip joints, X pointing
//! forward, Z pointing up and Y pointing to the user's left. Every model
//! produces the right-side target; left-side targets are the reflection
//! across the X-Z plane.
//!
//! Each repetition exercise is described by an anchor point `x_0` (the 50 %
//! difficulty target, a function of [`BodyDimensions`]) and an absolute
//! difficulty vector `d`. A difficulty factor `f` in `[0, 1]` then selects
//!
//! ```text
//! x_min    = x_0 - d / 2
//! x_max    = x_0 + d / 2
//! x_target = x_min + f * d
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::body::BodyDimensions;
use crate::difficulty::PerformanceBrackets;
use crate::error::{check_range, Error, Result};
use crate::Vec3;

/// Distance the robot retreats for the Timed Up and Go test.
pub const TUG_DISTANCE_M: f64 = 3.0;

/// Knee extension (measured from 90 degrees of flexion) used by the seated
/// forward kick when a model does not override it.
pub const DEFAULT_KNEE_EXTENSION_RAD: f64 = std::f64::consts::PI / 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExerciseId {
    SeatedReachForward,
    SeatedForwardKick,
    SeatedCalfRaises,
    StandingReachAcross,
    SeatedWindmills,
    SeatedHighKnees,
    StandingHighKnees,
    StandingReachDown,
    SeatedReachSide,
    TimedUpAndGo,
}

impl ExerciseId {
    pub const ALL: [ExerciseId; 10] = [
        ExerciseId::SeatedReachForward,
        ExerciseId::SeatedForwardKick,
        ExerciseId::SeatedCalfRaises,
        ExerciseId::StandingReachAcross,
        ExerciseId::SeatedWindmills,
        ExerciseId::SeatedHighKnees,
        ExerciseId::StandingHighKnees,
        ExerciseId::StandingReachDown,
        ExerciseId::SeatedReachSide,
        ExerciseId::TimedUpAndGo,
    ];

    /// The six exercises of the reference study session, in order.
    pub const STUDY_SEQUENCE: [ExerciseId; 6] = [
        ExerciseId::SeatedReachForward,
        ExerciseId::SeatedForwardKick,
        ExerciseId::SeatedCalfRaises,
        ExerciseId::StandingReachAcross,
        ExerciseId::SeatedWindmills,
        ExerciseId::SeatedHighKnees,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExerciseId::SeatedReachForward => "seated_reach_forward",
            ExerciseId::SeatedForwardKick => "seated_forward_kick",
            ExerciseId::SeatedCalfRaises => "seated_calf_raises",
            ExerciseId::StandingReachAcross => "standing_reach_across",
            ExerciseId::SeatedWindmills => "seated_windmills",
            ExerciseId::SeatedHighKnees => "seated_high_knees",
            ExerciseId::StandingHighKnees => "standing_high_knees",
            ExerciseId::StandingReachDown => "standing_reach_down",
            ExerciseId::SeatedReachSide => "seated_reach_side",
            ExerciseId::TimedUpAndGo => "timed_up_and_go",
        }
    }
}

impl fmt::Display for ExerciseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExerciseId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExerciseId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::UnknownExercise(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Right,
    Left,
}

impl Side {
    /// Sides in session order.
    pub const BOTH: [Side; 2] = [Side::Right, Side::Left];

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Right => "right",
            Side::Left => "left",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "right" => Ok(Side::Right),
            "left" => Ok(Side::Left),
            other => Err(Error::validation("side", format!("`{other}` is not right or left"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Posture {
    Seated,
    Standing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BodyPart {
    Hand,
    Foot,
    Knee,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExerciseKind {
    /// Timed sets of repeated touches against a personalized target.
    Repetition,
    /// The robot retreats and times the user's approach.
    TimedUpAndGo { distance_m: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExerciseModel {
    pub id: ExerciseId,
    pub name: &'static str,
    pub posture: Posture,
    pub contact_body_part: BodyPart,
    pub kind: ExerciseKind,
    /// Only meaningful for the seated forward kick.
    pub knee_extension_angle: Option<f64>,
    pub difficulty_vector: Vec3,
    pub brackets: PerformanceBrackets,
    pub cognitive_task: Option<&'static str>,
}

impl ExerciseModel {
    pub fn is_repetition(&self) -> bool {
        matches!(self.kind, ExerciseKind::Repetition)
    }

    /// Right-side anchor point `x_0` in the hip frame.
    pub fn anchor_point(&self, body: &BodyDimensions) -> Result<Vec3> {
        body.validate()?;
        let arm = body.arm_length();
        let b = body;
        let p = match self.id {
            ExerciseId::SeatedForwardKick => {
                let theta = self.knee_extension_angle.unwrap_or(DEFAULT_KNEE_EXTENSION_RAD);
                Vec3::new(
                    b.upper_leg_length + b.lower_leg_length * theta.sin(),
                    0.5 * b.hip_width,
                    b.lower_leg_length * theta.cos(),
                )
            }
            ExerciseId::SeatedReachForward => {
                Vec3::new(0.9 * arm, 0.5 * b.shoulder_width, b.seated_shoulder_height)
            }
            ExerciseId::SeatedCalfRaises => Vec3::new(b.upper_leg_length, 0.5 * b.hip_width, 0.10),
            ExerciseId::StandingReachAcross => Vec3::new(
                0.55 * arm,
                -0.5 * b.shoulder_width,
                0.4 * (b.standing_shoulder_height - b.standing_hip_height),
            ),
            ExerciseId::SeatedWindmills => Vec3::new(
                0.3 * arm,
                0.5 * b.shoulder_width + 0.4 * arm,
                b.seated_shoulder_height,
            ),
            ExerciseId::SeatedHighKnees => Vec3::new(b.upper_leg_length, 0.5 * b.hip_width, 0.12),
            ExerciseId::StandingHighKnees => Vec3::new(
                0.7 * b.upper_leg_length,
                0.5 * b.hip_width,
                -0.3 * b.upper_leg_length,
            ),
            ExerciseId::StandingReachDown => Vec3::new(
                0.4 * arm,
                0.5 * b.shoulder_width,
                -0.45 * b.standing_hip_height,
            ),
            ExerciseId::SeatedReachSide => Vec3::new(
                0.1 * arm,
                0.5 * b.shoulder_width + 0.8 * arm,
                b.seated_shoulder_height - 0.1,
            ),
            ExerciseId::TimedUpAndGo => Vec3::new(
                TUG_DISTANCE_M,
                0.0,
                0.4 * (b.standing_shoulder_height - b.standing_hip_height),
            ),
        };
        debug_assert!(p.iter().all(|c| c.is_finite()));
        Ok(p)
    }

    /// The three difficulty points and the personalized target for one side.
    pub fn target_set(&self, body: &BodyDimensions, f_diff: f64, side: Side) -> Result<TargetSet> {
        check_range("f_diff", f_diff, 0.0, 1.0)?;
        let x_0 = self.anchor_point(body)?;
        let d = self.difficulty_vector;
        let x_min = x_0 - 0.5 * d;
        let x_max = x_0 + 0.5 * d;
        let x_target = x_min + f_diff * d;
        let set = TargetSet {
            x_min,
            x_0,
            x_max,
            x_target,
            f_diff,
            side: Side::Right,
        };
        Ok(match side {
            Side::Right => set,
            Side::Left => set.mirrored(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetSet {
    pub x_min: Vec3,
    pub x_0: Vec3,
    pub x_max: Vec3,
    pub x_target: Vec3,
    pub f_diff: f64,
    pub side: Side,
}

impl TargetSet {
    fn mirrored(self) -> Self {
        TargetSet {
            x_min: mirror_point(self.x_min),
            x_0: mirror_point(self.x_0),
            x_max: mirror_point(self.x_max),
            x_target: mirror_point(self.x_target),
            f_diff: self.f_diff,
            side: match self.side {
                Side::Right => Side::Left,
                Side::Left => Side::Right,
            },
        }
    }
}

/// Reflects a hip-frame point across the sagittal (X-Z) plane.
pub fn mirror_point(p: Vec3) -> Vec3 {
    Vec3::new(p.x, -p.y, p.z)
}

fn model(
    id: ExerciseId,
    name: &'static str,
    posture: Posture,
    contact_body_part: BodyPart,
    d: [f64; 3],
) -> ExerciseModel {
    ExerciseModel {
        id,
        name,
        posture,
        contact_body_part,
        kind: ExerciseKind::Repetition,
        knee_extension_angle: None,
        difficulty_vector: Vec3::from(d),
        brackets: PerformanceBrackets::default(),
        cognitive_task: None,
    }
}

/// Nine repetition models followed by the Timed Up and Go pseudo-model.
pub fn catalog() -> Vec<ExerciseModel> {
    use BodyPart::*;
    use ExerciseId::*;
    use Posture::*;

    let mut kick = model(SeatedForwardKick, "Seated Forward Kick", Seated, Foot, [0.15, 0.0, 0.50]);
    kick.knee_extension_angle = Some(DEFAULT_KNEE_EXTENSION_RAD);

    let mut calf = model(SeatedCalfRaises, "Seated Calf Raises", Seated, Knee, [0.0, 0.0, 0.08]);
    calf.cognitive_task = Some("us_states");

    let mut across =
        model(StandingReachAcross, "Standing Reach Across", Standing, Hand, [0.05, -0.30, 0.0]);
    across.cognitive_task = Some("animals");

    let mut tug = model(TimedUpAndGo, "Timed Up and Go", Standing, Hand, [0.5, 0.0, 0.0]);
    tug.kind = ExerciseKind::TimedUpAndGo {
        distance_m: TUG_DISTANCE_M,
    };

    vec![
        model(SeatedReachForward, "Seated Reach Forward", Seated, Hand, [0.20, 0.0, 0.10]),
        kick,
        calf,
        across,
        model(SeatedWindmills, "Seated Windmills", Seated, Hand, [0.0, 0.15, 0.10]),
        model(SeatedHighKnees, "Seated High Knees", Seated, Knee, [0.0, 0.0, 0.15]),
        model(StandingHighKnees, "Standing High Knees", Standing, Knee, [0.10, 0.0, 0.25]),
        model(StandingReachDown, "Standing Reach Down", Standing, Hand, [0.05, 0.0, -0.25]),
        model(SeatedReachSide, "Seated Reach Side", Seated, Hand, [0.0, 0.20, 0.0]),
        tug,
    ]
}

pub fn lookup(id: ExerciseId) -> ExerciseModel {
    catalog()
        .into_iter()
        .find(|m| m.id == id)
        .expect("catalog covers every ExerciseId")
}

/// Looks up a model by its string id.
pub fn find(id: &str) -> Result<ExerciseModel> {
    Ok(lookup(id.parse()?))
}
