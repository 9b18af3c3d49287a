//! Personalized robot-led exercise engine.
//!
//! The crate turns body dimensions into hip-frame exercise targets, adapts
//! difficulty between sets from repetition rates, calibrates a starting
//! difficulty with a simulated haptic sweep, detects contacts in a bubble
//! pressure signal, and replays whole sessions deterministically against a
//! simulated user. The [`reachability`] module compares a mobile manipulator
//! with a fixed-base dual-arm robot over the same target clouds and places the
//! fixed base with CMA-ES.

pub mod body;
pub mod calibration;
pub mod cli;
pub mod cmaes;
pub mod contact;
pub mod difficulty;
pub mod error;
pub mod exercise;
pub mod reachability;
pub mod session;
pub mod user;

pub use body::BodyDimensions;
pub use error::{Error, Result};
pub use exercise::{ExerciseId, ExerciseModel, Side, TargetSet};

/// Points are plain `f64` triples in meters.
pub type Vec3 = nalgebra::Vector3<f64>;
