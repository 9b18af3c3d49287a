//! Haptic range-of-motion sweep that picks a starting difficulty.
//!
//! The target starts at `x_min` and steps toward `x_max` in increments of
//! `step` (a fraction of the difficulty vector). At each step the user has
//! `dwell_timeout` seconds to touch it. The first miss ends the sweep; the
//! farthest touched fraction minus `safety_margin` becomes the first set's
//! difficulty factor.

use serde::{Deserialize, Serialize};

use crate::body::BodyDimensions;
use crate::error::{Error, Result};
use crate::exercise::{ExerciseModel, Side};
use crate::user::{SimRng, SimulatedUser};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrationConfig {
    /// Fraction of the difficulty vector per step.
    pub step: f64,
    /// Seconds.
    pub dwell_timeout: f64,
    pub safety_margin: f64,
    /// Seconds the robot needs to move the target between steps.
    pub move_time: f64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            step: 0.1,
            dwell_timeout: 3.0,
            safety_margin: 0.1,
            move_time: 1.0,
        }
    }
}

impl CalibrationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step <= 0.25) {
            return Err(Error::validation("calibration.step", format!("{} not in (0, 0.25]", self.step)));
        }
        if !(self.safety_margin >= 0.0 && self.safety_margin < 1.0) {
            return Err(Error::validation(
                "calibration.safety_margin",
                format!("{} not in [0, 1)", self.safety_margin),
            ));
        }
        if !(self.dwell_timeout > 0.0 && self.dwell_timeout.is_finite()) {
            return Err(Error::validation("calibration.dwell_timeout", "must be positive"));
        }
        if !(self.move_time >= 0.0 && self.move_time.is_finite()) {
            return Err(Error::validation("calibration.move_time", "must be non-negative"));
        }
        Ok(())
    }

    /// Fractions visited by a full sweep: `0, step, 2 step, ...`, ending
    /// exactly at 1.
    pub fn sweep_fractions(&self) -> Vec<f64> {
        // Dividing by the step count keeps decimal steps exact (0.6, not
        // 0.6000000000000001).
        let per_unit = 1.0 / self.step;
        let mut out: Vec<f64> = (0..)
            .map(|k| k as f64 / per_unit)
            .take_while(|&f| f < 1.0 - 1e-9)
            .collect();
        out.push(1.0);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSample {
    pub fraction: f64,
    pub touched: bool,
    /// Latency of the touch, or the full dwell timeout on a miss.
    pub time_to_touch: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub f_diff_start: f64,
    pub max_reached_fraction: f64,
    pub samples: Vec<CalibrationSample>,
}

pub fn run_calibration(
    model: &ExerciseModel,
    body: &BodyDimensions,
    side: Side,
    user: &SimulatedUser,
    cfg: &CalibrationConfig,
    rng: &mut SimRng,
) -> Result<CalibrationResult> {
    cfg.validate()?;
    // Validates the body; the target itself is not needed by the simulated user.
    model.target_set(body, 0.0, side)?;

    let mut samples = Vec::new();
    let mut max_reached = 0.0;
    for fraction in cfg.sweep_fractions() {
        let touch = user
            .attempt_touch(model.id, side, fraction, rng)
            .filter(|&latency| latency <= cfg.dwell_timeout);
        samples.push(CalibrationSample {
            fraction,
            touched: touch.is_some(),
            time_to_touch: touch.unwrap_or(cfg.dwell_timeout),
        });
        if touch.is_none() {
            break;
        }
        max_reached = fraction;
    }

    Ok(CalibrationResult {
        f_diff_start: (max_reached - cfg.safety_margin).clamp(0.0, 1.0),
        max_reached_fraction: max_reached,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exercise::{lookup, ExerciseId};
    use proptest::prelude::*;
    use rand::SeedableRng;

    const ID: ExerciseId = ExerciseId::SeatedReachForward;

    fn calibrate(reach_right: f64, reach_left: f64, side: Side) -> CalibrationResult {
        let body = BodyDimensions::from_height(1.7);
        let user = SimulatedUser::ideal(body, 24.0, 0.5).with_reach(ID, reach_right, reach_left);
        let mut rng = SimRng::seed_from_u64(5);
        run_calibration(&lookup(ID), &body, side, &user, &CalibrationConfig::default(), &mut rng).unwrap()
    }

    #[test]
    fn sweep_grid_is_exact() {
        let f = CalibrationConfig::default().sweep_fractions();
        assert_eq!(f.len(), 11);
        assert_eq!(f[6], 0.6);
        assert_eq!(f[10], 1.0);
        let cfg = CalibrationConfig {
            step: 0.15,
            ..Default::default()
        };
        let f = cfg.sweep_fractions();
        assert_eq!(*f.last().unwrap(), 1.0);
        assert!(f.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn reach_point_six() {
        let r = calibrate(0.6, 0.6, Side::Right);
        assert_eq!(r.max_reached_fraction, 0.6);
        assert!((r.f_diff_start - 0.5).abs() < 1e-15);
        assert_eq!(r.samples.len(), 8);
        assert!(!r.samples.last().unwrap().touched);
    }

    #[test]
    fn full_and_zero_reach() {
        let r = calibrate(1.0, 1.0, Side::Right);
        assert_eq!(r.max_reached_fraction, 1.0);
        assert!((r.f_diff_start - 0.9).abs() < 1e-15);
        assert_eq!(r.samples.len(), 11);

        let r = calibrate(0.0, 0.0, Side::Right);
        assert_eq!(r.f_diff_start, 0.0);
        assert_eq!(r.max_reached_fraction, 0.0);
    }

    #[test]
    fn unreachable_first_step() {
        // Even the easiest target needs f = 0; make the user's latency blow the timeout.
        let body = BodyDimensions::from_height(1.7);
        let mut user = SimulatedUser::ideal(body, 24.0, 0.5);
        user.touch_latency = 10.0;
        let mut rng = SimRng::seed_from_u64(1);
        let r = run_calibration(&lookup(ID), &body, Side::Left, &user, &CalibrationConfig::default(), &mut rng)
            .unwrap();
        assert_eq!(r.samples.len(), 1);
        assert_eq!(r.f_diff_start, 0.0);
        assert_eq!(r.max_reached_fraction, 0.0);
    }

    #[test]
    fn config_validation() {
        for cfg in [
            CalibrationConfig { step: 0.0, ..Default::default() },
            CalibrationConfig { step: 0.3, ..Default::default() },
            CalibrationConfig { safety_margin: 1.0, ..Default::default() },
            CalibrationConfig { dwell_timeout: 0.0, ..Default::default() },
        ] {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }

    proptest! {
        #[test]
        fn margin_never_raises_difficulty(reach in 0.0f64..=1.0) {
            let r = calibrate(reach, reach, Side::Right);
            prop_assert!(r.f_diff_start <= r.max_reached_fraction);
            let touched_max = r.samples.iter().filter(|s| s.touched).map(|s| s.fraction).fold(0.0, f64::max);
            prop_assert_eq!(r.max_reached_fraction, touched_max);
        }

        #[test]
        fn more_reach_never_lowers_start(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(calibrate(hi, hi, Side::Right).f_diff_start >= calibrate(lo, lo, Side::Right).f_diff_start);
        }

        #[test]
        fn sides_are_independent(r in 0.0f64..=1.0, l in 0.0f64..=1.0) {
            prop_assert_eq!(calibrate(r, l, Side::Right), calibrate(r, 0.0, Side::Right));
            prop_assert_eq!(calibrate(r, l, Side::Left), calibrate(0.0, l, Side::Left));
        }
    }
}
