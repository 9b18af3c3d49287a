//! Synthetic participant used to close the exercise loop.
//!
//! Nothing here is a clinical model. The user reaches a target iff its
//! difficulty factor is within their (noisy) reach, repeats at a rate that
//! falls linearly with difficulty, and presses the bubble with a
//! raised-cosine pressure pulse.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::body::BodyDimensions;
use crate::contact::PressureTrace;
use crate::error::{check_range, Error, Result};
use crate::exercise::{ExerciseId, Side};

/// Generator used for every stochastic choice in a simulation.
pub type SimRng = ChaCha8Rng;

/// Width of one synthetic contact pulse.
pub const BUMP_WIDTH_S: f64 = 0.3;

/// Shortest latency ever reported for a touch (one simulation tick).
pub const MIN_TOUCH_LATENCY_S: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SideReach {
    pub right: f64,
    pub left: f64,
}

impl SideReach {
    pub fn get(&self, side: Side) -> f64 {
        match side {
            Side::Right => self.right,
            Side::Left => self.left,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulatedUser {
    pub body: BodyDimensions,
    /// Farthest reachable difficulty factor per exercise and side.
    #[serde(default)]
    pub true_reach: BTreeMap<ExerciseId, SideReach>,
    /// Used for exercises missing from `true_reach`.
    #[serde(default = "defaults::reach")]
    pub default_reach: f64,
    /// Repetitions per minute at zero difficulty.
    pub max_rpm: f64,
    /// Fractional rpm loss per unit of difficulty.
    pub rpm_slope: f64,
    #[serde(default)]
    pub reach_noise: f64,
    /// Standard deviation of the realized repetition count.
    #[serde(default)]
    pub rep_noise: f64,
    /// m/s.
    #[serde(default = "defaults::walk_speed")]
    pub walk_speed: f64,
    /// Seconds to touch an easy target once it is presented.
    #[serde(default = "defaults::touch_latency")]
    pub touch_latency: f64,
    #[serde(default = "defaults::stand_up_latency")]
    pub stand_up_latency: f64,
    /// Mean peak pressure of a press, Pa above baseline.
    #[serde(default = "defaults::press_amplitude")]
    pub press_amplitude: f64,
    /// Half-width of the uniform spread around `press_amplitude`.
    #[serde(default = "defaults::press_spread")]
    pub press_spread: f64,
    /// Probability that a press is hard enough to trip the buzzer.
    #[serde(default)]
    pub too_hard_rate: f64,
    /// Probability that a spoken word repeats or leaves the category.
    #[serde(default)]
    pub word_error_rate: f64,
    #[serde(default)]
    pub rng_seed: u64,
}

mod defaults {
    pub fn reach() -> f64 {
        1.0
    }
    pub fn walk_speed() -> f64 {
        1.0
    }
    pub fn touch_latency() -> f64 {
        1.0
    }
    pub fn stand_up_latency() -> f64 {
        1.5
    }
    pub fn press_amplitude() -> f64 {
        700.0
    }
    pub fn press_spread() -> f64 {
        200.0
    }
}

impl SimulatedUser {
    /// A noiseless user who can reach every target.
    pub fn ideal(body: BodyDimensions, max_rpm: f64, rpm_slope: f64) -> Self {
        Self {
            body,
            true_reach: BTreeMap::new(),
            default_reach: 1.0,
            max_rpm,
            rpm_slope,
            reach_noise: 0.0,
            rep_noise: 0.0,
            walk_speed: defaults::walk_speed(),
            touch_latency: defaults::touch_latency(),
            stand_up_latency: defaults::stand_up_latency(),
            press_amplitude: defaults::press_amplitude(),
            press_spread: defaults::press_spread(),
            too_hard_rate: 0.0,
            word_error_rate: 0.0,
            rng_seed: 0,
        }
    }

    pub fn with_reach(mut self, id: ExerciseId, right: f64, left: f64) -> Self {
        self.true_reach.insert(id, SideReach { right, left });
        self
    }

    pub fn reach(&self, id: ExerciseId, side: Side) -> f64 {
        self.true_reach.get(&id).map_or(self.default_reach, |r| r.get(side))
    }

    pub fn validate(&self) -> Result<()> {
        self.body.validate()?;
        check_range("default_reach", self.default_reach, 0.0, 1.0)?;
        for r in self.true_reach.values() {
            check_range("true_reach", r.right, 0.0, 1.0)?;
            check_range("true_reach", r.left, 0.0, 1.0)?;
        }
        let positive = [
            ("max_rpm", self.max_rpm),
            ("walk_speed", self.walk_speed),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::validation(name, format!("{v} must be positive")));
            }
        }
        let non_negative = [
            ("rpm_slope", self.rpm_slope),
            ("reach_noise", self.reach_noise),
            ("rep_noise", self.rep_noise),
            ("touch_latency", self.touch_latency),
            ("stand_up_latency", self.stand_up_latency),
            ("press_amplitude", self.press_amplitude),
            ("press_spread", self.press_spread),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::validation(name, format!("{v} must be non-negative")));
            }
        }
        check_range("too_hard_rate", self.too_hard_rate, 0.0, 1.0)?;
        check_range("word_error_rate", self.word_error_rate, 0.0, 1.0)?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let user: SimulatedUser = serde_json::from_str(text)?;
        user.validate()?;
        Ok(user)
    }

    /// Presents a target at `f_diff` and returns the touch latency, or `None`
    /// if the user cannot reach it. Always consumes two draws from `rng`.
    pub fn attempt_touch(&self, id: ExerciseId, side: Side, f_diff: f64, rng: &mut SimRng) -> Option<f64> {
        let z: f64 = rng.sample(StandardNormal);
        let jitter: f64 = rng.gen_range(0.75..1.25);
        let reach = self.reach(id, side) + self.reach_noise * z;
        (f_diff <= reach).then(|| (self.touch_latency * (1.0 + f_diff) * jitter).max(MIN_TOUCH_LATENCY_S))
    }

    /// Expected repetitions in a set before noise and the reach cutoff.
    pub fn expected_reps(&self, f_diff: f64, set_duration: f64) -> f64 {
        (self.max_rpm * (1.0 - self.rpm_slope * f_diff)).max(0.0) * set_duration / 60.0
    }

    /// Repetitions completed in one set. Always consumes one draw from `rng`.
    pub fn set_rep_count(&self, id: ExerciseId, side: Side, f_diff: f64, set_duration: f64, rng: &mut SimRng) -> u32 {
        let z: f64 = rng.sample(StandardNormal);
        if f_diff > self.reach(id, side) + self.reach_noise {
            return 0;
        }
        let reps = (self.expected_reps(f_diff, set_duration) + self.rep_noise * z).round();
        reps.max(0.0) as u32
    }

    /// Peak pressure of the next press.
    pub fn press_amplitude(&self, rng: &mut SimRng) -> f64 {
        let hard = rng.gen_bool(self.too_hard_rate);
        let u: f64 = rng.gen_range(-1.0..=1.0);
        if hard {
            2.0 * self.press_amplitude.max(1000.0) + u * self.press_spread
        } else {
            (self.press_amplitude + u * self.press_spread).max(0.0)
        }
    }
}

/// One raised-cosine pulse per `(onset_s, amplitude_pa)` on top of `baseline`.
/// Overlapping pulses add.
pub fn synth_trace(events: &[(f64, f64)], duration: f64, baseline: f64, sample_rate: f64) -> Result<PressureTrace> {
    if !(duration >= 0.0 && duration.is_finite()) {
        return Err(Error::validation("duration", format!("{duration} s")));
    }
    if !(sample_rate > 0.0 && sample_rate.is_finite()) {
        return Err(Error::validation("sample_rate", format!("{sample_rate} Hz")));
    }
    for &(onset, amplitude) in events {
        check_range("onset", onset, 0.0, duration)?;
        if !amplitude.is_finite() {
            return Err(Error::validation("amplitude", "must be finite"));
        }
    }

    let n = (duration * sample_rate).round() as usize;
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / sample_rate;
            let raised: f64 = events
                .iter()
                .filter_map(|&(onset, amplitude)| {
                    let u = t - onset;
                    (0.0..=BUMP_WIDTH_S)
                        .contains(&u)
                        .then(|| amplitude * 0.5 * (1.0 - (std::f64::consts::TAU * u / BUMP_WIDTH_S).cos()))
                })
                .sum();
            baseline + raised
        })
        .collect();
    Ok(PressureTrace::new(sample_rate, baseline, samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact::{detect_contacts, DetectorConfig};
    use proptest::prelude::*;
    use rand::SeedableRng;

    const ID: ExerciseId = ExerciseId::SeatedForwardKick;

    fn user(reach: f64) -> SimulatedUser {
        SimulatedUser::ideal(BodyDimensions::from_height(1.7), 24.0, 0.5).with_reach(ID, reach, reach)
    }

    #[test]
    fn touch_within_reach() {
        let mut rng = SimRng::seed_from_u64(1);
        assert!(user(0.6).attempt_touch(ID, Side::Right, 0.3, &mut rng).unwrap() > 0.0);
        assert!(user(0.6).attempt_touch(ID, Side::Right, 0.9, &mut rng).is_none());
    }

    #[test]
    fn touch_is_deterministic() {
        let mut u = user(0.6);
        u.reach_noise = 0.3;
        let a = u.attempt_touch(ID, Side::Left, 0.55, &mut SimRng::seed_from_u64(9));
        let b = u.attempt_touch(ID, Side::Left, 0.55, &mut SimRng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn rep_count_examples() {
        let mut rng = SimRng::seed_from_u64(3);
        assert_eq!(user(1.0).set_rep_count(ID, Side::Right, 0.5, 30.0, &mut rng), 9);
        assert_eq!(user(0.4).set_rep_count(ID, Side::Right, 0.5, 30.0, &mut rng), 0);
        let mut flat = user(1.0);
        flat.rpm_slope = 0.0;
        let counts: Vec<u32> = [0.0, 0.3, 1.0]
            .iter()
            .map(|&f| flat.set_rep_count(ID, Side::Right, f, 30.0, &mut rng))
            .collect();
        assert_eq!(counts, vec![12, 12, 12]);
    }

    #[test]
    fn validation() {
        let mut u = user(0.5);
        assert!(u.validate().is_ok());
        u.max_rpm = 0.0;
        assert!(u.validate().is_err());
        let u = user(1.5);
        assert!(u.validate().is_err());
    }

    #[test]
    fn json_profile() {
        let body = serde_json::to_value(BodyDimensions::from_height(1.7)).unwrap();
        let text = serde_json::json!({
            "body": body,
            "true_reach": {"seated_forward_kick": {"right": 0.7, "left": 0.5}},
            "max_rpm": 30.0,
            "rpm_slope": 1.0
        })
        .to_string();
        let u = SimulatedUser::from_json(&text).unwrap();
        assert_eq!(u.reach(ID, Side::Left), 0.5);
        assert_eq!(u.reach(ExerciseId::SeatedWindmills, Side::Left), 1.0);
        let bad = text.replace("seated_forward_kick", "moonwalk");
        assert!(SimulatedUser::from_json(&bad).is_err());
    }

    #[test]
    fn flat_trace_without_events() {
        let t = synth_trace(&[], 2.0, 1000.0, 100.0).unwrap();
        assert_eq!(t.samples.len(), 200);
        assert!(t.samples.iter().all(|&s| s == 1000.0));
    }

    #[test]
    fn pulse_is_detected_near_onset() {
        let t = synth_trace(&[(1.0, 400.0)], 3.0, 1000.0, 100.0).unwrap();
        let ev = detect_contacts(&t, &DetectorConfig::default()).unwrap();
        assert_eq!(ev.len(), 1);
        assert!(ev[0].onset_time >= 1.0 && ev[0].onset_time <= 1.0 + BUMP_WIDTH_S / 2.0);
        assert!((ev[0].peak_pressure_delta - 400.0).abs() < 1e-9);
    }

    #[test]
    fn weak_pulse_is_ignored() {
        let t = synth_trace(&[(1.0, 100.0)], 3.0, 1000.0, 100.0).unwrap();
        assert!(detect_contacts(&t, &DetectorConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn onset_outside_trace_is_rejected() {
        assert!(synth_trace(&[(3.5, 400.0)], 3.0, 0.0, 100.0).is_err());
    }

    proptest! {
        #[test]
        fn expected_reps_non_increasing(f1 in 0.0f64..=1.0, f2 in 0.0f64..=1.0, k in 0.01f64..2.0) {
            let mut u = user(1.0);
            u.rpm_slope = k;
            let (lo, hi) = if f1 <= f2 { (f1, f2) } else { (f2, f1) };
            prop_assert!(u.expected_reps(hi, 30.0) <= u.expected_reps(lo, 30.0));
        }

        #[test]
        fn trace_round_trips_through_detector(
            gaps in prop::collection::vec(0.35f64..2.0, 1..12),
            amps in prop::collection::vec(50.0f64..2000.0, 12),
        ) {
            let cfg = DetectorConfig::default();
            let mut onset = 0.1;
            let mut events = Vec::new();
            for (gap, amp) in gaps.iter().zip(&amps) {
                // Keep clear of the threshold so sampling cannot flip a verdict.
                let amp = if (amp - cfg.rise_threshold).abs() < 5.0 { amp + 10.0 } else { *amp };
                events.push((onset, amp));
                onset += gap;
            }
            let duration = onset + 0.5;
            let trace = synth_trace(&events, duration, 101_325.0, 100.0).unwrap();
            let detected = detect_contacts(&trace, &cfg).unwrap();
            let expected: Vec<_> = events.iter().filter(|e| e.1 >= cfg.rise_threshold).collect();
            prop_assert_eq!(detected.len(), expected.len());
            for (d, e) in detected.iter().zip(expected) {
                prop_assert!(d.onset_time >= e.0 - 1e-9 && d.onset_time <= e.0 + BUMP_WIDTH_S / 2.0);
            }
        }
    }
}
