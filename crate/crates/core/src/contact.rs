//! Touch detection on the soft-bubble pressure signal.
//!
//! Detection is relative to the pressure captured at startup. An event fires
//! when the signal rises `rise_threshold` above that baseline. The detector
//! re-arms only after the signal has dropped below `release_threshold` and
//! at least `debounce` seconds have passed since the last onset.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressureTrace {
    /// Hz.
    pub sample_rate: f64,
    /// Pascals, captured at startup.
    pub baseline: f64,
    /// Time of the first sample, seconds.
    #[serde(default)]
    pub start_time: f64,
    pub samples: Vec<f64>,
}

impl PressureTrace {
    pub fn new(sample_rate: f64, baseline: f64, samples: Vec<f64>) -> Self {
        Self {
            sample_rate,
            baseline,
            start_time: 0.0,
            samples,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate > 0.0 && self.sample_rate.is_finite()) {
            return Err(Error::validation("sample_rate", format!("{} Hz must be positive", self.sample_rate)));
        }
        if !self.baseline.is_finite() || !self.start_time.is_finite() {
            return Err(Error::validation("baseline", "must be finite"));
        }
        if let Some(i) = self.samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::validation("samples", format!("sample {i} is not finite")));
        }
        Ok(())
    }

    pub fn time_of(&self, index: usize) -> f64 {
        self.start_time + index as f64 / self.sample_rate
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    /// Reads a `time_s,pressure_pa` CSV. The sample rate is taken from the
    /// time column, which must be strictly increasing with uniform spacing
    /// (within 1 %).
    pub fn from_csv<R: Read>(reader: R, baseline: f64) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["time_s", "pressure_pa"] {
            return Err(Error::parse(1, "expected header `time_s,pressure_pa`"));
        }
        let mut times = Vec::new();
        let mut samples = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            if record.len() != 2 {
                return Err(Error::parse(line, format!("expected 2 fields, found {}", record.len())));
            }
            let num = |i: usize| -> Result<f64> {
                record[i]
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::parse(line, format!("`{}` is not a finite number", &record[i])))
            };
            let t = num(0)?;
            if let Some(&prev) = times.last() {
                if t <= prev {
                    return Err(Error::parse(line, "time_s must be strictly increasing"));
                }
            }
            times.push(t);
            samples.push(num(1)?);
        }

        let sample_rate = if times.len() >= 2 {
            let mean_dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
            for (i, w) in times.windows(2).enumerate() {
                if ((w[1] - w[0]) - mean_dt).abs() > 0.01 * mean_dt {
                    return Err(Error::parse(i + 3, "non-uniform sample spacing"));
                }
            }
            1.0 / mean_dt
        } else {
            1.0
        };

        let trace = PressureTrace {
            sample_rate,
            baseline,
            start_time: times.first().copied().unwrap_or(0.0),
            samples,
        };
        trace.validate()?;
        Ok(trace)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectorConfig {
    /// Pascals above baseline.
    pub rise_threshold: f64,
    /// Pascals above baseline.
    pub release_threshold: f64,
    /// Seconds.
    pub debounce: f64,
    /// Pascals above baseline.
    pub too_hard_threshold: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            rise_threshold: 250.0,
            release_threshold: 125.0,
            debounce: 0.2,
            too_hard_threshold: 1500.0,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.release_threshold
            && self.release_threshold < self.rise_threshold
            && self.rise_threshold < self.too_hard_threshold
            && self.too_hard_threshold.is_finite())
        {
            return Err(Error::validation(
                "detector",
                "need 0 < release_threshold < rise_threshold < too_hard_threshold",
            ));
        }
        if !(self.debounce >= 0.0 && self.debounce.is_finite()) {
            return Err(Error::validation("detector.debounce", "must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactEvent {
    pub onset_time: f64,
    pub peak_pressure_delta: f64,
    pub too_hard: bool,
}

pub fn detect_contacts(trace: &PressureTrace, cfg: &DetectorConfig) -> Result<Vec<ContactEvent>> {
    cfg.validate()?;
    trace.validate()?;

    let mut events: Vec<ContactEvent> = Vec::new();
    let mut armed = true;
    // True from onset until the signal first drops below release.
    let mut in_excursion = false;

    for (i, &p) in trace.samples.iter().enumerate() {
        let t = trace.time_of(i);
        let delta = p - trace.baseline;

        if armed {
            if delta >= cfg.rise_threshold {
                events.push(ContactEvent {
                    onset_time: t,
                    peak_pressure_delta: delta,
                    too_hard: false,
                });
                armed = false;
                in_excursion = true;
            }
            continue;
        }

        let current = events.last_mut().expect("disarmed implies an event");
        if delta < cfg.release_threshold {
            in_excursion = false;
            if t - current.onset_time >= cfg.debounce {
                armed = true;
            }
        } else if in_excursion && delta > current.peak_pressure_delta {
            current.peak_pressure_delta = delta;
        }
    }

    for e in &mut events {
        e.too_hard = e.peak_pressure_delta >= cfg.too_hard_threshold;
    }
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn trace_with(samples: Vec<f64>) -> PressureTrace {
        PressureTrace::new(100.0, 1000.0, samples)
    }

    /// Box-shaped excursions `(start_s, width_s, delta_pa)` at 100 Hz.
    fn boxes(duration: f64, bumps: &[(f64, f64, f64)]) -> PressureTrace {
        let n = (duration * 100.0).round() as usize;
        let idx = |t: f64| (t * 100.0).round() as usize;
        let samples = (0..n)
            .map(|i| {
                1000.0
                    + bumps
                        .iter()
                        .filter(|(s, w, _)| i >= idx(*s) && i < idx(s + w))
                        .map(|b| b.2)
                        .sum::<f64>()
            })
            .collect();
        trace_with(samples)
    }

    #[test]
    fn flat_trace_has_no_events() {
        let t = trace_with(vec![1000.0; 500]);
        assert!(detect_contacts(&t, &DetectorConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn empty_trace_is_fine() {
        assert!(detect_contacts(&trace_with(vec![]), &DetectorConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn non_finite_sample_is_rejected() {
        let t = trace_with(vec![1000.0, f64::NAN]);
        assert!(matches!(detect_contacts(&t, &DetectorConfig::default()), Err(Error::Validation { .. })));
    }

    #[test]
    fn single_box() {
        let t = boxes(2.0, &[(0.5, 0.3, 300.0)]);
        let ev = detect_contacts(&t, &DetectorConfig::default()).unwrap();
        assert_eq!(ev.len(), 1);
        assert!((ev[0].onset_time - 0.5).abs() < 1e-9);
        assert_eq!(ev[0].peak_pressure_delta, 300.0);
        assert!(!ev[0].too_hard);
    }

    #[test]
    fn chatter_inside_hysteresis_band_is_one_event() {
        // Drops to 150 Pa (above release) between two peaks.
        let t = boxes(3.0, &[(0.5, 0.1, 300.0), (0.6, 0.1, 150.0), (0.7, 0.1, 300.0)]);
        assert_eq!(detect_contacts(&t, &DetectorConfig::default()).unwrap().len(), 1);
    }

    #[test]
    fn release_before_debounce_does_not_rearm() {
        // Second box starts 0.15 s after the first onset; debounce is 0.2 s.
        let t = boxes(3.0, &[(0.5, 0.05, 400.0), (0.65, 0.05, 400.0), (1.5, 0.05, 400.0)]);
        let ev = detect_contacts(&t, &DetectorConfig::default()).unwrap();
        assert_eq!(ev.len(), 2);
        assert!((ev[1].onset_time - 1.5).abs() < 1e-9);
    }

    #[test]
    fn too_hard_uses_peak() {
        let t = boxes(2.0, &[(0.2, 0.1, 400.0), (0.3, 0.1, 1600.0), (1.0, 0.1, 1499.0)]);
        let ev = detect_contacts(&t, &DetectorConfig::default()).unwrap();
        assert_eq!(ev.len(), 2);
        assert!(ev[0].too_hard);
        assert_eq!(ev[0].peak_pressure_delta, 1600.0);
        assert!(!ev[1].too_hard);
    }

    #[test]
    fn config_validation() {
        let mut c = DetectorConfig::default();
        c.release_threshold = 300.0;
        assert!(c.validate().is_err());
        let mut c = DetectorConfig::default();
        c.debounce = -0.1;
        assert!(c.validate().is_err());
    }

    #[test]
    fn csv_round_trip() {
        let text = "time_s,pressure_pa\n0.00,1000\n0.01,1300\n0.02,1300\n0.03,1000\n";
        let t = PressureTrace::from_csv(text.as_bytes(), 1000.0).unwrap();
        assert!((t.sample_rate - 100.0).abs() < 1e-9);
        assert_eq!(t.samples.len(), 4);
        let ev = detect_contacts(&t, &DetectorConfig::default()).unwrap();
        assert_eq!(ev.len(), 1);
        assert!((ev[0].onset_time - 0.01).abs() < 1e-12);
    }

    #[test]
    fn csv_errors_name_lines() {
        let bad_header = "t,p\n0,1\n";
        assert!(matches!(PressureTrace::from_csv(bad_header.as_bytes(), 0.0), Err(Error::Parse { line: 1, .. })));
        let backwards = "time_s,pressure_pa\n0.0,1\n0.1,1\n0.05,1\n";
        match PressureTrace::from_csv(backwards.as_bytes(), 0.0) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        let junk = "time_s,pressure_pa\n0.0,1\n0.1,abc\n";
        assert!(matches!(PressureTrace::from_csv(junk.as_bytes(), 0.0), Err(Error::Parse { line: 3, .. })));
        let empty = "time_s,pressure_pa\n";
        assert!(PressureTrace::from_csv(empty.as_bytes(), 0.0).unwrap().samples.is_empty());
    }

    fn integer_trace() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(prop_oneof![3 => 0i32..100, 2 => 100i32..400, 1 => 400i32..2500], 0..400)
            .prop_map(|v| v.into_iter().map(|d| 101_800.0 + f64::from(d)).collect())
    }

    proptest! {
        #[test]
        fn onsets_are_spaced_by_debounce(samples in integer_trace()) {
            let cfg = DetectorConfig::default();
            let t = PressureTrace::new(100.0, 101_800.0, samples);
            let ev = detect_contacts(&t, &cfg).unwrap();
            for w in ev.windows(2) {
                prop_assert!(w[1].onset_time > w[0].onset_time);
                prop_assert!(w[1].onset_time - w[0].onset_time >= cfg.debounce - 1e-12);
            }
            for e in &ev {
                prop_assert!(e.peak_pressure_delta >= cfg.rise_threshold);
            }
            let hard = ev.iter().filter(|e| e.peak_pressure_delta >= cfg.too_hard_threshold).count();
            prop_assert_eq!(hard, ev.iter().filter(|e| e.too_hard).count());
        }

        #[test]
        fn baseline_offset_does_not_matter(samples in integer_trace(), offset in -100_000i32..100_000) {
            let cfg = DetectorConfig::default();
            let a = PressureTrace::new(100.0, 101_800.0, samples.clone());
            let c = f64::from(offset);
            let b = PressureTrace::new(100.0, 101_800.0 + c, samples.iter().map(|s| s + c).collect());
            prop_assert_eq!(detect_contacts(&a, &cfg).unwrap(), detect_contacts(&b, &cfg).unwrap());
        }
    }
}
