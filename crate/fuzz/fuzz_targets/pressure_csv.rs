#![no_main]

use libfuzzer_sys::fuzz_target;
use repcoach::contact::{detect_contacts, DetectorConfig, PressureTrace};

fuzz_target!(|data: &[u8]| {
    if let Ok(trace) = PressureTrace::from_csv(data, 101_800.0) {
        let events = detect_contacts(&trace, &DetectorConfig::default()).expect("parsed traces are valid");
        assert!(events.windows(2).all(|w| w[0].onset_time < w[1].onset_time));
    }
});
