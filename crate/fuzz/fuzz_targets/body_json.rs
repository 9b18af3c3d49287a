#![no_main]

use libfuzzer_sys::fuzz_target;
use repcoach::BodyDimensions;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(body) = BodyDimensions::from_json(text) {
        assert!(body.validate().is_ok());
        let _ = repcoach::reachability::exercise_cloud(&body);
    }
});
