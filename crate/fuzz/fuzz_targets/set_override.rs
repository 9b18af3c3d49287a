#![no_main]

use libfuzzer_sys::fuzz_target;
use repcoach::session::config::Override;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(o) = Override::parse(text) {
        let mut doc = serde_json::json!({
            "seed": 1,
            "exercises": [{"exercise": "seated_forward_kick"}],
            "user": {"max_rpm": 30}
        });
        let _ = o.apply(&mut doc);
    }
});
