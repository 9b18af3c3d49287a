#![no_main]

use libfuzzer_sys::fuzz_target;
use repcoach::session::events::{parse_log, serialize_log};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(events) = parse_log(text) {
        let again = serialize_log(&events);
        let reparsed = parse_log(&again).expect("serialized logs parse");
        assert_eq!(serialize_log(&reparsed), again);
    }
});
