#![no_main]

use libfuzzer_sys::fuzz_target;
use repcoach::user::SimulatedUser;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(user) = SimulatedUser::from_json(text) {
        assert!(user.validate().is_ok());
    }
});
