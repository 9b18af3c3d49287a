#![no_main]

use libfuzzer_sys::fuzz_target;
use repcoach::session::config::SessionConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = SessionConfig::from_str_with(text, &[]) {
        // Word files are not read here; only plans without them are run.
        if cfg.word_files.is_empty() {
            if let Ok(plan) = cfg.plan() {
                let small = plan.exercises.len() <= 3
                    && plan
                        .exercises
                        .iter()
                        .all(|e| e.sets_per_side <= 3 && e.set_duration <= 60.0);
                if small {
                    let _ = repcoach::session::run_session(&plan, &cfg.user);
                }
            }
        }
    }
});
