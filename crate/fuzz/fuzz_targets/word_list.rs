#![no_main]

use std::collections::BTreeSet;

use libfuzzer_sys::fuzz_target;
use repcoach::session::cognitive::{normalize_word, validate_cognitive_word, WordList, WordVerdict};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(list) = WordList::parse(text) {
        let mut used = BTreeSet::new();
        for line in text.lines() {
            if let Ok(WordVerdict::Valid) = validate_cognitive_word(line, &list, &used) {
                used.insert(normalize_word(line));
            }
        }
    }
});
