//! Category-naming task played alongside a physical exercise.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const US_STATES_CATEGORY: &str = "us_states";

pub const US_STATES: [&str; 50] = [
    "alabama",
    "alaska",
    "arizona",
    "arkansas",
    "california",
    "colorado",
    "connecticut",
    "delaware",
    "florida",
    "georgia",
    "hawaii",
    "idaho",
    "illinois",
    "indiana",
    "iowa",
    "kansas",
    "kentucky",
    "louisiana",
    "maine",
    "maryland",
    "massachusetts",
    "michigan",
    "minnesota",
    "mississippi",
    "missouri",
    "montana",
    "nebraska",
    "nevada",
    "new hampshire",
    "new jersey",
    "new mexico",
    "new york",
    "north carolina",
    "north dakota",
    "ohio",
    "oklahoma",
    "oregon",
    "pennsylvania",
    "rhode island",
    "south carolina",
    "south dakota",
    "tennessee",
    "texas",
    "utah",
    "vermont",
    "virginia",
    "washington",
    "west virginia",
    "wisconsin",
    "wyoming",
];

/// Trim, lowercase and collapse internal whitespace.
pub fn normalize_word(word: &str) -> String {
    word.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WordVerdict {
    Valid,
    Duplicate,
    OutOfCategory,
}

impl fmt::Display for WordVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WordVerdict::Valid => "valid",
            WordVerdict::Duplicate => "duplicate",
            WordVerdict::OutOfCategory => "out_of_category",
        })
    }
}

/// Normalized words of one category, in file order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WordList {
    words: Vec<String>,
    index: BTreeSet<String>,
}

impl WordList {
    pub fn new<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut list = WordList::default();
        for w in words {
            let w = normalize_word(w.as_ref());
            if !w.is_empty() && list.index.insert(w.clone()) {
                list.words.push(w);
            }
        }
        list
    }

    /// Parses a word file: one entry per line, `#` comments and blank lines
    /// skipped. A file with no entries is an error.
    pub fn parse(text: &str) -> Result<Self> {
        let list = WordList::new(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        );
        if list.is_empty() {
            return Err(Error::validation("word list", "no entries"));
        }
        Ok(list)
    }

    pub fn contains(&self, normalized: &str) -> bool {
        self.index.contains(normalized)
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Word lists by category id. `us_states` is always registered.
#[derive(Debug, Clone, PartialEq)]
pub struct WordLists {
    lists: BTreeMap<String, WordList>,
}

impl Default for WordLists {
    fn default() -> Self {
        let mut lists = BTreeMap::new();
        lists.insert(US_STATES_CATEGORY.to_string(), WordList::new(US_STATES));
        Self { lists }
    }
}

impl WordLists {
    pub fn register(&mut self, category: impl Into<String>, list: WordList) {
        self.lists.insert(category.into(), list);
    }

    pub fn get(&self, category: &str) -> Result<&WordList> {
        self.lists
            .get(category)
            .ok_or_else(|| Error::UnknownCategory(category.to_string()))
    }

    pub fn categories(&self) -> impl Iterator<Item = &str> {
        self.lists.keys().map(String::as_str)
    }

    pub fn validate_word(&self, word: &str, category: &str, used: &BTreeSet<String>) -> Result<WordVerdict> {
        validate_cognitive_word(word, self.get(category)?, used)
    }
}

/// Judges one spoken word against a category list and the words already
/// accepted in this exercise. `used` holds normalized words.
pub fn validate_cognitive_word(word: &str, list: &WordList, used: &BTreeSet<String>) -> Result<WordVerdict> {
    let w = normalize_word(word);
    Ok(if !list.contains(&w) {
        WordVerdict::OutOfCategory
    } else if used.contains(&w) {
        WordVerdict::Duplicate
    } else {
        WordVerdict::Valid
    })
}
