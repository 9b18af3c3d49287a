//! Session config documents (YAML or JSON) and `key=value` overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::calibration::CalibrationConfig;
use crate::contact::DetectorConfig;
use crate::error::{Error, Result};
use crate::session::cognitive::{WordList, WordLists};
use crate::session::{PlanEntry, SessionPlan};
use crate::user::SimulatedUser;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_rest")]
    pub rest_between_sets: f64,
    #[serde(default)]
    pub exercises: Vec<PlanEntry>,
    #[serde(default)]
    pub calibration: CalibrationConfig,
    #[serde(default)]
    pub detector: DetectorConfig,
    /// Category id to word file, relative to the config file.
    #[serde(default)]
    pub word_files: BTreeMap<String, PathBuf>,
    pub user: SimulatedUser,
}

fn default_delta() -> f64 {
    crate::difficulty::DEFAULT_DELTA
}

fn default_rest() -> f64 {
    10.0
}

/// One `--set` override: a dotted path and the value to store there.
#[derive(Debug, Clone, PartialEq)]
pub struct Override {
    pub path: Vec<String>,
    pub value: Value,
}

impl Override {
    /// Parses `a.b.0.c=value`. The value is read as JSON when it parses as
    /// JSON and kept as a string otherwise.
    pub fn parse(text: &str) -> Result<Self> {
        let (key, raw) = text
            .split_once('=')
            .ok_or_else(|| Error::validation("override", format!("`{text}` is not key=value")))?;
        let path: Vec<String> = key.trim().split('.').map(str::to_string).collect();
        if path.iter().any(String::is_empty) {
            return Err(Error::validation("override", format!("`{key}` has an empty path segment")));
        }
        let raw = raw.trim();
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        Ok(Self { path, value })
    }

    pub fn apply(&self, doc: &mut Value) -> Result<()> {
        let mut node = doc;
        for (depth, seg) in self.path.iter().enumerate() {
            let last = depth + 1 == self.path.len();
            node = match node {
                Value::Object(map) => {
                    if last {
                        map.insert(seg.clone(), self.value.clone());
                        return Ok(());
                    }
                    map.entry(seg.clone()).or_insert_with(|| Value::Object(Default::default()))
                }
                Value::Array(items) => {
                    let len = items.len();
                    let slot = seg
                        .parse::<usize>()
                        .ok()
                        .and_then(|i| items.get_mut(i))
                        .ok_or_else(|| {
                            Error::validation("override", format!("`{seg}` is not an index below {len}"))
                        })?;
                    if last {
                        *slot = self.value.clone();
                        return Ok(());
                    }
                    slot
                }
                _ => {
                    return Err(Error::validation(
                        "override",
                        format!("`{}` does not name a table", self.path[..depth].join(".")),
                    ))
                }
            };
        }
        Ok(())
    }
}

/// Reads a YAML or JSON document into a generic tree.
pub fn parse_document(text: &str) -> Result<Value> {
    if text.trim_start().starts_with('{') {
        Ok(serde_json::from_str(text)?)
    } else {
        Ok(serde_yaml::from_str(text)?)
    }
}

impl SessionConfig {
    /// Parses a config document after applying `overrides`. Does not touch
    /// the filesystem.
    pub fn from_str_with(text: &str, overrides: &[Override]) -> Result<Self> {
        let mut doc = parse_document(text)?;
        if doc.is_null() {
            doc = Value::Object(Default::default());
        }
        for o in overrides {
            o.apply(&mut doc)?;
        }
        let cfg: SessionConfig = serde_json::from_value(doc)?;
        cfg.user.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[Override]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_str_with(&text, overrides)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for file in cfg.word_files.values_mut() {
            if file.is_relative() {
                *file = base.join(&*file);
            }
        }
        Ok(cfg)
    }

    /// Reads word files and builds a validated plan.
    pub fn plan(&self) -> Result<SessionPlan> {
        let mut word_lists = WordLists::default();
        for (category, path) in &self.word_files {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            word_lists.register(category.clone(), WordList::parse(&text)?);
        }
        let plan = SessionPlan {
            exercises: self.exercises.clone(),
            seed: self.seed,
            delta: self.delta,
            calibration: self.calibration,
            detector: self.detector,
            rest_between_sets: self.rest_between_sets,
            word_lists,
        };
        plan.validate()?;
        Ok(plan)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    const YAML: &str = r#"
seed: 4
exercises:
  - exercise: seated_forward_kick
    sets_per_side: 3
  - exercise: seated_calf_raises
    cognitive: us_states
    brackets: { excellent_min_rpm: 30, good_min_rpm: 15 }
calibration:
  step: 0.2
user:
  body:
    upper_leg_length: 0.42
    lower_leg_length: 0.43
    hip_width: 0.32
    upper_arm_length: 0.31
    forearm_length: 0.25
    shoulder_width: 0.41
    seated_shoulder_height: 0.57
    standing_shoulder_height: 1.38
    standing_hip_height: 0.9
  max_rpm: 28
  rpm_slope: 0.8
"#;

    #[test]
    fn parses_yaml() {
        let cfg = SessionConfig::from_str_with(YAML, &[]).unwrap();
        assert_eq!(cfg.seed, 4);
        assert_eq!(cfg.exercises[0].sets_per_side, 3);
        assert_eq!(cfg.exercises[1].set_duration, 30.0);
        assert_eq!(cfg.calibration.step, 0.2);
        assert_eq!(cfg.calibration.safety_margin, 0.1);
        assert_eq!(cfg.delta, 0.2);
        let plan = cfg.plan().unwrap();
        assert_eq!(plan.exercises.len(), 2);
    }

    #[test]
    fn json_equals_yaml() {
        let doc = parse_document(YAML).unwrap();
        let from_json = SessionConfig::from_str_with(&doc.to_string(), &[]).unwrap();
        assert_eq!(from_json, SessionConfig::from_str_with(YAML, &[]).unwrap());
    }

    #[test]
    fn overrides() {
        let sets = [
            Override::parse("seed=9").unwrap(),
            Override::parse("exercises.1.sets_per_side=4").unwrap(),
            Override::parse("detector.debounce = 0.3").unwrap(),
            Override::parse("user.max_rpm=35.5").unwrap(),
        ];
        let cfg = SessionConfig::from_str_with(YAML, &sets).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.exercises[1].sets_per_side, 4);
        assert_eq!(cfg.detector.debounce, 0.3);
        assert_eq!(cfg.user.max_rpm, 35.5);
    }

    #[test]
    fn override_parsing() {
        let o = Override::parse("exercises.0.cognitive=animals").unwrap();
        assert_eq!(o.value, json!("animals"));
        assert!(Override::parse("novalue").is_err());
        assert!(Override::parse("a..b=1").is_err());
        let mut doc = json!({"a": [1, 2]});
        assert!(Override::parse("a.5=1").unwrap().apply(&mut doc).is_err());
        assert!(Override::parse("a.0.x=1").unwrap().apply(&mut doc).is_err());
    }

    #[test]
    fn unknown_keys_and_bad_values_fail() {
        let typo = YAML.replace("sets_per_side", "sets_per_sides");
        assert!(SessionConfig::from_str_with(&typo, &[]).is_err());
        let bad = [Override::parse("user.max_rpm=-1").unwrap()];
        assert!(SessionConfig::from_str_with(YAML, &bad).is_err());
        let unknown = YAML.replace("seated_calf_raises", "cartwheel");
        let cfg = SessionConfig::from_str_with(&unknown, &[]).unwrap();
        assert!(matches!(cfg.plan(), Err(Error::UnknownExercise(_))));
    }

    #[test]
    fn missing_word_file() {
        let mut cfg = SessionConfig::from_str_with(YAML, &[]).unwrap();
        cfg.word_files.insert("animals".into(), PathBuf::from("/nonexistent/animals.txt"));
        assert!(matches!(cfg.plan(), Err(Error::Io { .. })));
    }
}
