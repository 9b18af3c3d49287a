//! Deterministic replay of a whole exercise session.
//!
//! For each exercise the runner calibrates the right side and then the left,
//! runs the requested number of timed sets per side (right first), scores
//! each set from the contacts the pressure detector finds, and applies the
//! bracket's difficulty step before the next set. The result is an ordered
//! event log stamped on a 10 ms clock.

pub mod cognitive;
pub mod config;
pub mod events;
pub mod summary;

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::calibration::{run_calibration, CalibrationConfig};
use crate::contact::{detect_contacts, DetectorConfig};
use crate::difficulty::{bracket_score, reps_per_minute, DifficultyState, PerformanceBrackets};
use crate::error::{Error, Result};
use crate::exercise::{self, ExerciseId, ExerciseKind, ExerciseModel, Side};
use crate::user::{synth_trace, SimRng, SimulatedUser, BUMP_WIDTH_S};

pub use cognitive::{normalize_word, validate_cognitive_word, WordList, WordLists, WordVerdict};
pub use config::SessionConfig;
pub use events::{parse_log, serialize_log, EventData, SessionEvent};

/// Simulation clock resolution.
pub const TICK_S: f64 = 0.01;

/// Bubble pressure captured at startup in simulated sessions.
pub const BUBBLE_BASELINE_PA: f64 = 101_800.0;

/// Pressure sampling rate used for simulated sets.
pub const PRESSURE_SAMPLE_RATE_HZ: f64 = 100.0;

const DISTRACTORS: [&str; 12] = [
    "atlanta", "chicago", "paris", "table", "blue", "piano", "river", "london", "seven", "apple", "guitar",
    "window",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanEntry {
    pub exercise: String,
    #[serde(default = "default_sets")]
    pub sets_per_side: u32,
    /// Seconds.
    #[serde(default = "default_set_duration")]
    pub set_duration: f64,
    #[serde(default)]
    pub cognitive: Option<String>,
    /// Overrides the catalog brackets for this exercise.
    #[serde(default)]
    pub brackets: Option<PerformanceBrackets>,
}

fn default_sets() -> u32 {
    2
}

fn default_set_duration() -> f64 {
    30.0
}

impl PlanEntry {
    pub fn new(exercise: ExerciseId, sets_per_side: u32, set_duration: f64) -> Self {
        Self {
            exercise: exercise.as_str().to_string(),
            sets_per_side,
            set_duration,
            cognitive: None,
            brackets: None,
        }
    }

    pub fn with_cognitive(mut self, category: &str) -> Self {
        self.cognitive = Some(category.to_string());
        self
    }

    fn model(&self) -> Result<ExerciseModel> {
        let mut model = exercise::find(&self.exercise)?;
        if let Some(b) = self.brackets {
            model.brackets = b;
        }
        Ok(model)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionPlan {
    pub exercises: Vec<PlanEntry>,
    pub seed: u64,
    pub delta: f64,
    pub calibration: CalibrationConfig,
    pub detector: DetectorConfig,
    /// Seconds between consecutive sets.
    pub rest_between_sets: f64,
    pub word_lists: WordLists,
}

impl Default for SessionPlan {
    fn default() -> Self {
        Self {
            exercises: Vec::new(),
            seed: 0,
            delta: crate::difficulty::DEFAULT_DELTA,
            calibration: CalibrationConfig::default(),
            detector: DetectorConfig::default(),
            rest_between_sets: 10.0,
            word_lists: WordLists::default(),
        }
    }
}

impl SessionPlan {
    /// The six-exercise study session: two 30 s sets per side, with state
    /// naming during calf raises and animal naming during reach across.
    pub fn study(seed: u64) -> Self {
        let mut word_lists = WordLists::default();
        word_lists.register(
            "animals",
            WordList::parse(include_str!("../../data/animals.txt")).expect("bundled list parses"),
        );
        let exercises = ExerciseId::STUDY_SEQUENCE
            .iter()
            .map(|&id| {
                let entry = PlanEntry::new(id, 2, 30.0);
                match exercise::lookup(id).cognitive_task {
                    Some(c) => entry.with_cognitive(c),
                    None => entry,
                }
            })
            .collect();
        Self {
            exercises,
            seed,
            word_lists,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::validation("delta", format!("{} not in (0, 1)", self.delta)));
        }
        if !(self.rest_between_sets >= 0.0 && self.rest_between_sets.is_finite()) {
            return Err(Error::validation("rest_between_sets", "must be non-negative"));
        }
        self.calibration.validate()?;
        self.detector.validate()?;
        for (i, entry) in self.exercises.iter().enumerate() {
            let model = entry.model()?;
            model.brackets.validate()?;
            if entry.sets_per_side == 0 {
                return Err(Error::validation(format!("exercises[{i}].sets_per_side"), "must be at least 1"));
            }
            if !(entry.set_duration > 0.0 && entry.set_duration.is_finite()) {
                return Err(Error::validation(format!("exercises[{i}].set_duration"), "must be positive"));
            }
            if entry.set_duration < BUMP_WIDTH_S + 0.1 {
                return Err(Error::validation(
                    format!("exercises[{i}].set_duration"),
                    format!("{} s is too short to hold one contact", entry.set_duration),
                ));
            }
            if let Some(c) = &entry.cognitive {
                self.word_lists.get(c)?;
            }
        }
        Ok(())
    }
}

/// Seconds for the user to stand, walk `distance` meters and touch the robot.
pub fn timed_up_and_go(user: &SimulatedUser, distance: f64) -> Result<f64> {
    if !(distance >= 0.0 && distance.is_finite()) {
        return Err(Error::validation("distance", format!("{distance} m must be non-negative")));
    }
    if !(user.walk_speed > 0.0) {
        return Err(Error::validation("walk_speed", "must be positive"));
    }
    let touch = if distance > 0.0 { user.touch_latency } else { 0.0 };
    Ok(user.stand_up_latency + distance / user.walk_speed + touch)
}

/// Stable 64-bit FNV-1a; used to give every exercise its own random stream.
fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

/// Random stream for one exercise occurrence. Streams are keyed by name, so
/// reordering a plan does not change what happens inside an exercise.
pub fn exercise_rng(seed: u64, user_seed: u64, id: ExerciseId, occurrence: u32) -> SimRng {
    let key = format!("{seed}/{user_seed}/{id}/{occurrence}");
    SimRng::seed_from_u64(fnv1a(key.as_bytes()))
}

fn to_ticks(seconds: f64) -> u64 {
    (seconds / TICK_S).round().max(0.0) as u64
}

/// Per-side difficulty and tallies for the exercise being run.
#[derive(Debug, Clone)]
pub struct SessionState {
    clock: u64,
    pub log: Vec<SessionEvent>,
    pub difficulty: BTreeMap<(usize, Side), DifficultyState>,
    pub reps: BTreeMap<(usize, Side), Vec<u32>>,
    pub words_used: BTreeSet<String>,
}

impl SessionState {
    fn new() -> Self {
        Self {
            clock: 0,
            log: Vec::new(),
            difficulty: BTreeMap::new(),
            reps: BTreeMap::new(),
            words_used: BTreeSet::new(),
        }
    }

    pub fn time_s(&self) -> f64 {
        self.clock as f64 * TICK_S
    }

    fn advance(&mut self, seconds: f64) {
        self.clock += to_ticks(seconds);
    }

    fn emit(&mut self, data: EventData) {
        self.emit_at(self.clock, data);
    }

    fn emit_at(&mut self, tick: u64, data: EventData) {
        self.log.push(SessionEvent {
            time_s: tick as f64 * TICK_S,
            data,
        });
    }
}

struct Runner<'a> {
    plan: &'a SessionPlan,
    user: &'a SimulatedUser,
    state: SessionState,
}

pub fn run_session(plan: &SessionPlan, user: &SimulatedUser) -> Result<Vec<SessionEvent>> {
    plan.validate()?;
    user.validate()?;
    let mut runner = Runner {
        plan,
        user,
        state: SessionState::new(),
    };
    runner.run()?;
    Ok(runner.state.log)
}

impl Runner<'_> {
    fn run(&mut self) -> Result<()> {
        self.state.emit(EventData::SessionStart {
            seed: self.plan.seed,
            exercises: self.plan.exercises.len(),
        });

        let mut occurrences: BTreeMap<ExerciseId, u32> = BTreeMap::new();
        for (index, entry) in self.plan.exercises.iter().enumerate() {
            let model = entry.model()?;
            let occurrence = occurrences.entry(model.id).or_default();
            let mut rng = exercise_rng(self.plan.seed, self.user.rng_seed, model.id, *occurrence);
            *occurrence += 1;

            match model.kind {
                ExerciseKind::TimedUpAndGo { distance_m } => self.run_tug(&model, distance_m)?,
                ExerciseKind::Repetition => self.run_repetition(index, entry, &model, &mut rng)?,
            }
        }

        let duration_s = self.state.time_s();
        self.state.emit(EventData::SessionEnd { duration_s });
        Ok(())
    }

    fn run_tug(&mut self, model: &ExerciseModel, distance_m: f64) -> Result<()> {
        self.state.emit(EventData::TugStart {
            exercise: model.id,
            distance_m,
        });
        let duration_s = timed_up_and_go(self.user, distance_m)?;
        self.state.advance(duration_s);
        self.state.emit(EventData::TugComplete {
            exercise: model.id,
            duration_s,
        });
        self.state.emit(EventData::ExerciseComplete {
            exercise: model.id,
            f_diff_right: None,
            f_diff_left: None,
        });
        Ok(())
    }

    fn run_repetition(&mut self, index: usize, entry: &PlanEntry, model: &ExerciseModel, rng: &mut SimRng) -> Result<()> {
        let cfg = &self.plan.calibration;
        for side in Side::BOTH {
            let result = run_calibration(model, &self.user.body, side, self.user, cfg, rng)?;
            for s in &result.samples {
                self.state.advance(cfg.move_time);
                self.state.advance(s.time_to_touch);
                self.state.emit(EventData::CalibrationSample {
                    exercise: model.id,
                    side,
                    fraction: s.fraction,
                    touched: s.touched,
                    time_to_touch: s.time_to_touch,
                });
            }
            self.state.emit(EventData::CalibrationDone {
                exercise: model.id,
                side,
                max_reached_fraction: result.max_reached_fraction,
                f_diff_start: result.f_diff_start,
            });
            self.state
                .difficulty
                .insert((index, side), DifficultyState::new(result.f_diff_start, self.plan.delta)?);
        }

        self.state.words_used.clear();
        for side in Side::BOTH {
            for set in 1..=entry.sets_per_side {
                if set > 1 {
                    self.state.advance(self.plan.rest_between_sets);
                }
                self.run_set(index, entry, model, side, set, rng)?;
            }
            self.state.advance(self.plan.rest_between_sets);
        }

        let final_f = |side| self.state.difficulty.get(&(index, side)).map(|d| d.f_diff);
        let data = EventData::ExerciseComplete {
            exercise: model.id,
            f_diff_right: final_f(Side::Right),
            f_diff_left: final_f(Side::Left),
        };
        self.state.emit(data);
        Ok(())
    }

    fn run_set(
        &mut self,
        index: usize,
        entry: &PlanEntry,
        model: &ExerciseModel,
        side: Side,
        set: u32,
        rng: &mut SimRng,
    ) -> Result<()> {
        let duration = entry.set_duration;
        let state = self.state.difficulty[&(index, side)].clone();
        let target = model.target_set(&self.user.body, state.f_diff, side)?;
        let start = self.state.clock;
        self.state.emit(EventData::SetStart {
            exercise: model.id,
            side,
            set,
            f_diff: state.f_diff,
            target: target.x_target.into(),
        });

        // The user's intended presses become pressure pulses; the detector
        // decides what actually counts.
        let planned = self.user.set_rep_count(model.id, side, state.f_diff, duration, rng);
        let latest = duration - BUMP_WIDTH_S - 0.05;
        let slot = duration / f64::from(planned.max(1));
        let presses: Vec<(f64, f64)> = (0..planned)
            .map(|i| {
                let jitter: f64 = rng.gen_range(-0.1..=0.1) * slot;
                let onset = ((f64::from(i) + 0.5) * slot - 0.5 * BUMP_WIDTH_S + jitter).clamp(0.0, latest);
                (onset, self.user.press_amplitude(rng))
            })
            .collect();
        let trace = synth_trace(&presses, duration, BUBBLE_BASELINE_PA, PRESSURE_SAMPLE_RATE_HZ)?;
        let contacts = detect_contacts(&trace, &self.plan.detector)?;

        for (k, contact) in contacts.iter().enumerate() {
            let tick = start + to_ticks(contact.onset_time);
            self.state.emit_at(
                tick,
                EventData::Rep {
                    exercise: model.id,
                    side,
                    set,
                    count: k as u32 + 1,
                    peak_pa: contact.peak_pressure_delta,
                },
            );
            if contact.too_hard {
                self.state.emit_at(
                    tick,
                    EventData::TooHard {
                        exercise: model.id,
                        side,
                        set,
                        peak_pa: contact.peak_pressure_delta,
                    },
                );
            }
            if let Some(category) = &entry.cognitive {
                let word = self.speak(category, rng)?;
                let verdict = self.plan.word_lists.validate_word(&word, category, &self.state.words_used)?;
                if verdict == WordVerdict::Valid {
                    self.state.words_used.insert(normalize_word(&word));
                }
                self.state.emit_at(
                    tick,
                    EventData::CognitiveWord {
                        exercise: model.id,
                        side,
                        set,
                        category: category.clone(),
                        word,
                        verdict,
                    },
                );
            }
        }

        let reps = contacts.len() as u32;
        let rpm = reps_per_minute(reps, duration)?;
        let bracket = bracket_score(reps, duration, &model.brackets)?;
        self.state.clock = start + to_ticks(duration);
        self.state.emit(EventData::SetComplete {
            exercise: model.id,
            side,
            set,
            reps,
            rpm,
            bracket,
        });

        let next = state.update(bracket);
        self.state.emit(EventData::DifficultyChanged {
            exercise: model.id,
            side,
            set,
            bracket,
            delta: crate::difficulty::delta_for(bracket, state.delta),
            old: state.f_diff,
            new: next.f_diff,
        });
        self.state.difficulty.insert((index, side), next);
        self.state.reps.entry((index, side)).or_default().push(reps);
        Ok(())
    }

    /// The word the simulated user says for one repetition.
    fn speak(&self, category: &str, rng: &mut SimRng) -> Result<String> {
        let list = self.plan.word_lists.get(category)?;
        let used = &self.state.words_used;
        let slip = rng.gen_bool(self.user.word_error_rate);
        let repeat = rng.gen_bool(0.5);
        let pick: usize = rng.gen();

        if slip && repeat && !used.is_empty() {
            let word = used.iter().nth(pick % used.len()).expect("index in range");
            // Repeats come back with different casing and spacing.
            return Ok(format!("  {} ", word.to_uppercase()));
        }
        if slip {
            return Ok(DISTRACTORS[pick % DISTRACTORS.len()].to_string());
        }
        let fresh: Vec<&String> = list.words().iter().filter(|w| !used.contains(*w)).collect();
        Ok(if fresh.is_empty() {
            list.words()[pick % list.len()].clone()
        } else {
            capitalize(fresh[pick % fresh.len()])
        })
    }
}

fn capitalize(word: &str) -> String {
    word.split(' ')
        .map(|part| {
            let mut chars = part.chars();
            match chars.next() {
                Some(c) => c.to_uppercase().chain(chars).collect(),
                None => String::new(),
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}
