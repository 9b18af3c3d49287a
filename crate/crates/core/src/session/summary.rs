//! Per-set summary table derived from an event log.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::difficulty::ScoreBracket;
use crate::exercise::{ExerciseId, Side};
use crate::session::events::{EventData, SessionEvent};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SetSummary {
    pub exercise: ExerciseId,
    pub side: Side,
    pub set: u32,
    pub reps: u32,
    pub rpm: f64,
    pub bracket: ScoreBracket,
    pub f_diff_before: f64,
    pub f_diff_after: f64,
}

pub fn summarize(events: &[SessionEvent]) -> Vec<SetSummary> {
    let mut rows = Vec::new();
    let mut pending: Option<SetSummary> = None;
    for e in events {
        match &e.data {
            EventData::SetStart { f_diff, .. } => {
                pending = Some(SetSummary {
                    exercise: ExerciseId::SeatedReachForward,
                    side: Side::Right,
                    set: 0,
                    reps: 0,
                    rpm: 0.0,
                    bracket: ScoreBracket::Poor,
                    f_diff_before: *f_diff,
                    f_diff_after: *f_diff,
                })
            }
            EventData::SetComplete {
                exercise,
                side,
                set,
                reps,
                rpm,
                bracket,
            } => {
                if let Some(row) = pending.as_mut() {
                    row.exercise = *exercise;
                    row.side = *side;
                    row.set = *set;
                    row.reps = *reps;
                    row.rpm = *rpm;
                    row.bracket = *bracket;
                }
            }
            EventData::DifficultyChanged { new, .. } => {
                if let Some(mut row) = pending.take() {
                    row.f_diff_after = *new;
                    rows.push(row);
                }
            }
            _ => {}
        }
    }
    rows
}

pub const CSV_HEADER: &str = "exercise,side,set,reps,rpm,bracket,f_diff_before,f_diff_after";

pub fn to_csv(rows: &[SetSummary]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{:.6},{},{:.6},{:.6}\n",
            r.exercise, r.side, r.set, r.reps, r.rpm, r.bracket, r.f_diff_before, r.f_diff_after
        ));
    }
    out
}

/// Final difficulty per exercise, in plan order: `(exercise, right, left)`.
pub fn final_difficulties(events: &[SessionEvent]) -> Vec<(ExerciseId, Option<f64>, Option<f64>)> {
    events
        .iter()
        .filter_map(|e| match &e.data {
            EventData::ExerciseComplete {
                exercise,
                f_diff_right,
                f_diff_left,
            } => Some((*exercise, *f_diff_right, *f_diff_left)),
            _ => None,
        })
        .collect()
}

/// Counts of each event kind, sorted by kind.
pub fn kind_counts(events: &[SessionEvent]) -> BTreeMap<&'static str, usize> {
    let mut counts = BTreeMap::new();
    for e in events {
        *counts.entry(e.kind()).or_insert(0) += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::BodyDimensions;
    use crate::session::{run_session, SessionPlan};
    use crate::user::SimulatedUser;

    #[test]
    fn one_row_per_set() {
        let user = SimulatedUser::ideal(BodyDimensions::from_height(1.6), 30.0, 1.0);
        let log = run_session(&SessionPlan::study(1), &user).unwrap();
        let rows = summarize(&log);
        assert_eq!(rows.len(), 24);
        assert_eq!(rows[0].set, 1);
        assert_eq!(rows[2].side, Side::Left);
        let csv = to_csv(&rows);
        assert_eq!(csv.lines().count(), 25);
        assert!(csv.starts_with(CSV_HEADER));
        for pair in rows.windows(2) {
            if pair[0].exercise == pair[1].exercise && pair[0].side == pair[1].side {
                assert_eq!(pair[0].f_diff_after, pair[1].f_diff_before);
            }
        }
        assert_eq!(final_difficulties(&log).len(), 6);
        assert_eq!(kind_counts(&log)["set_start"], 24);
    }
}
