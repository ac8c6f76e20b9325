//! Abstract interpreter for checkpoint schedules.
//!
//! Replays an action sequence against a symbolic machine — a current state
//! index, `snaps` slots, and an adjoint cursor counting down from `steps` —
//! and reports the first protocol violation, if any.

use serde::Serialize;

use super::{Action, ActionKind};

/// First violation found while simulating a schedule.
#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    /// Index into the action list (equal to its length when the schedule
    /// ended prematurely).
    pub index: usize,
    pub message: String,
}

/// Outcome of [`validate_schedule`].
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub violation: Option<Violation>,
    pub advance_count: u64,
    pub adjoint_count: u64,
}

impl ValidationReport {
    fn fail(index: usize, message: impl Into<String>, advances: u64, adjoints: u64) -> Self {
        ValidationReport {
            valid: false,
            violation: Some(Violation {
                index,
                message: message.into(),
            }),
            advance_count: advances,
            adjoint_count: adjoints,
        }
    }
}

/// Simulate `actions` for a reversal of `steps` time steps with `snaps`
/// slots. Violations are report content, not errors.
///
/// Checks: advances move the state only from where it stands and never past
/// the final state; takeshots store the current state into an in-range slot;
/// restores read only previously written slots; the first adjoint step occurs
/// exactly once, at state `steps - 1`; every later adjoint step occurs at
/// state `cursor - 1`; the schedule ends with a terminate action and a fully
/// unwound cursor.
pub fn validate_schedule(actions: &[Action], steps: usize, snaps: usize) -> ValidationReport {
    let mut state: usize = 0;
    let mut slots: Vec<Option<usize>> = vec![None; snaps];
    let mut cursor: usize = steps;
    let mut firstrun_seen = false;
    let mut terminated = false;
    let mut advances: u64 = 0;
    let mut adjoints: u64 = 0;

    for (i, a) in actions.iter().enumerate() {
        if terminated {
            return ValidationReport::fail(i, "action after terminate", advances, adjoints);
        }
        match a.kind {
            ActionKind::Advance => {
                if a.old_capo != state {
                    return ValidationReport::fail(
                        i,
                        format!("advance from {} but state is {}", a.old_capo, state),
                        advances,
                        adjoints,
                    );
                }
                if a.capo <= a.old_capo {
                    return ValidationReport::fail(
                        i,
                        "advance must move forward",
                        advances,
                        adjoints,
                    );
                }
                if a.capo > steps {
                    return ValidationReport::fail(
                        i,
                        "advance beyond last state",
                        advances,
                        adjoints,
                    );
                }
                advances += (a.capo - a.old_capo) as u64;
                state = a.capo;
            }
            ActionKind::Takeshot => {
                let Some(k) = a.check else {
                    return ValidationReport::fail(
                        i,
                        "takeshot without slot index",
                        advances,
                        adjoints,
                    );
                };
                if k >= snaps {
                    return ValidationReport::fail(
                        i,
                        format!("takeshot into slot {k} but snaps = {snaps}"),
                        advances,
                        adjoints,
                    );
                }
                if a.capo != state {
                    return ValidationReport::fail(
                        i,
                        format!("takeshot records state {} but state is {}", a.capo, state),
                        advances,
                        adjoints,
                    );
                }
                slots[k] = Some(state);
            }
            ActionKind::Restore => {
                let Some(k) = a.check else {
                    return ValidationReport::fail(
                        i,
                        "restore without slot index",
                        advances,
                        adjoints,
                    );
                };
                if k >= snaps {
                    return ValidationReport::fail(
                        i,
                        format!("restore from slot {k} but snaps = {snaps}"),
                        advances,
                        adjoints,
                    );
                }
                let Some(stored) = slots[k] else {
                    return ValidationReport::fail(
                        i,
                        format!("restore from never-written slot {k}"),
                        advances,
                        adjoints,
                    );
                };
                if a.capo != stored {
                    return ValidationReport::fail(
                        i,
                        format!(
                            "restore claims state {} but slot {k} holds {stored}",
                            a.capo
                        ),
                        advances,
                        adjoints,
                    );
                }
                state = stored;
            }
            ActionKind::Firstrun => {
                if firstrun_seen {
                    return ValidationReport::fail(
                        i,
                        "duplicate first adjoint step",
                        advances,
                        adjoints,
                    );
                }
                if steps == 0 || state != steps - 1 {
                    return ValidationReport::fail(
                        i,
                        format!(
                            "first adjoint step at state {state}, expected {}",
                            steps.saturating_sub(1)
                        ),
                        advances,
                        adjoints,
                    );
                }
                firstrun_seen = true;
                cursor -= 1;
                adjoints += 1;
            }
            ActionKind::Youturn => {
                if !firstrun_seen {
                    return ValidationReport::fail(
                        i,
                        "adjoint step before first adjoint step",
                        advances,
                        adjoints,
                    );
                }
                if cursor == 0 || state != cursor - 1 {
                    return ValidationReport::fail(
                        i,
                        format!(
                            "adjoint step at state {state}, expected {}",
                            cursor.wrapping_sub(1)
                        ),
                        advances,
                        adjoints,
                    );
                }
                cursor -= 1;
                adjoints += 1;
            }
            ActionKind::Terminate => {
                if cursor != 0 {
                    return ValidationReport::fail(
                        i,
                        format!("incomplete reversal: cursor at {cursor} on terminate"),
                        advances,
                        adjoints,
                    );
                }
                terminated = true;
            }
            ActionKind::Error => {
                return ValidationReport::fail(
                    i,
                    "schedule contains an error action",
                    advances,
                    adjoints,
                );
            }
        }
    }

    if !terminated {
        return ValidationReport::fail(
            actions.len(),
            format!("incomplete reversal: schedule ends without terminate (cursor at {cursor})"),
            advances,
            adjoints,
        );
    }
    ValidationReport {
        valid: true,
        violation: None,
        advance_count: advances,
        adjoint_count: adjoints,
    }
}
