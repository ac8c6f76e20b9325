//! Binomial checkpoint schedules as a stepwise action state machine.
//!
//! A [`Controller`] plays the classical revolve protocol: repeatedly asking it
//! for the next [`Action`] and executing advance / takeshot / restore /
//! firstrun / youturn drives a complete forward sweep and one adjoint step per
//! time step, using at most `snaps` simultaneously-live checkpoint slots and
//! the provably minimal number of forward steps.

mod controller;
pub mod cost;
mod validate;

pub use controller::Controller;
pub use cost::{adjust, adjust_objective, beta, min_advances, optimal_dp};
pub use validate::{validate_schedule, ValidationReport, Violation};

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// The scheduler's action vocabulary. Any schedule ends with exactly one
/// `Terminate` or one `Error`, never both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionKind {
    /// Run forward steps from `old_capo` to `capo`.
    Advance,
    /// Store the current state into slot `check`.
    Takeshot,
    /// Copy slot `check` back into the current state.
    Restore,
    /// First adjoint step: evaluate the objective and reverse the final time
    /// step. Consumes state `steps - 1`.
    Firstrun,
    /// Next adjoint step.
    Youturn,
    /// Schedule complete.
    Terminate,
    /// Protocol misuse or internal inconsistency.
    Error,
}

impl ActionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ActionKind::Advance => "advance",
            ActionKind::Takeshot => "takeshot",
            ActionKind::Restore => "restore",
            ActionKind::Firstrun => "firstrun",
            ActionKind::Youturn => "youturn",
            ActionKind::Terminate => "terminate",
            ActionKind::Error => "error",
        }
    }
}

/// One scheduler decision.
///
/// `old_capo` is the state held before the action and `capo` the target
/// state; `check` is the slot index, meaningful for takeshot/restore only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Action {
    pub kind: ActionKind,
    #[serde(rename = "oldCapo")]
    pub old_capo: usize,
    pub capo: usize,
    pub check: Option<usize>,
}

impl Action {
    /// Forward steps this action performs (nonzero only for advances).
    pub fn advance_steps(&self) -> usize {
        match self.kind {
            ActionKind::Advance => self.capo - self.old_capo,
            _ => 0,
        }
    }

    /// Compact single-token text form, e.g. `A 0->4`, `T s0`, `R s1`, `F 9`,
    /// `Y 8`, `END`.
    pub fn compact(&self) -> String {
        match self.kind {
            ActionKind::Advance => format!("A {}->{}", self.old_capo, self.capo),
            ActionKind::Takeshot => format!("T s{}", self.check.unwrap_or(usize::MAX)),
            ActionKind::Restore => format!("R s{}", self.check.unwrap_or(usize::MAX)),
            ActionKind::Firstrun => format!("F {}", self.capo),
            ActionKind::Youturn => format!("Y {}", self.capo),
            ActionKind::Terminate => "END".into(),
            ActionKind::Error => "ERR".into(),
        }
    }
}

/// A generated schedule with its work counters.
#[derive(Debug, Clone, Serialize)]
pub struct ScheduleReport {
    pub actions: Vec<Action>,
    /// Total forward steps over all advances: sum of `capo - old_capo`.
    pub advance_count: u64,
    pub takeshot_count: u64,
    pub restore_count: u64,
    /// High-water mark of simultaneously-live slots.
    pub peak_slots_used: usize,
}

impl ScheduleReport {
    /// Schedule as one ` | `-separated compact line.
    pub fn compact_line(&self) -> String {
        self.actions
            .iter()
            .map(Action::compact)
            .collect::<Vec<_>>()
            .join(" | ")
    }
}

/// Drive a fresh [`Controller`] to termination, collecting all actions and
/// counters. Errors from the controller propagate.
pub fn generate_schedule(steps: usize, snaps: usize) -> Result<ScheduleReport> {
    let mut ctl = Controller::new(Some(steps), snaps)?;
    let mut report = ScheduleReport {
        actions: Vec::new(),
        advance_count: 0,
        takeshot_count: 0,
        restore_count: 0,
        peak_slots_used: 0,
    };
    loop {
        let action = ctl.next_action();
        match action.kind {
            ActionKind::Advance => report.advance_count += action.advance_steps() as u64,
            ActionKind::Takeshot => {
                report.takeshot_count += 1;
                let used = action.check.map_or(0, |c| c + 1);
                report.peak_slots_used = report.peak_slots_used.max(used);
            }
            ActionKind::Restore => report.restore_count += 1,
            ActionKind::Error => {
                report.actions.push(action);
                return Err(crate::error::Error::Protocol(format!(
                    "controller error while generating schedule for steps={steps}, snaps={snaps}"
                )));
            }
            _ => {}
        }
        let done = action.kind == ActionKind::Terminate;
        report.actions.push(action);
        if done {
            return Ok(report);
        }
    }
}
