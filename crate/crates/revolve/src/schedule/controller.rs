//! The revolve scheduler state machine.

use super::{cost, Action, ActionKind};
use crate::error::{Error, Result};

/// Stepwise generator of the optimal binomial checkpoint schedule.
///
/// `capo` is the state currently held by the forward computation, `fine` the
/// upper end of the range still to be reversed, and `stored` the stack of
/// state indices sitting in checkpoint slots (slot `i` holds `stored[i]`).
/// Each call to [`Controller::next_action`] mutates this state and returns
/// the action the application must perform next.
///
/// Constructed without a step count the controller records online mode, in
/// which the schedule cannot be precomputed; the stepping logic for that mode
/// lives in the driver (`Revolver::online_step_forward`), and `next_action`
/// on an online controller yields an error action.
#[derive(Debug, Clone)]
pub struct Controller {
    steps: Option<usize>,
    snaps: usize,
    capo: usize,
    oldcapo: usize,
    fine: usize,
    /// State indices currently checkpointed; `stored.len() - 1` is the
    /// classical `check` pointer, empty meaning `check = -1`.
    stored: Vec<usize>,
    turn: bool,
    terminated: bool,
}

impl Controller {
    /// Position a fresh controller at `capo = 0` with no slots in use.
    ///
    /// `steps = None` selects online mode (see the driver). Zero step or slot
    /// counts are rejected as configuration errors.
    pub fn new(steps: Option<usize>, snaps: usize) -> Result<Self> {
        if snaps == 0 {
            return Err(Error::Config("snaps must be >= 1".into()));
        }
        if steps == Some(0) {
            return Err(Error::Config("steps must be >= 1 (empty time loop)".into()));
        }
        Ok(Controller {
            steps,
            snaps,
            capo: 0,
            oldcapo: 0,
            fine: steps.unwrap_or(0),
            stored: Vec::with_capacity(snaps),
            turn: false,
            terminated: false,
        })
    }

    pub fn steps(&self) -> Option<usize> {
        self.steps
    }

    pub fn snaps(&self) -> usize {
        self.snaps
    }

    /// State index currently held by the forward computation.
    pub fn capo(&self) -> usize {
        self.capo
    }

    pub fn oldcapo(&self) -> usize {
        self.oldcapo
    }

    /// Active slot index (classical `check`); `None` while no slot is in use.
    pub fn check(&self) -> Option<usize> {
        self.stored.len().checked_sub(1)
    }

    pub fn is_terminated(&self) -> bool {
        self.terminated
    }

    fn error(&mut self) -> Action {
        self.terminated = true;
        Action {
            kind: ActionKind::Error,
            old_capo: self.capo,
            capo: self.capo,
            check: None,
        }
    }

    /// Next action of the binomial-optimal schedule.
    ///
    /// Called after `Terminate` (or in online mode) this returns an `Error`
    /// action rather than panicking.
    pub fn next_action(&mut self) -> Action {
        if self.terminated || self.steps.is_none() {
            return self.error();
        }
        self.oldcapo = self.capo;
        let remaining = self.fine - self.capo;

        if remaining == 0 {
            // The adjoint step at `fine` is done; fall back to the previous
            // checkpoint, or finish once none remain.
            return match self.stored.last().copied() {
                None => {
                    self.terminated = true;
                    Action {
                        kind: ActionKind::Terminate,
                        old_capo: self.capo,
                        capo: self.capo,
                        check: None,
                    }
                }
                Some(state) => {
                    self.capo = state;
                    Action {
                        kind: ActionKind::Restore,
                        old_capo: self.oldcapo,
                        capo: state,
                        check: Some(self.stored.len() - 1),
                    }
                }
            };
        }

        if remaining == 1 {
            // Combined forward/adjoint step consuming state `capo`; a slot
            // holding exactly this state is freed for reuse.
            self.fine -= 1;
            if self.stored.last() == Some(&self.capo) {
                self.stored.pop();
            }
            let kind = if self.turn {
                ActionKind::Youturn
            } else {
                self.turn = true;
                ActionKind::Firstrun
            };
            return Action {
                kind,
                old_capo: self.capo,
                capo: self.capo,
                check: None,
            };
        }

        // remaining >= 2
        if self.stored.last() != Some(&self.capo) {
            // Checkpoint the current state before advancing into the range.
            if self.stored.len() == self.snaps {
                return self.error(); // all slots in use: inconsistent state
            }
            self.stored.push(self.capo);
            return Action {
                kind: ActionKind::Takeshot,
                old_capo: self.capo,
                capo: self.capo,
                check: Some(self.stored.len() - 1),
            };
        }

        match self.advance_width(remaining as u64) {
            Ok(width) => {
                self.capo += width;
                Action {
                    kind: ActionKind::Advance,
                    old_capo: self.oldcapo,
                    capo: self.capo,
                    check: None,
                }
            }
            Err(_) => self.error(),
        }
    }

    /// Width of the next advance when reversing `remaining >= 2` steps from a
    /// checkpointed base, by the classical binomial region rule.
    fn advance_width(&self, remaining: u64) -> Result<usize> {
        // Slots usable for this range: the base's own slot plus all free ones.
        let ds = (self.snaps - (self.stored.len() - 1)) as u64;
        let reps = cost::repetitions(remaining, ds)?;
        debug_assert!(reps >= 1);
        let bino1 = cost::beta(ds, reps - 1)?;
        let bino2 = cost::beta(ds - 1, reps - 1)?;
        let bino3 = if ds >= 2 {
            cost::beta(ds - 2, reps - 1)?
        } else {
            0
        };
        let bino4 = if reps >= 2 {
            cost::beta(ds, reps - 2)?
        } else {
            0
        };
        let bino5 = if ds >= 3 {
            cost::beta(ds - 3, reps)?
        } else {
            0
        };
        let range = cost::beta(ds, reps)?;

        let width = if remaining <= bino1 + bino3 {
            bino4
        } else if remaining >= range - bino5 {
            bino1
        } else {
            remaining - bino2 - bino3
        };
        Ok(width.clamp(1, remaining - 1) as usize)
    }
}
