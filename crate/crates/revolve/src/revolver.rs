//! Driver orchestrating forward and reverse operators under a checkpoint
//! schedule.
//!
//! The application supplies three capabilities: a [`Checkpoint`] that can
//! deep-copy its time-dependent working data into (and back out of) a raw
//! byte slot, and two [`Operator`]s running the forward and reverse
//! computations over a half-open step range. The [`Revolver`] owns the slot
//! [`Storage`] and a schedule [`Controller`] and issues exactly one operator
//! call at a time; any internal parallelism belongs to the operators.

use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::schedule::{adjust, Action, ActionKind, Controller};
use crate::storage::Storage;

/// Deep-copy interface between the application's working memory and one
/// checkpoint slot. `load(save(state))` must restore the working data so that
/// subsequent forward steps are bit-identical to never having checkpointed.
pub trait Checkpoint {
    /// Bytes one checkpoint occupies; fixes the storage slot size.
    fn size(&self) -> usize;
    /// Copy all time-dependent working data into `slot`.
    fn save(&mut self, slot: &mut [u8]) -> Result<()>;
    /// Restore working data from `slot`.
    fn load(&mut self, slot: &[u8]) -> Result<()>;
}

/// A computation over the half-open step range `[t_start, t_end)`.
/// Applying `[a, b)` then `[b, c)` must equal applying `[a, c)`.
pub trait Operator {
    fn apply(&mut self, t_start: usize, t_end: usize) -> Result<()>;
}

/// Completion report of the forward sweep.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct ForwardReport {
    /// Forward steps executed (the sweep runs to state `steps - 1`; the final
    /// step is fused into the first adjoint step).
    pub advance_steps: u64,
    pub takeshots: u64,
}

/// Completion report of the reverse sweep.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct ReverseReport {
    /// Forward steps re-executed to reposition the working state.
    pub advance_steps_recomputed: u64,
    pub restores: u64,
    pub adjoint_steps: u64,
}

/// Per-call report of [`Revolver::online_step_forward`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OnlineStepReport {
    pub checkpoint_taken: bool,
}

/// One recorded action with its wallclock cost, for the structured trace log.
#[derive(Debug, Clone, Serialize)]
pub struct TraceRecord {
    #[serde(flatten)]
    pub action: Action,
    /// Seconds spent executing the action (operator or copy time).
    pub wallclock: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Offline,
    Online,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Fresh,
    ForwardDone,
    Done,
}

#[derive(Debug, Default)]
struct OnlineState {
    /// Target checkpoint stride; doubles on eviction.
    stride: usize,
    /// `(step index, physical slot)` pairs currently held, step-sorted.
    live: Vec<(usize, usize)>,
    /// Physical slots not holding a live checkpoint.
    free: Vec<usize>,
    steps_taken: usize,
}

/// Driver binding a checkpoint operand, forward and reverse operators, slot
/// storage and a schedule controller.
pub struct Revolver<C: Checkpoint, F: Operator, R: Operator> {
    checkpoint: C,
    op_forward: F,
    op_reverse: R,
    storage: Storage,
    controller: Option<Controller>,
    n_checkpoints: usize,
    n_timesteps: Option<usize>,
    mode: Mode,
    phase: Phase,
    pending: Option<Action>,
    online: OnlineState,
    trace: Option<Vec<TraceRecord>>,
}

impl<C: Checkpoint, F: Operator, R: Operator> Revolver<C, F, R> {
    /// Build a driver.
    ///
    /// With `n_checkpoints` absent the slot count defaults to
    /// `adjust(n_timesteps)`; with `n_timesteps` absent the driver runs in
    /// online mode (step count unknown in advance). At least one of the two
    /// must be given, since the storage cannot be sized otherwise.
    pub fn new(
        checkpoint: C,
        op_forward: F,
        op_reverse: R,
        n_checkpoints: Option<usize>,
        n_timesteps: Option<usize>,
    ) -> Result<Self> {
        let size = checkpoint.size();
        if size == 0 {
            return Err(Error::Config("checkpoint size must be >= 1 byte".into()));
        }
        if n_timesteps == Some(0) {
            return Err(Error::Config("n_timesteps must be >= 1".into()));
        }
        let n_ckp = match (n_checkpoints, n_timesteps) {
            (Some(0), _) => {
                return Err(Error::Config("n_checkpoints must be >= 1".into()));
            }
            (Some(c), _) => c,
            (None, Some(t)) => adjust(t as u64)? as usize,
            (None, None) => {
                return Err(Error::Config(
                    "cannot size storage: need n_checkpoints or n_timesteps".into(),
                ));
            }
        };
        let (mode, controller) = match n_timesteps {
            Some(t) => (Mode::Offline, Some(Controller::new(Some(t), n_ckp)?)),
            None => (Mode::Online, None),
        };
        let storage = Storage::new(n_ckp, size)?;
        let online = OnlineState {
            stride: 1,
            live: Vec::new(),
            free: (0..n_ckp).rev().collect(),
            steps_taken: 0,
        };
        Ok(Revolver {
            checkpoint,
            op_forward,
            op_reverse,
            storage,
            controller,
            n_checkpoints: n_ckp,
            n_timesteps,
            mode,
            phase: Phase::Fresh,
            pending: None,
            online,
            trace: None,
        })
    }

    /// Record a structured action trace (kind, range, slot, wallclock per
    /// action) during the sweeps.
    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn n_checkpoints(&self) -> usize {
        self.n_checkpoints
    }

    pub fn n_timesteps(&self) -> Option<usize> {
        self.n_timesteps
    }

    pub fn storage(&self) -> &Storage {
        &self.storage
    }

    pub fn op_forward(&self) -> &F {
        &self.op_forward
    }

    pub fn op_reverse(&self) -> &R {
        &self.op_reverse
    }

    /// Recorded actions, when tracing was enabled.
    pub fn action_trace(&self) -> Option<&[TraceRecord]> {
        self.trace.as_deref()
    }

    /// Trace serialized as JSON lines (same schema as the schedule files,
    /// plus a `wallclock` seconds field).
    pub fn trace_json_lines(&self) -> Option<String> {
        self.trace.as_ref().map(|t| {
            let mut out = String::new();
            for rec in t {
                out.push_str(&serde_json::to_string(rec).expect("trace serializes"));
                out.push('\n');
            }
            out
        })
    }

    fn record(&mut self, action: Action, started: Instant) {
        if let Some(trace) = &mut self.trace {
            trace.push(TraceRecord {
                action,
                wallclock: started.elapsed().as_secs_f64(),
            });
        }
    }

    fn save_slot(&mut self, slot: usize) -> Result<()> {
        self.checkpoint.save(self.storage.get_item_mut(slot)?)
    }

    fn load_slot(&mut self, slot: usize) -> Result<()> {
        self.checkpoint.load(self.storage.get_item(slot)?)
    }

    fn run_forward(&mut self, t_start: usize, t_end: usize, action: &'static str) -> Result<()> {
        self.op_forward
            .apply(t_start, t_end)
            .map_err(|e| Error::Operator {
                action,
                t_start,
                t_end,
                source: Box::new(e),
            })
    }

    fn run_reverse(&mut self, t: usize, action: &'static str) -> Result<()> {
        self.op_reverse
            .apply(t, t + 1)
            .map_err(|e| Error::Operator {
                action,
                t_start: t,
                t_end: t + 1,
                source: Box::new(e),
            })
    }

    /// Forward sweep: execute advances and takeshots until the controller
    /// hands control to the adjoint phase (immediately before the first
    /// adjoint step). On return the working state holds the forward solution
    /// the adjoint starts from, and the caller may evaluate objectives and
    /// initialize adjoint data before [`Revolver::apply_reverse`].
    pub fn apply_forward(&mut self) -> Result<ForwardReport> {
        if self.mode != Mode::Offline {
            return Err(Error::Protocol(
                "apply_forward requires offline mode".into(),
            ));
        }
        if self.phase != Phase::Fresh {
            return Err(Error::Protocol(
                "apply_forward called on a non-fresh revolver".into(),
            ));
        }
        let mut report = ForwardReport::default();
        loop {
            let action = self
                .controller
                .as_mut()
                .expect("offline controller")
                .next_action();
            let started = Instant::now();
            match action.kind {
                ActionKind::Takeshot => {
                    let slot = action.check.expect("takeshot carries a slot");
                    self.save_slot(slot)?;
                    report.takeshots += 1;
                }
                ActionKind::Advance => {
                    self.run_forward(action.old_capo, action.capo, "advance")?;
                    report.advance_steps += action.advance_steps() as u64;
                }
                ActionKind::Firstrun => {
                    self.pending = Some(action);
                    self.phase = Phase::ForwardDone;
                    return Ok(report);
                }
                other => {
                    return Err(Error::Protocol(format!(
                        "unexpected {} action during forward sweep",
                        other.as_str()
                    )));
                }
            }
            self.record(action, started);
        }
    }

    /// Reverse sweep: execute the remaining schedule — adjoint steps one at a
    /// time, restores, and recomputation advances — until termination.
    pub fn apply_reverse(&mut self) -> Result<ReverseReport> {
        if self.mode != Mode::Offline {
            return Err(Error::Protocol(
                "apply_reverse requires offline mode".into(),
            ));
        }
        if self.phase != Phase::ForwardDone {
            return Err(Error::Protocol(
                "apply_reverse called before apply_forward completed".into(),
            ));
        }
        let mut report = ReverseReport::default();

        let first = self.pending.take().expect("firstrun action pending");
        let started = Instant::now();
        self.run_reverse(first.capo, "firstrun")?;
        report.adjoint_steps += 1;
        self.record(first, started);

        loop {
            let action = self
                .controller
                .as_mut()
                .expect("offline controller")
                .next_action();
            let started = Instant::now();
            match action.kind {
                ActionKind::Advance => {
                    self.run_forward(action.old_capo, action.capo, "advance")?;
                    report.advance_steps_recomputed += action.advance_steps() as u64;
                }
                ActionKind::Restore => {
                    self.load_slot(action.check.expect("restore carries a slot"))?;
                    report.restores += 1;
                }
                ActionKind::Takeshot => {
                    self.save_slot(action.check.expect("takeshot carries a slot"))?;
                }
                ActionKind::Youturn => {
                    self.run_reverse(action.capo, "youturn")?;
                    report.adjoint_steps += 1;
                }
                ActionKind::Terminate => {
                    self.record(action, started);
                    self.phase = Phase::Done;
                    return Ok(report);
                }
                other => {
                    return Err(Error::Protocol(format!(
                        "unexpected {} action during reverse sweep",
                        other.as_str()
                    )));
                }
            }
            self.record(action, started);
        }
    }

    /// Online mode: advance the working state one step, maintaining the
    /// stride-doubling checkpoint set (fill empty slots at stride 1; when
    /// full, double the target stride and evict checkpoints off the new
    /// grid, keeping step 0 always).
    ///
    /// This heuristic is not the provably optimal online strategy; it bounds
    /// recomputation at roughly one extra sweep while never exceeding the
    /// slot budget.
    pub fn online_step_forward(&mut self) -> Result<OnlineStepReport> {
        if self.mode != Mode::Online {
            return Err(Error::Protocol(
                "online_step_forward requires online mode".into(),
            ));
        }
        if self.phase != Phase::Fresh {
            return Err(Error::Protocol("online forward phase is over".into()));
        }
        let mut taken = false;
        if self.online.steps_taken == 0 && self.online.live.is_empty() {
            let slot = self
                .online
                .free
                .pop()
                .expect("fresh storage has free slots");
            let started = Instant::now();
            self.save_slot(slot)?;
            self.online.live.push((0, slot));
            self.record(takeshot_action(0, slot), started);
            taken = true;
        }

        let t = self.online.steps_taken;
        let started = Instant::now();
        self.run_forward(t, t + 1, "advance")?;
        self.record(advance_action(t, t + 1), started);
        self.online.steps_taken = t + 1;

        let state = t + 1;
        loop {
            if !state.is_multiple_of(self.online.stride) {
                break;
            }
            if let Some(slot) = self.online.free.pop() {
                let started = Instant::now();
                self.save_slot(slot)?;
                self.record(takeshot_action(state, slot), started);
                insert_live(&mut self.online.live, state, slot);
                taken = true;
                break;
            }
            // All slots in use: coarsen the grid and evict everything off it.
            self.online.stride *= 2;
            let stride = self.online.stride;
            let (keep, evict): (Vec<_>, Vec<_>) = self
                .online
                .live
                .drain(..)
                .partition(|&(step, _)| step == 0 || step % stride == 0);
            self.online.live = keep;
            self.online
                .free
                .extend(evict.into_iter().map(|(_, slot)| slot));
        }
        Ok(OnlineStepReport {
            checkpoint_taken: taken,
        })
    }

    /// Live `(step, slot)` checkpoints of the online forward phase, in step
    /// order. Exposed for inspection and tests.
    pub fn online_live_checkpoints(&self) -> Vec<(usize, usize)> {
        self.online.live.clone()
    }

    /// Online mode: record the total step count seen and perform the reverse
    /// sweep. Each span between surviving checkpoints is reversed with an
    /// offline binomial sub-schedule over the slots available to it (its base
    /// slot plus every slot already released).
    pub fn online_finalize_and_reverse(&mut self) -> Result<ReverseReport> {
        if self.mode != Mode::Online {
            return Err(Error::Protocol(
                "online_finalize_and_reverse requires online mode".into(),
            ));
        }
        if self.phase != Phase::Fresh {
            return Err(Error::Protocol("reverse sweep already performed".into()));
        }
        let total = self.online.steps_taken;
        if total == 0 {
            return Err(Error::Protocol(
                "no forward steps taken before reverse".into(),
            ));
        }
        self.phase = Phase::ForwardDone;
        let mut report = ReverseReport::default();

        // A checkpoint of the final state cannot seed any adjoint work.
        let mut live = std::mem::take(&mut self.online.live);
        live.retain(|&(step, slot)| {
            if step >= total {
                self.online.free.push(slot);
                false
            } else {
                true
            }
        });
        debug_assert!(live.first().map(|&(s, _)| s) == Some(0));

        let mut upper = total;
        for idx in (0..live.len()).rev() {
            let (base, base_slot) = live[idx];
            let pool: Vec<usize> = std::iter::once(base_slot)
                .chain(self.online.free.iter().copied())
                .collect();
            self.reverse_segment(base, upper, &pool, total, &mut report)?;
            self.online.free.push(base_slot);
            upper = base;
        }

        if self.trace.is_some() {
            self.record(terminate_action(), Instant::now());
        }
        self.phase = Phase::Done;
        Ok(report)
    }

    /// Reverse `[base, end)` using an offline sub-schedule over `pool`
    /// (physical slots; `pool[0]` already holds state `base`).
    fn reverse_segment(
        &mut self,
        base: usize,
        end: usize,
        pool: &[usize],
        total: usize,
        report: &mut ReverseReport,
    ) -> Result<()> {
        let started = Instant::now();
        self.load_slot(pool[0])?;
        self.record(restore_action(base, pool[0]), started);
        report.restores += 1;

        let mut ctl = Controller::new(Some(end - base), pool.len())?;
        loop {
            let action = ctl.next_action();
            let started = Instant::now();
            match action.kind {
                ActionKind::Advance => {
                    let (a, b) = (base + action.old_capo, base + action.capo);
                    self.run_forward(a, b, "advance")?;
                    report.advance_steps_recomputed += (b - a) as u64;
                    self.record(advance_action(a, b), started);
                }
                ActionKind::Takeshot => {
                    let slot = pool[action.check.expect("takeshot carries a slot")];
                    self.save_slot(slot)?;
                    self.record(takeshot_action(base + action.capo, slot), started);
                }
                ActionKind::Restore => {
                    let slot = pool[action.check.expect("restore carries a slot")];
                    self.load_slot(slot)?;
                    report.restores += 1;
                    self.record(restore_action(base + action.capo, slot), started);
                }
                ActionKind::Firstrun | ActionKind::Youturn => {
                    let t = base + action.capo;
                    self.run_reverse(t, "youturn")?;
                    report.adjoint_steps += 1;
                    // Globally this is the first adjoint step only at t = total - 1.
                    let kind = if t + 1 == total {
                        ActionKind::Firstrun
                    } else {
                        ActionKind::Youturn
                    };
                    self.record(
                        Action {
                            kind,
                            old_capo: t,
                            capo: t,
                            check: None,
                        },
                        started,
                    );
                }
                ActionKind::Terminate => return Ok(()),
                ActionKind::Error => {
                    return Err(Error::Protocol("sub-schedule controller error".into()));
                }
            }
        }
    }
}

fn insert_live(live: &mut Vec<(usize, usize)>, step: usize, slot: usize) {
    let pos = live.partition_point(|&(s, _)| s < step);
    live.insert(pos, (step, slot));
}

fn takeshot_action(state: usize, slot: usize) -> Action {
    Action {
        kind: ActionKind::Takeshot,
        old_capo: state,
        capo: state,
        check: Some(slot),
    }
}

fn restore_action(state: usize, slot: usize) -> Action {
    Action {
        kind: ActionKind::Restore,
        old_capo: state,
        capo: state,
        check: Some(slot),
    }
}

fn advance_action(from: usize, to: usize) -> Action {
    Action {
        kind: ActionKind::Advance,
        old_capo: from,
        capo: to,
        check: None,
    }
}

fn terminate_action() -> Action {
    Action {
        kind: ActionKind::Terminate,
        old_capo: 0,
        capo: 0,
        check: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::RefCell;
    use std::rc::Rc;

    /// Deterministic integer time-stepper: the forward map is injective in
    /// the step history, and the reverse fold consumes states in descending
    /// order, so any recomputation slip changes the digest.
    #[derive(Debug, Default)]
    struct Sim {
        t: usize,
        state: u64,
        digest: u64,
        cursor: Option<usize>,
    }

    impl Sim {
        fn step(&mut self) {
            self.state = self
                .state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(self.t as u64 + 1);
            self.t += 1;
        }
    }

    struct SimCheckpoint(Rc<RefCell<Sim>>);
    impl Checkpoint for SimCheckpoint {
        fn size(&self) -> usize {
            16
        }
        fn save(&mut self, slot: &mut [u8]) -> Result<()> {
            let sim = self.0.borrow();
            slot[..8].copy_from_slice(&(sim.t as u64).to_le_bytes());
            slot[8..16].copy_from_slice(&sim.state.to_le_bytes());
            Ok(())
        }
        fn load(&mut self, slot: &[u8]) -> Result<()> {
            let mut sim = self.0.borrow_mut();
            sim.t = u64::from_le_bytes(slot[..8].try_into().unwrap()) as usize;
            sim.state = u64::from_le_bytes(slot[8..16].try_into().unwrap());
            Ok(())
        }
    }

    struct SimForward(Rc<RefCell<Sim>>);
    impl Operator for SimForward {
        fn apply(&mut self, t_start: usize, t_end: usize) -> Result<()> {
            let mut sim = self.0.borrow_mut();
            if sim.t != t_start {
                return Err(Error::Protocol(format!(
                    "forward starts at {t_start} but state is {}",
                    sim.t
                )));
            }
            for _ in t_start..t_end {
                sim.step();
            }
            Ok(())
        }
    }

    struct SimReverse(Rc<RefCell<Sim>>);
    impl Operator for SimReverse {
        fn apply(&mut self, t_start: usize, t_end: usize) -> Result<()> {
            assert_eq!(t_end, t_start + 1);
            let mut sim = self.0.borrow_mut();
            if sim.t != t_start {
                return Err(Error::Protocol(format!(
                    "reverse consumes state {t_start} but state is {}",
                    sim.t
                )));
            }
            if let Some(c) = sim.cursor {
                assert_eq!(t_start, c - 1, "adjoint steps must descend");
            }
            sim.cursor = Some(t_start);
            sim.digest = sim.digest.wrapping_mul(31).wrapping_add(sim.state);
            Ok(())
        }
    }

    fn rig(sim: &Rc<RefCell<Sim>>) -> (SimCheckpoint, SimForward, SimReverse) {
        (
            SimCheckpoint(sim.clone()),
            SimForward(sim.clone()),
            SimReverse(sim.clone()),
        )
    }

    /// Digest of the reverse fold with unlimited memory.
    fn reference_digest(steps: usize) -> u64 {
        let mut states = vec![0u64];
        let sim = Rc::new(RefCell::new(Sim::default()));
        for _ in 0..steps {
            sim.borrow_mut().step();
            states.push(sim.borrow().state);
        }
        let mut digest = 0u64;
        for t in (0..steps).rev() {
            digest = digest.wrapping_mul(31).wrapping_add(states[t]);
        }
        digest
    }

    fn run_offline(
        steps: usize,
        snaps: usize,
    ) -> (u64, ForwardReport, ReverseReport, Vec<TraceRecord>) {
        let sim = Rc::new(RefCell::new(Sim::default()));
        let (c, f, r) = rig(&sim);
        let mut rv = Revolver::new(c, f, r, Some(snaps), Some(steps))
            .unwrap()
            .with_trace();
        let fwd = rv.apply_forward().unwrap();
        let rev = rv.apply_reverse().unwrap();
        let trace = rv.action_trace().unwrap().to_vec();
        let digest = sim.borrow().digest;
        (digest, fwd, rev, trace)
    }

    #[test]
    fn constructor_contract() {
        let sim = Rc::new(RefCell::new(Sim::default()));
        let (c, f, r) = rig(&sim);
        assert!(matches!(
            Revolver::new(c, f, r, None, None),
            Err(Error::Config(_))
        ));

        let (c, f, r) = rig(&sim);
        let rv = Revolver::new(c, f, r, Some(20), Some(1615)).unwrap();
        assert_eq!(rv.n_checkpoints(), 20);
        assert_eq!(rv.storage().allocated_bytes(), 20 * 16);

        // default slot count comes from the adjust rule (frozen: adjust(1615) = 6)
        let (c, f, r) = rig(&sim);
        let rv = Revolver::new(c, f, r, None, Some(1615)).unwrap();
        assert_eq!(rv.n_checkpoints(), 6);
    }

    #[test]
    fn digest_matches_reference_for_various_slot_counts() {
        for steps in [1usize, 2, 9, 10, 33] {
            let want = reference_digest(steps);
            for snaps in [1usize, 2, 3, 8, steps] {
                let (digest, fwd, rev, _) = run_offline(steps, snaps);
                assert_eq!(digest, want, "steps={steps}, snaps={snaps}");
                assert_eq!(rev.adjoint_steps, steps as u64);
                assert_eq!(
                    fwd.advance_steps + rev.advance_steps_recomputed,
                    crate::schedule::min_advances(steps as u64, snaps as u64).unwrap()
                );
            }
        }
    }

    #[test]
    fn zero_recompute_boundary() {
        let (_, fwd, rev, _) = run_offline(10, 9);
        assert_eq!(rev.advance_steps_recomputed, 0);
        assert_eq!(fwd.advance_steps, 9);
        let (_, fwd, rev, _) = run_offline(10, 10);
        assert_eq!(rev.advance_steps_recomputed, 0);
        assert!(fwd.takeshots <= 10);
    }

    #[test]
    fn trace_is_a_valid_schedule() {
        let (_, _, _, trace) = run_offline(23, 4);
        let actions: Vec<Action> = trace.iter().map(|r| r.action).collect();
        let v = crate::schedule::validate_schedule(&actions, 23, 4);
        assert!(v.valid, "{:?}", v.violation);
    }

    #[test]
    fn phase_misuse_is_a_protocol_error() {
        let sim = Rc::new(RefCell::new(Sim::default()));
        let (c, f, r) = rig(&sim);
        let mut rv = Revolver::new(c, f, r, Some(3), Some(10)).unwrap();
        assert!(matches!(rv.apply_reverse(), Err(Error::Protocol(_))));
        rv.apply_forward().unwrap();
        assert!(matches!(rv.apply_forward(), Err(Error::Protocol(_))));
        rv.apply_reverse().unwrap();
        assert!(matches!(rv.online_step_forward(), Err(Error::Protocol(_))));
    }

    #[test]
    fn online_policy_first_calls_checkpoint() {
        let sim = Rc::new(RefCell::new(Sim::default()));
        let (c, f, r) = rig(&sim);
        let mut rv = Revolver::new(c, f, r, Some(4), None).unwrap();
        for _ in 0..4 {
            assert!(rv.online_step_forward().unwrap().checkpoint_taken);
        }
    }

    #[test]
    fn online_policy_stride_doubling_after_nine_steps() {
        let sim = Rc::new(RefCell::new(Sim::default()));
        let (c, f, r) = rig(&sim);
        let mut rv = Revolver::new(c, f, r, Some(4), None).unwrap();
        for _ in 0..9 {
            rv.online_step_forward().unwrap();
        }
        // hand-simulated from the stated eviction rule
        let steps: Vec<usize> = rv
            .online_live_checkpoints()
            .iter()
            .map(|&(s, _)| s)
            .collect();
        assert_eq!(steps, vec![0, 4, 8]);
        assert!(rv.online_live_checkpoints().len() <= 4);
    }

    #[test]
    fn online_reverse_matches_reference() {
        for steps in [1usize, 2, 7, 16, 29] {
            let want = reference_digest(steps);
            for snaps in [1usize, 2, 4, 6] {
                let sim = Rc::new(RefCell::new(Sim::default()));
                let (c, f, r) = rig(&sim);
                let mut rv = Revolver::new(c, f, r, Some(snaps), None)
                    .unwrap()
                    .with_trace();
                for _ in 0..steps {
                    rv.online_step_forward().unwrap();
                }
                let rev = rv.online_finalize_and_reverse().unwrap();
                assert_eq!(sim.borrow().digest, want, "steps={steps}, snaps={snaps}");
                assert_eq!(rev.adjoint_steps, steps as u64);

                let actions: Vec<Action> = rv
                    .action_trace()
                    .unwrap()
                    .iter()
                    .map(|r| r.action)
                    .collect();
                let v = crate::schedule::validate_schedule(&actions, steps, snaps);
                assert!(v.valid, "steps={steps}, snaps={snaps}: {:?}", v.violation);
            }
        }
    }

    #[test]
    fn online_single_step_single_slot() {
        let sim = Rc::new(RefCell::new(Sim::default()));
        let (c, f, r) = rig(&sim);
        let mut rv = Revolver::new(c, f, r, Some(1), None).unwrap();
        rv.online_step_forward().unwrap();
        let rev = rv.online_finalize_and_reverse().unwrap();
        assert_eq!(rev.advance_steps_recomputed, 0);
        assert_eq!(rev.adjoint_steps, 1);
        assert_eq!(sim.borrow().digest, reference_digest(1));
    }

    #[test]
    fn online_finalize_without_steps_is_an_error() {
        let sim = Rc::new(RefCell::new(Sim::default()));
        let (c, f, r) = rig(&sim);
        let mut rv = Revolver::new(c, f, r, Some(2), None).unwrap();
        assert!(matches!(
            rv.online_finalize_and_reverse(),
            Err(Error::Protocol(_))
        ));
    }

    #[test]
    fn trace_json_lines_schema() {
        let sim = Rc::new(RefCell::new(Sim::default()));
        let (c, f, r) = rig(&sim);
        let mut rv = Revolver::new(c, f, r, Some(2), Some(4))
            .unwrap()
            .with_trace();
        rv.apply_forward().unwrap();
        rv.apply_reverse().unwrap();
        let lines = rv.trace_json_lines().unwrap();
        for line in lines.lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            assert!(v.get("kind").is_some());
            assert!(v.get("oldCapo").is_some());
            assert!(v.get("wallclock").is_some());
        }
    }
}
