//! Checkpoint and operator implementations wiring the wave kernels to the
//! driver.
//!
//! The working data is shared between the operators and the checkpoint via
//! `Rc<RefCell<..>>`, mirroring the single-owner, strictly serial driver
//! contract. A checkpoint holds the two live time levels of `u` plus the step
//! index — the minimal restart state for the second-order scheme. The merged
//! adjoint+gradient pass keeps exactly two live levels of `v` and never
//! stores the adjoint history.

use std::cell::RefCell;
use std::rc::Rc;

use crate::error::{Error, Result};
use crate::revolver::{Checkpoint, Operator};

use super::kernels::{accumulate_gradient, check_finite, leapfrog_level, InterpPoint};
use super::{GradientAccumulator, Model, PointSet, Wavefield};

/// Immutable problem data shared by the operators: model, source wavelet and
/// the precomputed interpolation stencils.
pub(crate) struct Rig {
    pub model: Model,
    pub source: PointSet,
    pub src_interp: Vec<InterpPoint>,
    pub rec_interp: Vec<InterpPoint>,
}

impl Rig {
    pub fn new(model: Model, source: PointSet, receiver_positions: &[f64]) -> Result<Self> {
        if source.is_empty() {
            return Err(Error::Config("at least one source point required".into()));
        }
        for trace in &source.traces {
            if trace.len() != model.nt() {
                return Err(Error::Shape(format!(
                    "source trace length {} != nt {}",
                    trace.len(),
                    model.nt()
                )));
            }
        }
        let src_interp = source
            .positions
            .iter()
            .map(|&x| InterpPoint::new(x, &model))
            .collect::<Result<_>>()?;
        let rec_interp = receiver_positions
            .iter()
            .map(|&x| InterpPoint::new(x, &model))
            .collect::<Result<_>>()?;
        Ok(Rig {
            model,
            source,
            src_interp,
            rec_interp,
        })
    }

    /// Source injections for forward step `t` (entering the update of
    /// `u[t+1]`).
    fn source_injections(&self, t: usize, out: &mut Vec<(usize, f64)>) {
        out.clear();
        for (p, interp) in self.src_interp.iter().enumerate() {
            interp.spread(self.source.traces[p][t], out);
        }
    }
}

/// Time-dependent working data of the forward computation: the live
/// wavefield pair and the synthetic data accumulated so far.
pub struct WorkState {
    pub field: Wavefield,
    /// `d_syn[r][t] = R u[t]`; sample 0 stays zero (field starts at rest).
    pub d_syn: Vec<Vec<f64>>,
    scratch: Vec<f64>,
}

impl WorkState {
    pub fn new(nx: usize, n_receivers: usize, nt: usize) -> Self {
        WorkState {
            field: Wavefield::new(nx),
            d_syn: vec![vec![0.0; nt]; n_receivers],
            scratch: vec![0.0; nx],
        }
    }

    /// Run forward step `field.t`, rotate the levels, and record the receiver
    /// sample of the new state.
    pub(crate) fn step_once(
        &mut self,
        rig: &Rig,
        injections: &mut Vec<(usize, f64)>,
    ) -> Result<()> {
        let t = self.field.t;
        rig.source_injections(t, injections);
        leapfrog_level(
            &rig.model,
            &self.field.prev,
            &self.field.curr,
            &mut self.scratch,
            injections,
        );
        check_finite(&self.scratch, t, "forward")?;
        // rotate: prev <- curr <- scratch (the old prev becomes scratch)
        std::mem::swap(&mut self.field.prev, &mut self.field.curr);
        std::mem::swap(&mut self.field.curr, &mut self.scratch);
        self.field.t = t + 1;
        let sample_at = t + 1;
        if sample_at < rig.model.nt() {
            for (r, interp) in rig.rec_interp.iter().enumerate() {
                self.d_syn[r][sample_at] = interp.sample(&self.field.curr);
            }
        }
        Ok(())
    }
}

/// Forward operator over `[t_start, t_end)`: requires the working state to
/// hold exactly `t_start`, steps the field and records receiver samples.
pub struct ForwardOperator {
    rig: Rc<Rig>,
    work: Rc<RefCell<WorkState>>,
    injections: Vec<(usize, f64)>,
}

impl ForwardOperator {
    pub(crate) fn new(rig: Rc<Rig>, work: Rc<RefCell<WorkState>>) -> Self {
        ForwardOperator {
            rig,
            work,
            injections: Vec::new(),
        }
    }
}

impl Operator for ForwardOperator {
    fn apply(&mut self, t_start: usize, t_end: usize) -> Result<()> {
        let mut work = self.work.borrow_mut();
        if work.field.t != t_start {
            return Err(Error::Protocol(format!(
                "forward operator asked to start at {t_start} but the field holds state {}",
                work.field.t
            )));
        }
        for _ in t_start..t_end {
            work.step_once(&self.rig, &mut self.injections)?;
        }
        Ok(())
    }
}

/// Adjoint-side state: the data residual, two live `v` levels, the descending
/// adjoint cursor, and the gradient accumulator.
pub struct AdjointState {
    /// `d_syn - d_obs`, one trace per receiver; set between the sweeps.
    residual: Vec<Vec<f64>>,
    v_next: Vec<f64>,
    v_next2: Vec<f64>,
    v_new: Vec<f64>,
    u_next: Vec<f64>,
    /// Next adjoint level `k` to compute; counts down from `nt` to 1.
    cursor: usize,
    pub grad: GradientAccumulator,
    injections: Vec<(usize, f64)>,
    ready: bool,
}

impl AdjointState {
    pub fn new(nx: usize) -> Self {
        AdjointState {
            residual: Vec::new(),
            v_next: vec![0.0; nx],
            v_next2: vec![0.0; nx],
            v_new: vec![0.0; nx],
            u_next: vec![0.0; nx],
            cursor: 0,
            grad: GradientAccumulator::new(nx),
            injections: Vec::new(),
            ready: false,
        }
    }

    /// Install the residual and zero the adjoint fields and gradient, arming
    /// a reverse sweep of `nt` steps.
    pub fn init_reverse(&mut self, residual: Vec<Vec<f64>>, nt: usize) {
        self.residual = residual;
        self.v_next.iter_mut().for_each(|v| *v = 0.0);
        self.v_next2.iter_mut().for_each(|v| *v = 0.0);
        self.cursor = nt;
        self.grad.reset();
        self.ready = true;
    }

    /// Number of live adjoint field levels held (two by construction; the
    /// adjoint history is never stored).
    pub fn live_levels(&self) -> usize {
        2
    }

    /// One adjoint step consuming forward state `t = cursor - 1`, given the
    /// two forward levels `u[t-1]`, `u[t]`. Recomputes `u[t+1]` with the
    /// forward kernel, steps `v` backward with the residual injected at the
    /// receivers, and accumulates the gradient for this level.
    pub(crate) fn step(&mut self, rig: &Rig, u_prev: &[f64], u_curr: &[f64]) -> Result<()> {
        if !self.ready || self.cursor == 0 {
            return Err(Error::Protocol(
                "adjoint state not armed for a reverse step".into(),
            ));
        }
        let k = self.cursor;
        let t = k - 1;
        let nt = rig.model.nt();

        rig.source_injections(t, &mut self.injections);
        leapfrog_level(
            &rig.model,
            u_prev,
            u_curr,
            &mut self.u_next,
            &self.injections,
        );
        check_finite(&self.u_next, t, "recomputed forward")?;

        // Residual enters the update of v[k]; the final level (k = nt) has no
        // data term, matching an unobserved final state.
        self.injections.clear();
        if k < nt {
            for (r, interp) in rig.rec_interp.iter().enumerate() {
                interp.spread(self.residual[r][k], &mut self.injections);
            }
        }
        leapfrog_level(
            &rig.model,
            &self.v_next2,
            &self.v_next,
            &mut self.v_new,
            &self.injections,
        );
        check_finite(&self.v_new, t, "adjoint")?;

        let inv_dt2 = 1.0 / (rig.model.dt() * rig.model.dt());
        accumulate_gradient(
            &mut self.grad.grad,
            u_prev,
            u_curr,
            &self.u_next,
            &self.v_new,
            inv_dt2,
        );

        // rotate: v_next2 <- v_next <- v_new
        std::mem::swap(&mut self.v_next2, &mut self.v_next);
        std::mem::swap(&mut self.v_next, &mut self.v_new);
        self.cursor = t;
        Ok(())
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn take_gradient(&mut self) -> Vec<f64> {
        self.ready = false;
        std::mem::take(&mut self.grad.grad)
    }
}

/// Reverse operator: one merged adjoint+gradient step per call, reading the
/// forward levels from the shared working state.
pub struct ReverseOperator {
    rig: Rc<Rig>,
    work: Rc<RefCell<WorkState>>,
    adjoint: Rc<RefCell<AdjointState>>,
}

impl ReverseOperator {
    pub(crate) fn new(
        rig: Rc<Rig>,
        work: Rc<RefCell<WorkState>>,
        adjoint: Rc<RefCell<AdjointState>>,
    ) -> Self {
        ReverseOperator { rig, work, adjoint }
    }
}

impl Operator for ReverseOperator {
    fn apply(&mut self, t_start: usize, t_end: usize) -> Result<()> {
        if t_end != t_start + 1 {
            return Err(Error::Protocol(
                "reverse operator runs one step per call".into(),
            ));
        }
        let work = self.work.borrow();
        let mut adj = self.adjoint.borrow_mut();
        if work.field.t != t_start {
            return Err(Error::Protocol(format!(
                "adjoint step {t_start} needs forward state {t_start}, but the field holds {}",
                work.field.t
            )));
        }
        if adj.cursor != t_start + 1 {
            return Err(Error::Protocol(format!(
                "adjoint steps must descend: got {t_start}, expected {}",
                adj.cursor.wrapping_sub(1)
            )));
        }
        adj.step(&self.rig, &work.field.prev, &work.field.curr)
    }
}

/// Deep-copy checkpoint of the working wavefield: step index plus both live
/// levels, byte-exact.
pub struct WaveCheckpoint {
    work: Rc<RefCell<WorkState>>,
    nx: usize,
}

impl WaveCheckpoint {
    pub(crate) fn new(work: Rc<RefCell<WorkState>>, nx: usize) -> Self {
        WaveCheckpoint { work, nx }
    }

    pub fn byte_size(nx: usize) -> usize {
        8 + 2 * nx * 8
    }
}

impl Checkpoint for WaveCheckpoint {
    fn size(&self) -> usize {
        Self::byte_size(self.nx)
    }

    fn save(&mut self, slot: &mut [u8]) -> Result<()> {
        let work = self.work.borrow();
        slot[..8].copy_from_slice(&(work.field.t as u64).to_le_bytes());
        let mut off = 8;
        for level in [&work.field.prev, &work.field.curr] {
            for v in level.iter() {
                slot[off..off + 8].copy_from_slice(&v.to_le_bytes());
                off += 8;
            }
        }
        Ok(())
    }

    fn load(&mut self, slot: &[u8]) -> Result<()> {
        let mut work = self.work.borrow_mut();
        work.field.t = u64::from_le_bytes(slot[..8].try_into().expect("slot header")) as usize;
        let field = &mut work.field;
        let mut off = 8;
        for level in [&mut field.prev, &mut field.curr] {
            for v in level.iter_mut() {
                *v = f64::from_le_bytes(slot[off..off + 8].try_into().expect("slot payload"));
                off += 8;
            }
        }
        Ok(())
    }
}

/// Application-facing bundle: owns the shared working state and hands out
/// the checkpoint and operators wired to it, ready to pass to a `Revolver`.
pub struct WaveProblem {
    rig: Rc<Rig>,
    work: Rc<RefCell<WorkState>>,
    adjoint: Rc<RefCell<AdjointState>>,
}

impl WaveProblem {
    pub fn new(model: Model, source: PointSet, receiver_positions: &[f64]) -> Result<Self> {
        let nx = model.nx();
        let nt = model.nt();
        let n_rec = receiver_positions.len();
        let rig = Rc::new(Rig::new(model, source, receiver_positions)?);
        Ok(WaveProblem {
            rig,
            work: Rc::new(RefCell::new(WorkState::new(nx, n_rec, nt))),
            adjoint: Rc::new(RefCell::new(AdjointState::new(nx))),
        })
    }

    pub fn model(&self) -> &Model {
        &self.rig.model
    }

    pub fn forward_operator(&self) -> ForwardOperator {
        ForwardOperator::new(self.rig.clone(), self.work.clone())
    }

    pub fn reverse_operator(&self) -> ReverseOperator {
        ReverseOperator::new(self.rig.clone(), self.work.clone(), self.adjoint.clone())
    }

    pub fn checkpoint(&self) -> WaveCheckpoint {
        WaveCheckpoint::new(self.work.clone(), self.rig.model.nx())
    }

    /// Synthetic data recorded so far, one trace per receiver.
    pub fn d_syn(&self) -> Vec<Vec<f64>> {
        self.work.borrow().d_syn.clone()
    }

    /// Snapshot of the working wavefield (two live levels + step index).
    pub fn wavefield(&self) -> Wavefield {
        self.work.borrow().field.clone()
    }

    /// Install the residual and arm the adjoint side for a reverse sweep.
    pub fn init_reverse(&self, residual: Vec<Vec<f64>>) {
        self.adjoint
            .borrow_mut()
            .init_reverse(residual, self.rig.model.nt());
    }

    /// Live adjoint field levels held during the merged pass.
    pub fn adjoint_live_levels(&self) -> usize {
        self.adjoint.borrow().live_levels()
    }

    pub fn take_gradient(&self) -> Vec<f64> {
        self.adjoint.borrow_mut().take_gradient()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_rig() -> Rc<Rig> {
        let nx = 21;
        let model = Model::new(vec![0.44; nx], vec![0.0; nx], 0.01, 0.002, 12).unwrap();
        let mut source = PointSet::new(vec![0.10], 12);
        source.traces[0][0] = 1.0;
        Rc::new(Rig::new(model, source, &[0.05, 0.15]).unwrap())
    }

    #[test]
    fn checkpoint_round_trip_is_bit_exact() {
        let rig = small_rig();
        let work = Rc::new(RefCell::new(WorkState::new(rig.model.nx(), 2, 12)));
        let mut inj = Vec::new();
        for _ in 0..5 {
            work.borrow_mut().step_once(&rig, &mut inj).unwrap();
        }
        let mut ckpt = WaveCheckpoint::new(work.clone(), rig.model.nx());
        let mut slot = vec![0u8; ckpt.size()];
        ckpt.save(&mut slot).unwrap();

        let snapshot = work.borrow().field.clone();
        for _ in 0..3 {
            work.borrow_mut().step_once(&rig, &mut inj).unwrap();
        }
        ckpt.load(&slot).unwrap();
        assert_eq!(work.borrow().field, snapshot);

        // forward steps after the restore are bit-identical to never having
        // checkpointed
        let mut replay = WorkState::new(rig.model.nx(), 2, 12);
        for _ in 0..8 {
            replay.step_once(&rig, &mut inj).unwrap();
        }
        for _ in 0..3 {
            work.borrow_mut().step_once(&rig, &mut inj).unwrap();
        }
        assert_eq!(work.borrow().field.curr, replay.field.curr);
    }

    #[test]
    fn forward_operator_rejects_wrong_start() {
        let rig = small_rig();
        let work = Rc::new(RefCell::new(WorkState::new(rig.model.nx(), 2, 12)));
        let mut op = ForwardOperator::new(rig, work);
        assert!(matches!(op.apply(3, 5), Err(Error::Protocol(_))));
        op.apply(0, 4).unwrap();
        assert!(matches!(op.apply(3, 5), Err(Error::Protocol(_))));
    }

    #[test]
    fn reverse_operator_enforces_descent_and_levels() {
        let rig = small_rig();
        let work = Rc::new(RefCell::new(WorkState::new(rig.model.nx(), 2, 12)));
        let adj = Rc::new(RefCell::new(AdjointState::new(rig.model.nx())));
        adj.borrow_mut().init_reverse(vec![vec![0.0; 12]; 2], 12);
        let mut fwd = ForwardOperator::new(rig.clone(), work.clone());
        fwd.apply(0, 11).unwrap();
        let mut rev = ReverseOperator::new(rig, work, adj);
        assert!(matches!(rev.apply(5, 7), Err(Error::Protocol(_))));
        assert!(matches!(rev.apply(5, 6), Err(Error::Protocol(_)))); // field at 11
        rev.apply(11, 12).unwrap();
        assert!(matches!(rev.apply(11, 12), Err(Error::Protocol(_)))); // must descend
    }
}
