//! Objective, reference (full-storage) gradient, and the checkpointed and
//! online gradient paths.
//!
//! The full-storage run is the oracle: it keeps every forward level in
//! memory. The checkpointed paths recompute levels from slots instead, but
//! execute the same kernels on the same values in the same order, so their
//! objective and gradient match the oracle bitwise.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::revolver::Revolver;

use super::operators::{
    AdjointState, ForwardOperator, ReverseOperator, Rig, WaveCheckpoint, WaveProblem, WorkState,
};
use super::{Model, PointSet};

/// Half squared l2 norm of `d_syn - d_obs` over all receivers and samples.
pub fn objective(d_syn: &PointSet, d_obs: &PointSet) -> Result<f64> {
    if d_syn.len() != d_obs.len() {
        return Err(Error::Shape(format!(
            "{} synthetic traces vs {} observed",
            d_syn.len(),
            d_obs.len()
        )));
    }
    let mut acc = 0.0;
    for (s, o) in d_syn.traces.iter().zip(&d_obs.traces) {
        if s.len() != o.len() {
            return Err(Error::Shape(format!(
                "trace lengths {} vs {}",
                s.len(),
                o.len()
            )));
        }
        for (a, b) in s.iter().zip(o) {
            let d = a - b;
            acc += d * d;
        }
    }
    Ok(0.5 * acc)
}

fn compute_residual(d_syn: &[Vec<f64>], d_obs: &PointSet) -> Result<Vec<Vec<f64>>> {
    if d_syn.len() != d_obs.len() {
        return Err(Error::Shape(format!(
            "{} synthetic traces vs {} observed",
            d_syn.len(),
            d_obs.len()
        )));
    }
    let mut residual = Vec::with_capacity(d_syn.len());
    for (s, o) in d_syn.iter().zip(&d_obs.traces) {
        if s.len() != o.len() {
            return Err(Error::Shape(format!(
                "trace lengths {} vs {}",
                s.len(),
                o.len()
            )));
        }
        residual.push(s.iter().zip(o).map(|(a, b)| a - b).collect());
    }
    Ok(residual)
}

/// Objective value and gradient of one run, plus the synthetic data.
#[derive(Debug, Clone)]
pub struct GradientResult {
    pub objective: f64,
    pub gradient: Vec<f64>,
    pub d_syn: PointSet,
}

/// Work counters of a gradient run, for reports and acceptance checks.
#[derive(Debug, Clone, Serialize)]
pub struct WorkCounters {
    pub n_checkpoints: usize,
    pub checkpoint_slot_bytes: usize,
    pub checkpoint_arena_bytes: usize,
    /// High-water mark of distinct slots written; never exceeds
    /// `n_checkpoints`.
    pub peak_live_slots: usize,
    pub forward_advances: u64,
    pub recomputed_advances: u64,
    pub restores: u64,
    pub takeshots: u64,
    pub adjoint_steps: u64,
}

impl WorkCounters {
    pub fn total_advances(&self) -> u64 {
        self.forward_advances + self.recomputed_advances
    }

    /// Total forward steps executed divided by the step count; 1.0 means no
    /// recomputation relative to the plain sweep.
    pub fn recompute_factor(&self, nt: usize) -> f64 {
        if nt == 0 {
            return f64::NAN;
        }
        self.total_advances() as f64 / nt as f64
    }
}

/// Model the observed data: a plain forward run of `model` recording at
/// `receiver_positions`.
pub fn simulate_observed(
    model: &Model,
    source: &PointSet,
    receiver_positions: &[f64],
) -> Result<PointSet> {
    let rig = Rig::new(model.clone(), source.clone(), receiver_positions)?;
    let nt = model.nt();
    let mut work = WorkState::new(model.nx(), receiver_positions.len(), nt);
    let mut injections = Vec::new();
    for _ in 0..nt.saturating_sub(1) {
        work.step_once(&rig, &mut injections)?;
    }
    PointSet::with_traces(receiver_positions.to_vec(), work.d_syn)
}

/// Reference gradient storing the complete forward history (desk scale only).
///
/// Receiver positions are taken from `d_obs`.
pub fn full_storage_gradient(
    model: &Model,
    source: &PointSet,
    d_obs: &PointSet,
) -> Result<GradientResult> {
    let rig = Rig::new(model.clone(), source.clone(), &d_obs.positions)?;
    let nx = model.nx();
    let nt = model.nt();

    // Forward sweep to state nt-1, keeping every level. levels[t] = u[t].
    let mut work = WorkState::new(nx, d_obs.len(), nt);
    let mut injections = Vec::new();
    let mut levels: Vec<Vec<f64>> = Vec::with_capacity(nt);
    levels.push(work.field.curr.clone());
    for _ in 0..nt - 1 {
        work.step_once(&rig, &mut injections)?;
        levels.push(work.field.curr.clone());
    }

    let phi = objective(
        &PointSet::with_traces(d_obs.positions.clone(), work.d_syn.clone())?,
        d_obs,
    )?;
    let residual = compute_residual(&work.d_syn, d_obs)?;

    // Reverse sweep over stored levels; the adjoint step recomputes u[t+1]
    // itself, exactly as the checkpointed path does.
    let zeros = vec![0.0; nx];
    let mut adjoint = AdjointState::new(nx);
    adjoint.init_reverse(residual, nt);
    for t in (0..nt).rev() {
        let u_prev = if t == 0 { &zeros } else { &levels[t - 1] };
        adjoint.step(&rig, u_prev, &levels[t])?;
    }

    Ok(GradientResult {
        objective: phi,
        gradient: adjoint.take_gradient(),
        d_syn: PointSet::with_traces(d_obs.positions.clone(), work.d_syn)?,
    })
}

struct GradientHarness {
    problem: WaveProblem,
    revolver: Revolver<WaveCheckpoint, ForwardOperator, ReverseOperator>,
}

fn build_harness(
    model: &Model,
    source: &PointSet,
    d_obs: &PointSet,
    n_checkpoints: Option<usize>,
    n_timesteps: Option<usize>,
) -> Result<GradientHarness> {
    let problem = WaveProblem::new(model.clone(), source.clone(), &d_obs.positions)?;
    let revolver = Revolver::new(
        problem.checkpoint(),
        problem.forward_operator(),
        problem.reverse_operator(),
        n_checkpoints,
        n_timesteps,
    )?;
    Ok(GradientHarness { problem, revolver })
}

/// Evaluate objective and residual from the completed synthetic data and arm
/// the adjoint state.
fn finish_forward(h: &GradientHarness, d_obs: &PointSet) -> Result<f64> {
    let d_syn = h.problem.d_syn();
    let phi = objective(
        &PointSet::with_traces(d_obs.positions.clone(), d_syn.clone())?,
        d_obs,
    )?;
    h.problem.init_reverse(compute_residual(&d_syn, d_obs)?);
    Ok(phi)
}

fn collect_result(
    h: &mut GradientHarness,
    d_obs: &PointSet,
    phi: f64,
    counters: WorkCounters,
) -> Result<(GradientResult, WorkCounters)> {
    let gradient = h.problem.take_gradient();
    let d_syn = PointSet::with_traces(d_obs.positions.clone(), h.problem.d_syn())?;
    Ok((
        GradientResult {
            objective: phi,
            gradient,
            d_syn,
        },
        counters,
    ))
}

/// Gradient under binomial checkpointing with `n_checkpoints` slots;
/// objective and gradient are bit-identical to [`full_storage_gradient`].
pub fn checkpointed_gradient(
    model: &Model,
    source: &PointSet,
    d_obs: &PointSet,
    n_checkpoints: usize,
) -> Result<(GradientResult, WorkCounters)> {
    let nt = model.nt();
    let mut h = build_harness(model, source, d_obs, Some(n_checkpoints), Some(nt))?;
    let fwd = h.revolver.apply_forward()?;
    let phi = finish_forward(&h, d_obs)?;
    let rev = h.revolver.apply_reverse()?;
    let counters = WorkCounters {
        n_checkpoints: h.revolver.n_checkpoints(),
        checkpoint_slot_bytes: h.revolver.storage().slot_size(),
        checkpoint_arena_bytes: h.revolver.storage().allocated_bytes(),
        peak_live_slots: h.revolver.storage().peak_live(),
        forward_advances: fwd.advance_steps,
        recomputed_advances: rev.advance_steps_recomputed,
        restores: rev.restores,
        takeshots: fwd.takeshots,
        adjoint_steps: rev.adjoint_steps,
    };
    collect_result(&mut h, d_obs, phi, counters)
}

/// Gradient in online mode (step count treated as unknown): the forward phase
/// runs one step at a time under the stride-doubling policy, then the reverse
/// sweep replays segments. Bit-identical to the full-storage gradient.
pub fn online_gradient(
    model: &Model,
    source: &PointSet,
    d_obs: &PointSet,
    n_checkpoints: usize,
) -> Result<(GradientResult, WorkCounters)> {
    let nt = model.nt();
    let mut h = build_harness(model, source, d_obs, Some(n_checkpoints), None)?;
    let mut takeshots = 0u64;
    // Online mode discovers the step count from the calls, so every step is
    // taken explicitly; the reversal then covers all nt of them.
    for _ in 0..nt {
        if h.revolver.online_step_forward()?.checkpoint_taken {
            takeshots += 1;
        }
    }
    let phi = finish_forward(&h, d_obs)?;
    let rev = h.revolver.online_finalize_and_reverse()?;
    let counters = WorkCounters {
        n_checkpoints: h.revolver.n_checkpoints(),
        checkpoint_slot_bytes: h.revolver.storage().slot_size(),
        checkpoint_arena_bytes: h.revolver.storage().allocated_bytes(),
        peak_live_slots: h.revolver.storage().peak_live(),
        forward_advances: nt as u64,
        recomputed_advances: rev.advance_steps_recomputed,
        restores: rev.restores,
        takeshots,
        adjoint_steps: rev.adjoint_steps,
    };
    collect_result(&mut h, d_obs, phi, counters)
}
