//! Demo runner and its JSON report.

use serde::Serialize;

use crate::error::Result;
use crate::storage::estimate_full_storage;

use super::gradient::{
    checkpointed_gradient, full_storage_gradient, online_gradient, WorkCounters,
};
use super::operators::WaveCheckpoint;
use super::setup::two_layer_case;
use super::taylor::{taylor_test, TaylorReport};

/// Storage strategy the demo runs under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DemoMode {
    Checkpointed,
    FullStorage,
    Online,
}

impl DemoMode {
    fn as_str(self) -> &'static str {
        match self {
            DemoMode::Checkpointed => "checkpointed",
            DemoMode::FullStorage => "full-storage",
            DemoMode::Online => "online",
        }
    }
}

/// Demo invocation parameters.
#[derive(Debug, Clone, Copy)]
pub struct DemoConfig {
    pub nx: usize,
    pub nt: usize,
    pub snaps: usize,
    pub mode: DemoMode,
}

/// Memory accounting of one run.
#[derive(Debug, Clone, Serialize)]
pub struct MemoryReport {
    /// Bytes actually allocated for checkpoint slots.
    pub checkpoint_bytes: u64,
    pub checkpoint_slot_bytes: u64,
    /// Bytes a full forward history would need (two levels per state).
    pub full_history_bytes: u64,
    pub savings_factor: f64,
}

/// The demo's JSON report: objective, gradient checksum, Taylor table, work
/// counters and peak checkpoint bytes.
#[derive(Debug, Clone, Serialize)]
pub struct DemoReport {
    pub mode: String,
    pub nx: usize,
    pub nt: usize,
    pub objective: f64,
    pub gradient_checksum: String,
    pub gradient_norm: f64,
    pub taylor: TaylorReport,
    pub work: WorkCounters,
    pub total_advances: u64,
    pub recompute_factor: f64,
    pub memory: MemoryReport,
    /// Live adjoint field levels in the merged adjoint+gradient pass.
    pub adjoint_live_levels: usize,
}

/// FNV-1a over the little-endian bytes of the gradient. Stable across runs
/// and platforms, so two reports can be compared for bitwise equality.
pub fn gradient_checksum(gradient: &[f64]) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for v in gradient {
        for b in v.to_le_bytes() {
            hash ^= b as u64;
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    format!("fnv1a:{hash:016x}")
}

/// Build the default two-layer case at the requested size, compute the
/// gradient under the chosen storage strategy, and run the Taylor test.
pub fn run_demo(config: DemoConfig) -> Result<DemoReport> {
    let case = two_layer_case(config.nx, config.nt)?;
    let d_obs = super::simulate_observed(&case.model_true, &case.source, &case.receiver_positions)?;

    let (result, work) = match config.mode {
        DemoMode::Checkpointed => {
            checkpointed_gradient(&case.model, &case.source, &d_obs, config.snaps)?
        }
        DemoMode::Online => online_gradient(&case.model, &case.source, &d_obs, config.snaps)?,
        DemoMode::FullStorage => {
            let r = full_storage_gradient(&case.model, &case.source, &d_obs)?;
            let nt = config.nt;
            let counters = WorkCounters {
                n_checkpoints: 0,
                checkpoint_slot_bytes: 0,
                checkpoint_arena_bytes: 0,
                peak_live_slots: 0,
                forward_advances: (nt - 1) as u64,
                recomputed_advances: 0,
                restores: 0,
                takeshots: 0,
                adjoint_steps: nt as u64,
            };
            (r, counters)
        }
    };

    let taylor = taylor_test(
        &case.model,
        &case.model_true,
        &case.source,
        &case.receiver_positions,
        &[1e-1, 1e-2, 1e-3, 1e-4],
    )?;

    let full_history_bytes = estimate_full_storage(2 * config.nx as u64, config.nt as u64, 8)?;
    let checkpoint_bytes = work.checkpoint_arena_bytes as u64;
    let memory = MemoryReport {
        checkpoint_bytes,
        checkpoint_slot_bytes: if config.mode == DemoMode::FullStorage {
            0
        } else {
            WaveCheckpoint::byte_size(config.nx) as u64
        },
        full_history_bytes,
        savings_factor: if checkpoint_bytes == 0 {
            1.0
        } else {
            full_history_bytes as f64 / checkpoint_bytes as f64
        },
    };

    let gradient_norm = result.gradient.iter().map(|g| g * g).sum::<f64>().sqrt();
    Ok(DemoReport {
        mode: config.mode.as_str().to_string(),
        nx: config.nx,
        nt: config.nt,
        objective: result.objective,
        gradient_checksum: gradient_checksum(&result.gradient),
        gradient_norm,
        taylor,
        total_advances: work.total_advances(),
        recompute_factor: work.recompute_factor(config.nt),
        work,
        memory,
        adjoint_live_levels: 2,
    })
}
