//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by the scheduling kernel, storage arena, driver and demo.
#[derive(Debug, Error)]
pub enum Error {
    /// Rejected input at construction time (zero sizes, missing arguments,
    /// unstable demo configuration). Distinct from a runtime `Action::Error`,
    /// which signals protocol misuse of an already-constructed controller.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Exact integer arithmetic would overflow; we refuse rather than saturate.
    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    /// The exact DP oracle is guarded against accidental blowup of its memo table.
    #[error("instance too large for the DP oracle: steps={steps}, snaps={snaps} (limits: steps <= {max_steps}, snaps <= {max_snaps})")]
    DpTooLarge {
        steps: usize,
        snaps: usize,
        max_steps: usize,
        max_snaps: usize,
    },

    /// Slot index outside the storage arena.
    #[error("slot index {index} out of range (n_slots = {n_slots})")]
    SlotOutOfRange { index: usize, n_slots: usize },

    /// Driver called out of order, or an operator observed state it cannot serve.
    #[error("protocol violation: {0}")]
    Protocol(String),

    /// An operator failed while executing a scheduled action.
    #[error("operator failed during {action} over [{t_start}, {t_end}): {source}")]
    Operator {
        action: &'static str,
        t_start: usize,
        t_end: usize,
        #[source]
        source: Box<Error>,
    },

    /// Numerical blowup (NaN/Inf) detected in the demo kernels.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Mismatched trace/grid shapes.
    #[error("shape mismatch: {0}")]
    Shape(String),
}

pub type Result<T> = std::result::Result<T, Error>;
