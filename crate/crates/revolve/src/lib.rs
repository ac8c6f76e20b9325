//! Optimal binomial checkpointing for adjoint (reverse) computations.
//!
//! Reversing a time-stepping computation needs its forward states in
//! descending order, but storing the full history is often impossible.
//! Binomial checkpointing (Griewank & Walther's revolve algorithm) stores
//! only `snaps` states at a time and recomputes the rest, with provably
//! minimal recomputation. This crate provides:
//!
//! - [`schedule`]: the scheduler state machine ([`Controller`]), cost kernel
//!   ([`beta`], [`min_advances`], [`adjust`], the [`optimal_dp`] oracle), and
//!   a schedule validator;
//! - [`storage`]: a fixed arena of equal-size checkpoint slots;
//! - [`revolver`]: a driver binding application-supplied [`Checkpoint`] and
//!   [`Operator`] implementations to a schedule, with offline (known step
//!   count) and online (unknown step count) modes;
//! - [`wave`]: a 1D acoustic wave-equation forward/adjoint pair used as the
//!   reference application, including the Taylor gradient test.

pub mod error;
pub mod revolver;
pub mod schedule;
pub mod storage;
pub mod wave;

pub use error::{Error, Result};
pub use revolver::{
    Checkpoint, ForwardReport, OnlineStepReport, Operator, ReverseReport, Revolver,
};
pub use schedule::{
    adjust, adjust_objective, beta, generate_schedule, min_advances, optimal_dp, validate_schedule,
    Action, ActionKind, Controller, ScheduleReport, ValidationReport,
};
pub use storage::{estimate_full_storage, Storage};
