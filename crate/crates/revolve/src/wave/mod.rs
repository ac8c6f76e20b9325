//! 1D acoustic wave-equation forward/adjoint pair.
//!
//! The reference application for the checkpointing driver: an explicit
//! second-order leapfrog solve of `m u_tt - u_xx + eta u_t = P_s^T q` on a
//! regular grid, receiver sampling, the least-squares data misfit, its exact
//! discrete adjoint, and the gradient `grad -= u_tt * v` accumulated during
//! the backward sweep. All field arithmetic is f64; the checkpointed and
//! full-storage gradients agree bitwise because every path runs the same
//! kernels in the same order.

mod gradient;
mod kernels;
mod operators;
pub mod report;
pub mod setup;
mod taylor;

pub use gradient::{
    checkpointed_gradient, full_storage_gradient, objective, online_gradient, simulate_observed,
    GradientResult, WorkCounters,
};
pub use operators::{
    AdjointState, ForwardOperator, ReverseOperator, WaveCheckpoint, WaveProblem, WorkState,
};
pub use taylor::{taylor_test, TaylorReport};

use crate::error::{Error, Result};

/// Stability guard: constructors reject `dt > CFL_FACTOR * h_x * sqrt(min m)`.
pub const CFL_FACTOR: f64 = 0.9;

/// Physical model: squared slowness `m` (s²/km²), damping profile `eta`
/// (absorbing boundary taper), spacing and step sizes.
#[derive(Debug, Clone)]
pub struct Model {
    m: Vec<f64>,
    eta: Vec<f64>,
    h_x: f64,
    dt: f64,
    nt: usize,
}

impl Model {
    pub fn new(m: Vec<f64>, eta: Vec<f64>, h_x: f64, dt: f64, nt: usize) -> Result<Self> {
        if m.len() < 3 {
            return Err(Error::Config("model needs at least 3 grid points".into()));
        }
        if eta.len() != m.len() {
            return Err(Error::Shape(format!(
                "eta has {} points but m has {}",
                eta.len(),
                m.len()
            )));
        }
        if nt == 0 {
            return Err(Error::Config("nt must be >= 1".into()));
        }
        if !h_x.is_finite() || h_x <= 0.0 || !dt.is_finite() || dt <= 0.0 {
            return Err(Error::Config(
                "h_x and dt must be positive and finite".into(),
            ));
        }
        let mut m_min = f64::INFINITY;
        for &v in &m {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Config(
                    "squared slowness must be positive and finite".into(),
                ));
            }
            m_min = m_min.min(v);
        }
        if eta.iter().any(|&e| !e.is_finite() || e < 0.0) {
            return Err(Error::Config(
                "damping must be nonnegative and finite".into(),
            ));
        }
        let bound = CFL_FACTOR * h_x * m_min.sqrt();
        if dt > bound {
            return Err(Error::Config(format!(
                "unstable configuration: dt = {dt} exceeds CFL bound {bound:.6}"
            )));
        }
        Ok(Model {
            m,
            eta,
            h_x,
            dt,
            nt,
        })
    }

    /// Same grid, damping and step sizes with a different squared-slowness
    /// field (re-checks stability).
    pub fn with_m(&self, m: Vec<f64>) -> Result<Self> {
        Model::new(m, self.eta.clone(), self.h_x, self.dt, self.nt)
    }

    pub fn m(&self) -> &[f64] {
        &self.m
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    pub fn nx(&self) -> usize {
        self.m.len()
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn h_x(&self) -> f64 {
        self.h_x
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Rightmost grid coordinate, `(nx - 1) * h_x`.
    pub fn extent(&self) -> f64 {
        (self.nx() - 1) as f64 * self.h_x
    }
}

/// Two consecutive time levels of a field plus the step index they sit at:
/// the minimal restart state for a second-order-in-time scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavefield {
    /// Level `t - 1` (zeros at `t = 0`).
    pub prev: Vec<f64>,
    /// Level `t`.
    pub curr: Vec<f64>,
    pub t: usize,
}

impl Wavefield {
    pub fn new(nx: usize) -> Self {
        Wavefield {
            prev: vec![0.0; nx],
            curr: vec![0.0; nx],
            t: 0,
        }
    }
}

/// Source or receiver set: grid coordinates (km) plus one time series per
/// point. Used for the source wavelet `q`, synthetic data and observed data.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    pub positions: Vec<f64>,
    pub traces: Vec<Vec<f64>>,
}

impl PointSet {
    /// Points with zeroed traces of length `nt`.
    pub fn new(positions: Vec<f64>, nt: usize) -> Self {
        let traces = positions.iter().map(|_| vec![0.0; nt]).collect();
        PointSet { positions, traces }
    }

    pub fn with_traces(positions: Vec<f64>, traces: Vec<Vec<f64>>) -> Result<Self> {
        if positions.len() != traces.len() {
            return Err(Error::Shape(format!(
                "{} positions but {} traces",
                positions.len(),
                traces.len()
            )));
        }
        Ok(PointSet { positions, traces })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Per-grid-point running sum for `grad -= u_tt * v`; zero-initialized
/// before a reverse sweep.
#[derive(Debug, Clone)]
pub struct GradientAccumulator {
    pub grad: Vec<f64>,
}

impl GradientAccumulator {
    pub fn new(nx: usize) -> Self {
        GradientAccumulator {
            grad: vec![0.0; nx],
        }
    }

    pub fn reset(&mut self) {
        self.grad.iter_mut().for_each(|g| *g = 0.0);
    }
}

/// Advance a standalone wavefield one step, injecting `(cell, amount)` terms
/// into the update. Low-level entry point for tests and small experiments;
/// the driver path goes through [`WorkState`].
pub fn forward_step(
    model: &Model,
    field: &mut Wavefield,
    injections: &[(usize, f64)],
) -> Result<()> {
    let mut next = vec![0.0; model.nx()];
    kernels::leapfrog_level(model, &field.prev, &field.curr, &mut next, injections);
    kernels::check_finite(&next, field.t, "forward")?;
    field.prev = std::mem::replace(&mut field.curr, next);
    field.t += 1;
    Ok(())
}
