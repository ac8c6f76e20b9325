//! Shared field kernels.
//!
//! Every code path — the forward sweep, recomputation chunks, the one-level
//! recompute inside an adjoint step, and the adjoint recurrence itself — goes
//! through `leapfrog_level`, so identical inputs give identical bits
//! everywhere. The adjoint of the update is the same stencil read backward in
//! time (the damping sign flips implicitly), which is what makes the discrete
//! gradient exact.

use crate::error::{Error, Result};

use super::Model;

/// Linear interpolation stencil for one off-grid point.
#[derive(Debug, Clone, Copy)]
pub(crate) struct InterpPoint {
    pub i0: usize,
    pub i1: usize,
    pub w0: f64,
    pub w1: f64,
}

impl InterpPoint {
    /// Weights for coordinate `x` (km) on the model grid.
    pub fn new(x: f64, model: &Model) -> Result<Self> {
        if !x.is_finite() || x < 0.0 || x > model.extent() {
            return Err(Error::Config(format!(
                "position {x} km outside the grid [0, {}]",
                model.extent()
            )));
        }
        let g = x / model.h_x();
        let i0 = (g.floor() as usize).min(model.nx() - 1);
        if i0 + 1 >= model.nx() {
            return Ok(InterpPoint {
                i0,
                i1: i0,
                w0: 1.0,
                w1: 0.0,
            });
        }
        let frac = g - i0 as f64;
        Ok(InterpPoint {
            i0,
            i1: i0 + 1,
            w0: 1.0 - frac,
            w1: frac,
        })
    }

    /// Sample a field at this point.
    pub fn sample(&self, values: &[f64]) -> f64 {
        self.w0 * values[self.i0] + self.w1 * values[self.i1]
    }

    /// Spread `amount` onto the two cells (the transpose of `sample`).
    pub fn spread(&self, amount: f64, out: &mut Vec<(usize, f64)>) {
        out.push((self.i0, self.w0 * amount));
        if self.i1 != self.i0 {
            out.push((self.i1, self.w1 * amount));
        }
    }
}

/// One leapfrog level update. Solves
///
/// ```text
/// a (new - 2 cur + old) + b (new - old) - lap(cur) = sum of injections
/// ```
///
/// for `new`, with `a = m/dt²`, `b = eta/(2 dt)` per point and a central
/// second difference with zero ghost values. `(old, cur, new)` is
/// `(u[t-1], u[t], u[t+1])` on the forward sweep and `(v[k+2], v[k+1], v[k])`
/// on the adjoint sweep; the transposed recurrence is identical.
pub(crate) fn leapfrog_level(
    model: &Model,
    old: &[f64],
    cur: &[f64],
    new: &mut [f64],
    injections: &[(usize, f64)],
) {
    let nx = model.nx();
    debug_assert!(old.len() == nx && cur.len() == nx && new.len() == nx);
    let m = model.m();
    let eta = model.eta();
    let inv_dt2 = 1.0 / (model.dt() * model.dt());
    let inv_2dt = 1.0 / (2.0 * model.dt());
    let inv_h2 = 1.0 / (model.h_x() * model.h_x());

    for i in 0..nx {
        let a = m[i] * inv_dt2;
        let b = eta[i] * inv_2dt;
        let left = if i > 0 { cur[i - 1] } else { 0.0 };
        let right = if i + 1 < nx { cur[i + 1] } else { 0.0 };
        // (left + right) first keeps the stencil exactly mirror-symmetric
        let lap = (left + right - 2.0 * cur[i]) * inv_h2;
        new[i] = 2.0 * a * cur[i] + lap - (a - b) * old[i];
    }
    for &(cell, amount) in injections {
        new[cell] += amount;
    }
    for i in 0..nx {
        let a = m[i] * inv_dt2;
        let b = eta[i] * inv_2dt;
        new[i] /= a + b;
    }
}

/// Accumulate `grad -= u_tt * v` for one time level, with
/// `u_tt = (u_next - 2 u_curr + u_prev) / dt²`.
pub(crate) fn accumulate_gradient(
    grad: &mut [f64],
    u_prev: &[f64],
    u_curr: &[f64],
    u_next: &[f64],
    v: &[f64],
    inv_dt2: f64,
) {
    for i in 0..grad.len() {
        let u_tt = (u_next[i] - 2.0 * u_curr[i] + u_prev[i]) * inv_dt2;
        grad[i] -= u_tt * v[i];
    }
}

/// Blowup guard naming the offending step.
pub(crate) fn check_finite(values: &[f64], step: usize, which: &str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numerical(format!(
            "non-finite {which} field values after step {step}"
        )))
    }
}
