//! Taylor-remainder gradient verification.
//!
//! With `dm = m0 - m_true` and `g = grad Phi(m0)`, the zeroth-order remainder
//! `eps0(h) = Phi(m0 + h dm) - Phi(m0)` must shrink as O(h) and the
//! first-order remainder `eps1(h) = eps0(h) - h <g, dm>` as O(h²). The fitted
//! log-log slopes are the demo's published correctness evidence.

use serde::Serialize;

use crate::error::{Error, Result};

use super::gradient::{full_storage_gradient, objective, simulate_observed};
use super::{Model, PointSet};

/// Convergence table of one Taylor test.
#[derive(Debug, Clone, Serialize)]
pub struct TaylorReport {
    pub h_values: Vec<f64>,
    pub eps0: Vec<f64>,
    pub eps1: Vec<f64>,
    /// Least-squares slope of `log |eps0|` vs `log h`; `None` when some
    /// remainder is exactly zero (e.g. `dm = 0`).
    pub order0: Option<f64>,
    pub order1: Option<f64>,
}

/// Least-squares slope of log10|e| against log10 h.
fn fitted_order(h: &[f64], e: &[f64]) -> Option<f64> {
    if h.len() < 2 || e.contains(&0.0) {
        return None;
    }
    let xs: Vec<f64> = h.iter().map(|v| v.log10()).collect();
    let ys: Vec<f64> = e.iter().map(|v| v.abs().log10()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    (sxx != 0.0).then(|| sxy / sxx)
}

/// Run the Taylor test of the gradient at `m0` against data modeled on
/// `m_true`, for the given descending perturbation sizes.
///
/// The gradient comes from the full-storage reference; the checkpointed
/// gradient is bit-identical, so the table does not depend on the path.
pub fn taylor_test(
    model_m0: &Model,
    model_true: &Model,
    source: &PointSet,
    receiver_positions: &[f64],
    h_values: &[f64],
) -> Result<TaylorReport> {
    if model_m0.nx() != model_true.nx() || model_m0.nt() != model_true.nt() {
        return Err(Error::Shape(
            "m0 and true models must share grid and step count".into(),
        ));
    }
    if h_values.is_empty() {
        return Err(Error::Config("need at least one perturbation size".into()));
    }
    if h_values.windows(2).any(|w| w[0] <= w[1])
        || h_values.iter().any(|&h| !h.is_finite() || h <= 0.0)
    {
        return Err(Error::Config(
            "h_values must be positive and strictly descending".into(),
        ));
    }

    let d_obs = simulate_observed(model_true, source, receiver_positions)?;
    let base = full_storage_gradient(model_m0, source, &d_obs)?;
    if !base.objective.is_finite() {
        return Err(Error::Numerical("objective at m0 is not finite".into()));
    }

    let dm: Vec<f64> = model_m0
        .m()
        .iter()
        .zip(model_true.m())
        .map(|(a, b)| a - b)
        .collect();
    let g_dot_dm: f64 = base.gradient.iter().zip(&dm).map(|(g, d)| g * d).sum();

    let mut eps0 = Vec::with_capacity(h_values.len());
    let mut eps1 = Vec::with_capacity(h_values.len());
    for &h in h_values {
        let m_h: Vec<f64> = model_m0
            .m()
            .iter()
            .zip(&dm)
            .map(|(m, d)| m + h * d)
            .collect();
        let model_h = model_m0.with_m(m_h)?;
        let d_h = simulate_observed(&model_h, source, receiver_positions)?;
        let phi_h = objective(&d_h, &d_obs)?;
        if !phi_h.is_finite() {
            return Err(Error::Numerical(format!(
                "objective at h = {h} is not finite"
            )));
        }
        let e0 = phi_h - base.objective;
        eps0.push(e0);
        eps1.push(e0 - h * g_dot_dm);
    }

    Ok(TaylorReport {
        h_values: h_values.to_vec(),
        order0: fitted_order(h_values, &eps0),
        order1: fitted_order(h_values, &eps1),
        eps0,
        eps1,
    })
}
