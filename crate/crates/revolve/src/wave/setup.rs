//! Demo problem construction: two-layer squared-slowness models, Ricker
//! source wavelet, absorbing taper, and the default desk-scale configuration.

use crate::error::{Error, Result};

use super::{Model, PointSet};

/// Default demo configuration (stability-checked): 201 points over 2 km,
/// interface at index 101, velocities 1.5 / 2.5 km/s, 10 Hz Ricker, 500
/// steps.
pub const DEFAULT_NX: usize = 201;
pub const DEFAULT_NT: usize = 500;
pub const DOMAIN_KM: f64 = 2.0;
pub const V_TOP: f64 = 1.5;
pub const V_BOTTOM: f64 = 2.5;
pub const F0_HZ: f64 = 10.0;
/// Width of the absorbing taper at each boundary, in grid points.
pub const TAPER_POINTS: usize = 20;
/// Peak damping rate at the outermost point.
pub const ETA_MAX: f64 = 40.0;
/// Demo time step safety factor under the hard CFL bound.
pub const CFL_SAFETY: f64 = 0.5;
/// Source position (km).
pub const SOURCE_X: f64 = 0.5;
/// Moving-average window used to smooth the true model into m0.
pub const SMOOTHING_WINDOW: usize = 5;

/// True and smoothed squared-slowness fields of a two-layer medium.
///
/// `m_true` is piecewise constant (`1/v_top²` above `interface_index`,
/// `1/v_bottom²` from it on); `m0` is its moving-average smoothing. The
/// smoothing is written in deviation form so a uniform model smooths to
/// itself exactly.
pub fn build_two_layer_model(
    nx: usize,
    interface_index: usize,
    v_top: f64,
    v_bottom: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if nx < 3 {
        return Err(Error::Config("nx must be >= 3".into()));
    }
    if interface_index == 0 || interface_index >= nx {
        return Err(Error::Config(format!(
            "interface index {interface_index} must lie strictly inside (0, {nx})"
        )));
    }
    if !v_top.is_finite() || v_top <= 0.0 || !v_bottom.is_finite() || v_bottom <= 0.0 {
        return Err(Error::Config(
            "velocities must be positive and finite".into(),
        ));
    }
    let m_top = 1.0 / (v_top * v_top);
    let m_bottom = 1.0 / (v_bottom * v_bottom);
    let m_true: Vec<f64> = (0..nx)
        .map(|i| if i < interface_index { m_top } else { m_bottom })
        .collect();

    let half = SMOOTHING_WINDOW / 2;
    let m0: Vec<f64> = (0..nx)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(nx - 1);
            // mean as center + mean deviation: exact on constant windows
            let center = m_true[i];
            let dev: f64 = m_true[lo..=hi].iter().map(|&v| v - center).sum();
            center + dev / (hi - lo + 1) as f64
        })
        .collect();
    Ok((m_true, m0))
}

/// Ricker wavelet trace: `(1 - 2 s) exp(-s)` with `s = (pi f0 (t - t0))²`,
/// peaking at the delay `t0 = 1/f0`.
pub fn ricker_source(f0: f64, nt: usize, dt: f64) -> Result<Vec<f64>> {
    if !f0.is_finite() || f0 <= 0.0 || !dt.is_finite() || dt <= 0.0 || nt == 0 {
        return Err(Error::Config(
            "ricker_source requires positive f0, dt and nt".into(),
        ));
    }
    if f0 >= 0.5 / dt {
        return Err(Error::Config(format!(
            "f0 = {f0} Hz is at or above the Nyquist frequency {}",
            0.5 / dt
        )));
    }
    let t0 = 1.0 / f0;
    Ok((0..nt)
        .map(|i| {
            let arg = std::f64::consts::PI * f0 * (i as f64 * dt - t0);
            let s = arg * arg;
            (1.0 - 2.0 * s) * (-s).exp()
        })
        .collect())
}

/// Linear taper rising from zero at the interior edge of the layer to
/// `ETA_MAX` at the boundary points.
pub fn absorbing_taper(nx: usize, width: usize, eta_max: f64) -> Vec<f64> {
    let mut eta = vec![0.0; nx];
    let width = width.min(nx / 2);
    for i in 0..width {
        let ramp = eta_max * (width - i) as f64 / width as f64;
        eta[i] = ramp;
        eta[nx - 1 - i] = ramp;
    }
    eta
}

/// A ready-to-run two-layer case: smoothed model, true model, source and
/// receiver spread.
#[derive(Debug, Clone)]
pub struct TwoLayerCase {
    /// Smoothed starting model m0.
    pub model: Model,
    /// True two-layer model the observed data is modeled on.
    pub model_true: Model,
    pub source: PointSet,
    pub receiver_positions: Vec<f64>,
}

/// Assemble the default demo case on an `nx`-point grid for `nt` steps.
/// The spacing keeps the 2 km domain; the time step is set to
/// `CFL_SAFETY * h * sqrt(min m)` so any grid size stays stable.
pub fn two_layer_case(nx: usize, nt: usize) -> Result<TwoLayerCase> {
    if nx < 2 * TAPER_POINTS + 10 {
        return Err(Error::Config(format!(
            "nx = {nx} is too small for two {TAPER_POINTS}-point absorbing layers"
        )));
    }
    let interface = nx.div_ceil(2);
    let (m_true, m0) = build_two_layer_model(nx, interface, V_TOP, V_BOTTOM)?;
    let h = DOMAIN_KM / (nx - 1) as f64;
    let m_min = m_true.iter().cloned().fold(f64::INFINITY, f64::min);
    let dt = CFL_SAFETY * h * m_min.sqrt();
    let eta = absorbing_taper(nx, TAPER_POINTS, ETA_MAX);

    let model = Model::new(m0, eta.clone(), h, dt, nt)?;
    let model_true = Model::new(m_true, eta, h, dt, nt)?;

    let source = PointSet::with_traces(vec![SOURCE_X], vec![ricker_source(F0_HZ, nt, dt)?])?;
    let n_rec = 16;
    let lo = 0.25;
    let hi = DOMAIN_KM - 0.25;
    let receiver_positions: Vec<f64> = (0..n_rec)
        .map(|i| lo + (hi - lo) * i as f64 / (n_rec - 1) as f64)
        .collect();
    Ok(TwoLayerCase {
        model,
        model_true,
        source,
        receiver_positions,
    })
}
