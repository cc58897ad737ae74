//! Decoherence-rate extraction from entropy time series.

use serde::Serialize;

use crate::error::DeclabError;
use crate::tol;
use crate::Result;

/// Least-squares slope through the origin with a linearity check.
#[derive(Debug, Clone, Serialize)]
pub struct RateEstimate {
    pub gamma: f64,
    /// Fit window actually used (two-pass: [0, 0.1 / gamma_bootstrap] when
    /// that is shorter than the data).
    pub window: (f64, f64),
    /// Max residual relative to the series scale.
    pub nonlinearity: f64,
    pub nonlinear: bool,
    /// Per-quarter slopes, filled only when the fit is flagged nonlinear.
    pub windowed_slopes: Option<Vec<f64>>,
}

fn slope_through_origin(times: &[f64], values: &[f64]) -> f64 {
    let num: f64 = times.iter().zip(values).map(|(&t, &v)| t * v).sum();
    let den: f64 = times.iter().map(|&t| t * t).sum();
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Extract the decoherence rate gamma from an S1 (or S_lin) series
/// (`rate_extract`). Eigenstate series are exactly linear; otherwise the
/// two-pass window keeps the fit in the early-time regime, and residuals
/// beyond 1% flag the estimate and attach per-window slopes.
pub fn rate_extract(times: &[f64], values: &[f64]) -> Result<RateEstimate> {
    if times.len() != values.len() || times.len() < 2 {
        return Err(DeclabError::InvalidParameter {
            reason: "rate extraction needs at least 2 matching samples".into(),
        });
    }
    let bootstrap = slope_through_origin(times, values);
    let t_max = times.last().copied().unwrap_or(0.0);
    let window_end = if bootstrap.abs() > 0.0 {
        (0.1 / bootstrap.abs()).min(t_max)
    } else {
        t_max
    };
    let in_window: (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(values)
        .filter(|(&t, _)| t <= window_end)
        .map(|(&t, &v)| (t, v))
        .unzip();
    let (wt, wv) = if in_window.0.len() >= 3 {
        in_window
    } else {
        (times.to_vec(), values.to_vec())
    };
    let gamma = slope_through_origin(&wt, &wv);
    let scale = wv.iter().fold(0.0f64, |m, &v| m.max(v.abs())).max(1e-300);
    let nonlinearity = wt
        .iter()
        .zip(&wv)
        .map(|(&t, &v)| (v - gamma * t).abs() / scale)
        .fold(0.0, f64::max);
    let nonlinear = nonlinearity > tol::RATE_LINEARITY;
    let windowed_slopes = nonlinear.then(|| {
        let quarters = 4usize;
        let n = wt.len();
        (0..quarters)
            .map(|q| {
                let lo = q * n / quarters;
                let hi = ((q + 1) * n / quarters).max(lo + 1).min(n);
                slope_through_origin(&wt[lo..hi], &wv[lo..hi])
            })
            .collect()
    });
    Ok(RateEstimate {
        gamma,
        window: (0.0, *wt.last().unwrap_or(&0.0)),
        nonlinearity,
        nonlinear,
        windowed_slopes,
    })
}

/// Lower bound on the rate difference from a paired AFV/PPV extraction.
pub fn rate_difference(afv: &RateEstimate, ppv: &RateEstimate) -> f64 {
    afv.gamma - ppv.gamma
}
