//! Front lead and wave-speed prediction.
//!
//! The front lead `K` solves `K ln(sK) = 2 ln N` on the branch `sK > 1`.
//! Substituting `u = ln(sK)` turns this into `u e^u = 2 s ln N`, so
//! `K = 2 ln N / W(2 s ln N)` exactly. The predictor solves the equation by
//! bracketed bisection; the Lambert-W form is reported beside it as an
//! independent route, together with the two-term asymptotic
//! `W(z) ~ ln z - ln ln z`.

use serde::{Deserialize, Serialize};

use super::TheoryError;
use crate::population::Params;

/// Principal branch of the Lambert W function on `[0, inf)`.
///
/// Bisection on `[0, ln(1 + z)]` (which always brackets the root) followed by
/// Halley steps kept inside the bracket.
pub fn lambert_w(z: f64) -> Result<f64, TheoryError> {
    if !(z >= 0.0) || z.is_infinite() {
        return Err(TheoryError::Domain(format!(
            "lambert_w needs finite z >= 0, got {z}"
        )));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    let f = |w: f64| w * w.exp() - z;
    let (mut lo, mut hi) = (0.0f64, z.ln_1p());
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut w = 0.5 * (lo + hi);
    for _ in 0..20 {
        let ew = w.exp();
        let fw = w * ew - z;
        if fw == 0.0 {
            break;
        }
        let d1 = ew * (w + 1.0);
        let d2 = ew * (w + 2.0);
        let step = fw / (d1 - fw * d2 / (2.0 * d1));
        let next = (w - step).clamp(lo, hi);
        if next == w {
            break;
        }
        w = next;
    }
    Ok(w)
}

/// Residual tolerance on `K ln(sK) - 2 ln N`.
pub const FRONT_RESIDUAL_TOL: f64 = 1e-9;

pub fn front_residual(k: f64, log_n: f64, s: f64) -> f64 {
    k * (s * k).ln() - 2.0 * log_n
}

fn check_front_inputs(log_n: f64, s: f64) -> Result<(), TheoryError> {
    if !(log_n >= 3f64.ln() && log_n.is_finite()) {
        return Err(TheoryError::Domain(format!(
            "front prediction needs N >= 3, got ln N = {log_n}"
        )));
    }
    if !(s > 0.0 && s.is_finite()) {
        return Err(TheoryError::Domain(format!(
            "front prediction needs s > 0, got {s}"
        )));
    }
    Ok(())
}

/// Solves `K ln(sK) = 2 ln N` for `K > 1/s`, given `ln N`. Taking the
/// logarithm lets the predictor run at non-integer population sizes.
pub fn solve_front_k(log_n: f64, s: f64) -> Result<f64, TheoryError> {
    check_front_inputs(log_n, s)?;
    let f = |k: f64| front_residual(k, log_n, s);
    let mut lo = 1.0 / s;
    let mut hi = 2.0 / s;
    while f(hi) <= 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let k = if f(lo).abs() <= f(hi).abs() { lo } else { hi };
    let r = f(k);
    if r.abs() > FRONT_RESIDUAL_TOL {
        return Err(TheoryError::NoConvergence(format!(
            "front residual {r} at K = {k}"
        )));
    }
    Ok(k)
}

pub fn predict_front_k(pop_size: u64, s: f64) -> Result<f64, TheoryError> {
    solve_front_k((pop_size as f64).ln(), s)
}

/// `K = 2 ln N / W(2 s ln N)`.
pub fn front_k_lambert(log_n: f64, s: f64) -> Result<f64, TheoryError> {
    check_front_inputs(log_n, s)?;
    Ok(2.0 * log_n / lambert_w(2.0 * log_n * s)?)
}

/// `K` with `W(z)` replaced by `ln z - ln ln z`; meaningful once
/// `2 s ln N > e`.
pub fn front_k_asymptotic(log_n: f64, s: f64) -> Option<f64> {
    let z = 2.0 * log_n * s;
    if z <= std::f64::consts::E {
        return None;
    }
    Some(2.0 * log_n / (z.ln() - z.ln().ln()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WavePrediction {
    /// Lead of the front over the mean, in fitness classes.
    pub k_front: f64,
    /// Standard deviation of the Gaussian bulk, `K / sqrt(2 ln N)`.
    pub width: f64,
    /// `mu (2q - 1) + s K^2 / (2 ln N)`.
    pub speed: f64,
    /// `(sK - mu) / ln(sK - mu)`, absent when `sK - mu <= 1`.
    pub front_speed: Option<f64>,
    /// `K ln(sK) - 2 ln N` at the returned `K`.
    pub residual: f64,
    pub k_lambert: f64,
    pub k_asymptotic: Option<f64>,
}

/// Wave prediction for a possibly non-integer population size `pop_size`.
pub fn predict_wave(pop_size: f64, mu: f64, q: f64, s: f64) -> Result<WavePrediction, TheoryError> {
    if !(mu >= 0.0 && mu.is_finite()) || !(0.0..=1.0).contains(&q) {
        return Err(TheoryError::Domain(format!(
            "need mu >= 0 and q in [0, 1], got mu={mu}, q={q}"
        )));
    }
    let log_n = pop_size.ln();
    let k = solve_front_k(log_n, s)?;
    let two_log_n = 2.0 * log_n;
    let growth = s * k - mu;
    Ok(WavePrediction {
        k_front: k,
        width: k / two_log_n.sqrt(),
        speed: mu * (2.0 * q - 1.0) + s * k * k / two_log_n,
        front_speed: (growth > 1.0).then(|| growth / growth.ln()),
        residual: front_residual(k, log_n, s),
        k_lambert: front_k_lambert(log_n, s)?,
        k_asymptotic: front_k_asymptotic(log_n, s),
    })
}

pub fn predict_wave_speed(params: &Params) -> Result<WavePrediction, TheoryError> {
    params
        .validate()
        .map_err(|e| TheoryError::Domain(e.to_string()))?;
    predict_wave(params.pop_size as f64, params.mu, params.q, params.s)
}
