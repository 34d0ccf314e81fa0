use crate::error::{Error, Result};

use super::TransitionRecord;

/// Above this `Q·τ` the small-angle estimate is no longer trustworthy.
pub const WEAK_REGIME_LIMIT: f64 = 0.5;

/// Single-resonance Rabi prediction of the flip probability at `omega`:
///
/// `sin²(Ωτ/2) · Q²/(Q² + Δ²) · overlap`, with `Q = 2cM`, `Δ = ΔE - ω`
/// and `Ω = √(Q² + Δ²)`.
///
/// Valid when one transition dominates near `omega`.
pub fn rabi_predict(rec: &TransitionRecord, c: f64, tau: f64, omega: f64) -> f64 {
    let q = 2.0 * c * rec.matrix_element;
    let detuning = rec.delta_e - omega;
    let rabi = q.hypot(detuning);
    if rabi == 0.0 {
        return 0.0;
    }
    let s = (0.5 * rabi * tau).sin();
    s * s * (q / rabi).powi(2) * rec.overlap
}

/// Small-coupling peak height `c²τ²M²·overlap`, the leading term of the
/// on-resonance Rabi prediction when `Qτ ≪ 1`.
pub fn weak_coupling_estimate(rec: &TransitionRecord, c: f64, tau: f64) -> f64 {
    let q_tau = 2.0 * c * rec.matrix_element * tau;
    if q_tau > WEAK_REGIME_LIMIT {
        log::warn!(
            "weak-coupling estimate used at Q*tau = {q_tau:.3} for transition {}",
            rec.label()
        );
    }
    (c * tau * rec.matrix_element).powi(2) * rec.overlap
}

/// Smallest shot count `N` with `(1 - p)^N ≤ 1 - confidence`, i.e. at least
/// one flip is seen with the given confidence.
pub fn required_shots(p: f64, confidence: f64) -> Result<u64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Parameter(format!(
            "flip probability {p} must lie in (0, 1]"
        )));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::Parameter(format!(
            "confidence {confidence} must lie in (0, 1)"
        )));
    }
    if p == 1.0 {
        return Ok(1);
    }
    let n = ((1.0 - confidence).ln() / (-p).ln_1p()).ceil();
    Ok(n.max(1.0) as u64)
}
