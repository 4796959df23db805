//! Internal wrapping instants of the wrapped-chirp waveform and their jumps.
//!
//! Subcarrier `m` wraps when `K t + m/T` crosses `r B`, i.e. at
//! `t = (N r - m) / (2 alpha B)` for every integer `r` with
//! `m/N < r < 2 alpha + m/N`. All events are enumerated through the integer
//! numerator `k = N r - m`, so no root finding or float time comparison is
//! needed.

use crate::params::WaveformParams;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WrapEvent {
    pub m: usize,
    pub r: u64,
    pub t: f64,
    /// `|g(t+) - g(t-)|^2`, in `[0, 4]`.
    pub jump_sq: f64,
}

/// Upper bound `2 alpha N` on the numerator, snapped to an integer when it is
/// within a relative `1e-12` of one so the open bound excludes `t = T`.
fn numerator_bound(params: &WaveformParams) -> f64 {
    let bound = 2.0 * params.alpha() * params.n() as f64;
    let nearest = bound.round();
    if (bound - nearest).abs() <= 1e-12 * bound.max(1.0) {
        nearest
    } else {
        bound
    }
}

/// Numerators `k = N r - m` of the internal wrap instants of subcarrier `m`,
/// in increasing order.
pub(crate) fn wrap_numerators(m: usize, params: &WaveformParams) -> Vec<u64> {
    let n = params.n() as u64;
    let bound = numerator_bound(params);
    (1u64..)
        .map(|r| n * r - m as u64)
        .take_while(|&k| (k as f64) < bound)
        .collect()
}

/// `4 sin^2(pi k / (2 alpha))` with the argument reduced modulo one cycle.
pub fn jump_sq_for_numerator(k: u64, params: &WaveformParams) -> f64 {
    let x = k as f64 / (2.0 * params.alpha());
    let s = (std::f64::consts::PI * (x - x.round())).sin();
    4.0 * s * s
}

pub fn wrap_count(m: usize, params: &WaveformParams) -> Result<usize> {
    params.check_index(m)?;
    Ok(wrap_numerators(m, params).len())
}

pub fn wrap_events(m: usize, params: &WaveformParams) -> Result<Vec<WrapEvent>> {
    params.check_index(m)?;
    let n = params.n() as u64;
    let rate = 2.0 * params.alpha() * params.bandwidth();
    Ok(wrap_numerators(m, params)
        .into_iter()
        .map(|k| WrapEvent {
            m,
            r: (k + m as u64) / n,
            t: k as f64 / rate,
            jump_sq: jump_sq_for_numerator(k, params),
        })
        .collect())
}

/// Every wrap event of every subcarrier, grouped by `m`.
pub fn all_wrap_events(params: &WaveformParams) -> Vec<WrapEvent> {
    (0..params.n())
        .flat_map(|m| wrap_events(m, params).expect("m < N"))
        .collect()
}

/// Whether every basis function is continuous on `[0, T)`:
/// `alpha <= 1/(2N)` or `alpha = 1/(2k)` for a positive integer `k`.
pub fn is_continuous(params: &WaveformParams) -> bool {
    let alpha = params.alpha();
    if alpha <= 1.0 / (2.0 * params.n() as f64) {
        return true;
    }
    let k = 1.0 / (2.0 * alpha);
    let nearest = k.round();
    nearest >= 1.0 && (k - nearest).abs() <= 1e-12 * k
}

/// `E|s(t0+) - s(t0-)|^2` for unit-variance symbols: `(1/N) sum_m |dg_m(t0)|^2`.
///
/// Each numerator `k = N r - m` belongs to exactly one subcarrier, so at most one
/// term contributes.
pub fn expected_tx_jump_energy(t0: f64, params: &WaveformParams) -> f64 {
    let n = params.n() as u64;
    let k_real = t0 * 2.0 * params.alpha() * params.bandwidth();
    let k_round = k_real.round();
    if k_round < 1.0 || (k_real - k_round).abs() > 1e-12 * numerator_bound(params) {
        return 0.0;
    }
    let k = k_round as u64;
    let m = ((n - k % n) % n) as usize;
    if !wrap_numerators(m, params).contains(&k) {
        return 0.0;
    }
    jump_sq_for_numerator(k, params) / n as f64
}

/// `sum_m sum_r sin^2(pi (N r - m) / (2 alpha))`.
pub fn total_jump_weight(params: &WaveformParams) -> f64 {
    all_wrap_events(params).iter().map(|e| e.jump_sq / 4.0).sum()
}
