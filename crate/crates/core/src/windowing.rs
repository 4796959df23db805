//! Raised-cosine edge windowing of one block.
//!
//! On the taper `[0, L)`, `L = rho/B`, the window is
//! `1/2 - (exp(j pi t/L) + exp(-j pi t/L))/4`, so the transform of a windowed
//! waveform is the unwindowed transform minus shifted transforms restricted to
//! the two taper regions. Those restricted transforms are exact segment
//! integrals, hence the windowed spectrum needs no quadrature.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::discontinuity::wrap_events;
use crate::params::WaveformParams;
use crate::spectrum::{
    out_of_band_energy, windowed_segments_transform, EsdSource, OobeBand, SpectrumEvaluator,
};
use crate::synthesis::{build_subcarrier, PhaseSegment, Realization};
use crate::{cis_cycles, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeWindow {
    rho: f64,
    params: WaveformParams,
}

impl EdgeWindow {
    pub fn new(rho: f64, params: &WaveformParams) -> Result<Self> {
        let half = params.n() as f64 / 2.0;
        if !(rho >= 0.0 && rho <= half) {
            return Err(Error::InvalidParam(format!(
                "edge length must lie in [0, N/2 = {half}], got {rho}"
            )));
        }
        Ok(Self { rho, params: *params })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn params(&self) -> &WaveformParams {
        &self.params
    }

    /// Taper duration `rho / B`.
    pub fn taper(&self) -> f64 {
        self.rho / self.params.bandwidth()
    }

    /// `int_0^T omega(t)^2 dt = T - 5L/4`.
    pub fn energy(&self) -> f64 {
        self.params.duration() - 1.25 * self.taper()
    }
}

pub fn window_value(w: &EdgeWindow, t: f64) -> Result<f64> {
    let duration = w.params.duration();
    if !(t >= 0.0 && t < duration) {
        return Err(Error::OutOfDomain { t, lo: 0.0, hi: duration });
    }
    if w.rho == 0.0 {
        return Ok(1.0);
    }
    let len = w.taper();
    Ok(if t < len {
        0.5 * (1.0 - (PI * t / len).cos())
    } else if t < duration - len {
        1.0
    } else {
        0.5 * (1.0 - (PI * (duration - t) / len).cos())
    })
}

/// One-sided limit `omega(T^-)`.
fn window_end_value(w: &EdgeWindow) -> f64 {
    if w.rho == 0.0 {
        1.0
    } else {
        0.0
    }
}

/// `EVM_win^2 = (1/N) sum_n |omega(n/B) - 1|^2`.
pub fn window_sample_evm(w: &EdgeWindow) -> f64 {
    let n = w.params.n();
    let total: f64 = (0..n)
        .map(|k| {
            let v = window_value(w, w.params.grid_time(k)).expect("grid point inside block");
            (v - 1.0).powi(2)
        })
        .sum();
    total / n as f64
}

/// `C_{m,w} = omega(0+)^2 + omega(T-)^2 + sum_r omega(t_r)^2 |dg_r|^2`.
pub fn windowed_tail_coefficient(m: usize, w: &EdgeWindow, realization: Realization) -> Result<f64> {
    w.params.check_index(m)?;
    let start = window_value(w, 0.0)?;
    let end = window_end_value(w);
    let mut c = start * start + end * end;
    if realization == Realization::Pc {
        for e in wrap_events(m, &w.params)? {
            let v = window_value(w, e.t)?;
            c += v * v * e.jump_sq;
        }
    }
    Ok(c)
}

struct TaperedSubcarrier {
    head: Vec<PhaseSegment>,
    tail: Vec<PhaseSegment>,
}

/// Average ESD of `omega(t) s(t)`.
pub struct WindowedEvaluator {
    window: EdgeWindow,
    raw: SpectrumEvaluator,
    tapers: Vec<TaperedSubcarrier>,
    tail: f64,
}

impl WindowedEvaluator {
    pub fn new(realization: Realization, window: &EdgeWindow) -> Result<Self> {
        let params = window.params;
        let len = window.taper();
        let t_end = params.duration();
        let tapers = if window.rho == 0.0 {
            Vec::new()
        } else {
            (0..params.n())
                .map(|m| {
                    let w = build_subcarrier(m, realization, &params)?;
                    let segs = w.block_segments();
                    Ok(TaperedSubcarrier {
                        head: segs.iter().filter(|s| s.t_start < len).copied().collect(),
                        tail: segs.iter().filter(|s| s.t_end > t_end - len).copied().collect(),
                    })
                })
                .collect::<Result<Vec<_>>>()?
        };
        let total: f64 = (0..params.n())
            .map(|m| windowed_tail_coefficient(m, window, realization))
            .sum::<Result<f64>>()?;
        Ok(Self {
            window: *window,
            raw: SpectrumEvaluator::new(realization, &params)?,
            tapers,
            tail: total / (2.0 * params.n() as f64),
        })
    }

    pub fn window(&self) -> &EdgeWindow {
        &self.window
    }

    /// Transform of `omega(t) g_m(t)`.
    pub fn spectrum(&self, m: usize, f: f64) -> Result<Complex64> {
        let g = self.raw.spectrum(m, f)?;
        if self.window.rho == 0.0 {
            return Ok(g);
        }
        let len = self.window.taper();
        let t_end = self.window.params.duration();
        let shift = self.window.params.bandwidth() / (2.0 * self.window.rho);
        // exp(j2pi shift T)
        let c = cis_cycles(self.window.params.n() as f64 / (2.0 * self.window.rho));
        let taper = &self.tapers[m];
        let left = |x: f64| windowed_segments_transform(&taper.head, 0.0, len, x);
        let right = |x: f64| windowed_segments_transform(&taper.tail, t_end - len, t_end, x);
        let head = 0.5 * left(f) + 0.25 * (left(f - shift) + left(f + shift));
        let tail = 0.5 * right(f) + 0.25 * (c * right(f + shift) + c.conj() * right(f - shift));
        Ok(g - head - tail)
    }
}

impl EsdSource for WindowedEvaluator {
    fn params(&self) -> &WaveformParams {
        &self.window.params
    }

    fn esd(&self, f: f64) -> f64 {
        let n = self.window.params.n();
        let total: f64 = (0..n)
            .map(|m| self.spectrum(m, f).expect("m < N").norm_sqr())
            .sum();
        total / n as f64
    }

    fn tail_coefficient(&self) -> f64 {
        self.tail
    }
}

/// Fraction of the windowed block energy outside `band`.
pub fn windowed_oobe(
    realization: Realization,
    w: &EdgeWindow,
    band: OobeBand,
    f_max: f64,
) -> Result<f64> {
    let eval = WindowedEvaluator::new(realization, w)?;
    Ok(out_of_band_energy(&eval, band, f_max)? / w.energy())
}
