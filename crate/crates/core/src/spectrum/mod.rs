//! Exact finite-block spectra, average ESD, OOBE and high-frequency tails.
//!
//! Each basis waveform is a sum of phase segments. Linear-phase segments
//! transform to sinc terms; quadratic-phase segments to differences of Fresnel
//! integrals. Band integrals of the ESD use the trapezoid rule on a uniform
//! grid finer than `1/T`: the ESD is the transform of an autocorrelation
//! supported on `|lag| < T`, so such a grid does not alias its oscillations.

pub mod fresnel;

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::discontinuity::total_jump_weight;
use crate::params::WaveformParams;
use crate::synthesis::{build_subcarrier, PhaseSegment, Realization, SubcarrierWaveform};
use crate::{cis_cycles, Error, Result};

pub use fresnel::fresnel;
use fresnel::fresnel_parts;

#[inline]
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - (PI * x).powi(2) / 6.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// `int_lo^hi exp{j2pi (a0 + b t + c t^2)} dt` for `c > 0`.
fn quadratic_integral(a0: f64, b: f64, c: f64, lo: f64, hi: f64) -> Complex64 {
    let root = 2.0 * c.sqrt();
    let shift = b / (2.0 * c);
    let p0 = fresnel_parts(root * (lo + shift));
    let p1 = fresnel_parts(root * (hi + shift));
    let phase = |t: f64| a0 + t * (b + c * t);
    let mut acc = Complex64::new(0.0, 0.0);
    let base = p1.base - p0.base;
    if base != Complex64::new(0.0, 0.0) {
        acc += base * cis_cycles(a0 - b * b / (4.0 * c));
    }
    // exp{-j pi b^2/(2c)} exp{j pi u^2 / 2} is exactly exp{j2pi phase(t)}.
    acc += p1.osc * cis_cycles(phase(hi)) - p0.osc * cis_cycles(phase(lo));
    acc / root
}

/// `int_lo^hi exp{j2pi (phi(t) - f t)} dt` over part of one segment.
pub fn segment_transform(seg: &PhaseSegment, lo: f64, hi: f64, f: f64) -> Complex64 {
    let len = hi - lo;
    if len <= 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let b = seg.a1 - f;
    if seg.a2 == 0.0 {
        let mid = lo + 0.5 * len;
        cis_cycles(seg.a0 + seg.a1 * mid - f * mid) * (len * sinc(b * len))
    } else if seg.a2 > 0.0 {
        quadratic_integral(seg.a0, b, seg.a2, lo, hi)
    } else {
        quadratic_integral(-seg.a0, -b, -seg.a2, lo, hi).conj()
    }
}

/// Transform of a waveform restricted to `[lo, hi)`.
pub fn windowed_segments_transform(segments: &[PhaseSegment], lo: f64, hi: f64, f: f64) -> Complex64 {
    segments
        .iter()
        .filter(|s| s.t_end > lo && s.t_start < hi)
        .map(|s| segment_transform(s, s.t_start.max(lo), s.t_end.min(hi), f))
        .sum()
}

/// `G_m(f) = int_0^T g_m(t) exp(-j2pi f t) dt`.
pub fn waveform_transform(w: &SubcarrierWaveform, f: f64) -> Complex64 {
    w.block_segments()
        .iter()
        .map(|s| segment_transform(s, s.t_start, s.t_end, f))
        .sum()
}

pub fn spectrum_step(m: usize, f: f64, params: &WaveformParams) -> Result<Complex64> {
    let w = build_subcarrier(m, Realization::Step, params)?;
    Ok(LinearKernel::new(&w, params).transform(f, params.bandwidth()))
}

pub fn spectrum_pc(m: usize, f: f64, params: &WaveformParams) -> Result<Complex64> {
    let w = build_subcarrier(m, Realization::Pc, params)?;
    Ok(waveform_transform(&w, f))
}

/// Sum of sinc terms for waveforms made of linear segments on the sampling
/// grid, evaluated with a running `exp(-j2pi f n/B)` instead of per-term
/// exponentials.
#[derive(Debug, Clone)]
struct LinearKernel {
    start: Vec<Complex64>,
    end: Vec<Complex64>,
    freqs: Vec<f64>,
}

impl LinearKernel {
    fn applies(w: &SubcarrierWaveform, params: &WaveformParams) -> bool {
        let segs = w.block_segments();
        segs.len() == params.n()
            && segs.iter().enumerate().all(|(n, s)| {
                s.a2 == 0.0 && s.t_start == params.grid_time(n) && s.t_end == params.grid_time(n + 1)
            })
    }

    fn new(w: &SubcarrierWaveform, params: &WaveformParams) -> Self {
        let segs = w.block_segments();
        let b = params.bandwidth();
        // Phases are referenced to each interval start: t' = t - n/B.
        Self {
            start: segs.iter().map(|s| cis_cycles(s.phase(s.t_start))).collect(),
            end: segs.iter().map(|s| cis_cycles(s.phase(s.t_end))).collect(),
            freqs: segs.iter().map(|s| s.a1 / b).collect(),
        }
    }

    fn transform(&self, f: f64, bandwidth: f64) -> Complex64 {
        let fb = f / bandwidth;
        let z = cis_cycles(-fb);
        let mut zn = Complex64::new(1.0, 0.0);
        let mut acc = Complex64::new(0.0, 0.0);
        for ((&s, &e), &fn_) in self.start.iter().zip(&self.end).zip(&self.freqs) {
            let zn1 = zn * z;
            let x = fn_ - fb;
            if x.abs() > 1e-3 {
                // (E_{n+1} - E_n) / (j 2 pi x)
                let diff = e * zn1 - s * zn;
                acc += Complex64::new(diff.im, -diff.re) / (2.0 * PI * x);
            } else {
                let w = Complex64::new(0.0, 2.0 * PI * x);
                // (exp(w) - 1) / w
                let mut term = Complex64::new(1.0, 0.0);
                let mut h = term;
                for k in 2..8 {
                    term *= w / k as f64;
                    h += term;
                }
                acc += s * zn * h;
            }
            zn = zn1;
        }
        acc / bandwidth
    }
}

#[derive(Debug, Clone)]
enum Kernel {
    Linear(LinearKernel),
    Segments(Vec<PhaseSegment>),
}

/// Source of an average ESD and its asymptotic one-sided tail.
pub trait EsdSource: Sync {
    fn params(&self) -> &WaveformParams;

    /// `Phi(f)`.
    fn esd(&self, f: f64) -> f64;

    /// `c` such that `int_F^inf Phi df ~ c / (2 pi^2 F)` on either side.
    fn tail_coefficient(&self) -> f64;

    fn esd_many(&self, freqs: &[f64]) -> Vec<f64> {
        freqs.par_iter().map(|&f| self.esd(f)).collect()
    }
}

/// Precomputed per-subcarrier spectra of one realization.
#[derive(Debug, Clone)]
pub struct SpectrumEvaluator {
    params: WaveformParams,
    realization: Realization,
    kernels: Vec<Kernel>,
    tail: f64,
}

impl SpectrumEvaluator {
    pub fn new(realization: Realization, params: &WaveformParams) -> Result<Self> {
        let kernels = (0..params.n())
            .map(|m| {
                let w = build_subcarrier(m, realization, params)?;
                Ok(if LinearKernel::applies(&w, params) {
                    Kernel::Linear(LinearKernel::new(&w, params))
                } else {
                    Kernel::Segments(w.block_segments().to_vec())
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            params: *params,
            realization,
            kernels,
            tail: predicted_tail_coefficient(realization, params),
        })
    }

    pub fn realization(&self) -> Realization {
        self.realization
    }

    /// `G_m(f)`.
    pub fn spectrum(&self, m: usize, f: f64) -> Result<Complex64> {
        self.params.check_index(m)?;
        Ok(self.transform(m, f))
    }

    fn transform(&self, m: usize, f: f64) -> Complex64 {
        match &self.kernels[m] {
            Kernel::Linear(k) => k.transform(f, self.params.bandwidth()),
            Kernel::Segments(segs) => segs
                .iter()
                .map(|s| segment_transform(s, s.t_start, s.t_end, f))
                .sum(),
        }
    }
}

impl EsdSource for SpectrumEvaluator {
    fn params(&self) -> &WaveformParams {
        &self.params
    }

    fn esd(&self, f: f64) -> f64 {
        let total: f64 = (0..self.params.n()).map(|m| self.transform(m, f).norm_sqr()).sum();
        total / self.params.n() as f64
    }

    fn tail_coefficient(&self) -> f64 {
        self.tail
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EsdResult {
    pub freq_grid: Vec<f64>,
    pub esd: Vec<f64>,
    pub realization: Realization,
}

pub fn average_esd(
    realization: Realization,
    freq_grid: &[f64],
    params: &WaveformParams,
) -> Result<EsdResult> {
    if freq_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParam("frequency grid must be sorted".into()));
    }
    let eval = SpectrumEvaluator::new(realization, params)?;
    Ok(EsdResult {
        freq_grid: freq_grid.to_vec(),
        esd: eval.esd_many(freq_grid),
        realization,
    })
}

/// Two-sided tail multiplier of `1 / (pi^2 F)`.
pub fn predicted_tail_coefficient(realization: Realization, params: &WaveformParams) -> f64 {
    match realization {
        Realization::Pc => 1.0 + 2.0 / params.n() as f64 * total_jump_weight(params),
        Realization::Step | Realization::Theta(_) => 1.0,
    }
}

/// Out-of-band region `(-inf, lower) U (upper, inf)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OobeBand {
    /// Complement of the nominal band `[0, B)`.
    Full,
    /// `f/B < -0.5` or `f/B > 1.5`.
    FarOut,
}

impl OobeBand {
    pub fn edges(&self, bandwidth: f64) -> (f64, f64) {
        match self {
            OobeBand::Full => (0.0, bandwidth),
            OobeBand::FarOut => (-0.5 * bandwidth, 1.5 * bandwidth),
        }
    }
}

/// Grid step near the band (features of width `B/N`) and further out.
fn grid_steps(params: &WaveformParams) -> (f64, f64) {
    let unit = params.bandwidth() / params.n() as f64;
    (unit / 16.0, unit / 4.0)
}

fn trapezoid_uniform(source: &dyn EsdSource, lo: f64, hi: f64, step: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let panels = ((hi - lo) / step).ceil().max(1.0) as usize;
    let h = (hi - lo) / panels as f64;
    let freqs: Vec<f64> = (0..=panels).map(|k| lo + k as f64 * h).collect();
    let vals = source.esd_many(&freqs);
    let inner: f64 = vals[1..panels].iter().sum();
    h * (inner + 0.5 * (vals[0] + vals[panels]))
}

/// `int_lo^hi Phi df`, fine grid on `[-5B, 6B]` and coarser outside.
pub fn integrate_esd(source: &dyn EsdSource, lo: f64, hi: f64) -> f64 {
    let b = source.params().bandwidth();
    let (fine, coarse) = grid_steps(source.params());
    let (near_lo, near_hi) = (-5.0 * b, 6.0 * b);
    let mut cuts = vec![lo];
    cuts.extend([near_lo, near_hi].into_iter().filter(|&c| c > lo && c < hi));
    cuts.push(hi);
    cuts.windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            let step = if mid > near_lo && mid < near_hi { fine } else { coarse };
            trapezoid_uniform(source, w[0], w[1], step)
        })
        .sum()
}

fn check_f_max(f_max: f64, params: &WaveformParams) -> Result<()> {
    if f_max >= 10.0 * params.bandwidth() {
        Ok(())
    } else {
        Err(Error::InvalidParam(format!(
            "integration limit must be at least 10 B, got {f_max}"
        )))
    }
}

/// Energy outside `band`: numerical over `[-F_max, lower] U [upper, B + F_max]`
/// plus the analytic `1/F` tail beyond.
pub fn out_of_band_energy(source: &dyn EsdSource, band: OobeBand, f_max: f64) -> Result<f64> {
    let params = source.params();
    check_f_max(f_max, params)?;
    let b = params.bandwidth();
    let (lower, upper) = band.edges(b);
    let tail = source.tail_coefficient() / (2.0 * PI * PI) * (1.0 / f_max + 1.0 / (b + f_max));
    Ok(integrate_esd(source, -f_max, lower) + integrate_esd(source, upper, b + f_max) + tail)
}

/// `int Phi df` over the real line; equals `T` by Parseval.
pub fn total_energy(source: &dyn EsdSource, f_max: f64) -> Result<f64> {
    let params = source.params();
    check_f_max(f_max, params)?;
    let b = params.bandwidth();
    let tail = source.tail_coefficient() / (2.0 * PI * PI) * (1.0 / f_max + 1.0 / (b + f_max));
    Ok(integrate_esd(source, -f_max, b + f_max) + tail)
}

/// `eta = (1/T) int_{R \ [0,B)} Phi df`.
pub fn oobe_ratio(realization: Realization, params: &WaveformParams, f_max: f64) -> Result<f64> {
    let eval = SpectrumEvaluator::new(realization, params)?;
    Ok(out_of_band_energy(&eval, OobeBand::Full, f_max)? / params.duration())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailCoefficient {
    /// Lower edge `F` actually used (snapped to the integration grid).
    pub f_lower: f64,
    pub f_max: f64,
    pub c_hat: f64,
}

/// `C(F; F_max) = pi^2 int_{F<|f|<F_max} Phi df / (1/F - 1/F_max)` for every
/// requested `F`, sharing one cumulative integral.
pub fn tail_curve(source: &dyn EsdSource, lowers: &[f64], f_max: f64) -> Result<Vec<TailCoefficient>> {
    let params = source.params();
    let b = params.bandwidth();
    if lowers.is_empty() {
        return Ok(Vec::new());
    }
    let f_min = lowers.iter().copied().fold(f64::INFINITY, f64::min);
    if let Some(&bad) = lowers.iter().find(|&&f| !(f >= b && f < f_max)) {
        return Err(Error::InvalidParam(format!(
            "tail lower edge must satisfy B <= F < F_max, got F={bad}, F_max={f_max}"
        )));
    }
    let step = b / (8.0 * params.n() as f64);
    let panels = ((f_max - f_min) / step).ceil().max(1.0) as usize;
    let h = (f_max - f_min) / panels as f64;
    let pos: Vec<f64> = (0..=panels).map(|k| f_min + k as f64 * h).collect();
    let neg: Vec<f64> = pos.iter().map(|f| -f).collect();
    let vp = source.esd_many(&pos);
    let vn = source.esd_many(&neg);
    let vals: Vec<f64> = vp.iter().zip(&vn).map(|(a, b)| a + b).collect();
    // cumulative[i] = int_{pos[i]}^{f_max}
    let mut cumulative = vec![0.0; panels + 1];
    for i in (0..panels).rev() {
        cumulative[i] = cumulative[i + 1] + 0.5 * h * (vals[i] + vals[i + 1]);
    }
    Ok(lowers
        .iter()
        .map(|&f| {
            let i = (((f - f_min) / h).round() as usize).min(panels - 1);
            let f_used = pos[i];
            TailCoefficient {
                f_lower: f_used,
                f_max,
                c_hat: PI * PI * cumulative[i] / (1.0 / f_used - 1.0 / f_max),
            }
        })
        .collect())
}

pub fn tail_coefficient(
    realization: Realization,
    f_lower: f64,
    f_max: f64,
    params: &WaveformParams,
) -> Result<TailCoefficient> {
    let eval = SpectrumEvaluator::new(realization, params)?;
    Ok(tail_curve(&eval, &[f_lower], f_max)?[0])
}
