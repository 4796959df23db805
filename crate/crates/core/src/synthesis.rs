//! Discrete IDAFT modulation and exact continuous-time basis waveforms.
//!
//! Every basis waveform is stored as an ordered list of [`PhaseSegment`]s,
//! each carrying a phase polynomial in cycles. Nothing is oversampled; values
//! at arbitrary (off-grid) times and exact spectra come straight from the
//! coefficients.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::discontinuity::wrap_numerators;
use crate::params::{SymbolBlock, WaveformParams};
use crate::{cis_cycles, Error, Result};

/// Continuous-time realization of the discrete block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Realization {
    /// Wrapped chirp: quadratic phase, frequency folded into `[0, B)`.
    Pc,
    /// Stepped frequency at the interval midpoint, continuous phase.
    Step,
    /// Stepped frequency evaluated at `(n + theta) / B`.
    Theta(f64),
}

impl Realization {
    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Realization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Realization::Pc => write!(f, "pc"),
            Realization::Step => write!(f, "step"),
            Realization::Theta(theta) => write!(f, "theta:{theta}"),
        }
    }
}

impl FromStr for Realization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pc" => Ok(Realization::Pc),
            "step" => Ok(Realization::Step),
            other => {
                let theta = other
                    .strip_prefix("theta:")
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| {
                        Error::InvalidParam(format!(
                            "unknown realization `{other}` (expected pc, step or theta:<v>)"
                        ))
                    })?;
                check_theta(theta)?;
                Ok(Realization::Theta(theta))
            }
        }
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if (0.0..1.0).contains(&theta) {
        Ok(())
    } else {
        Err(Error::InvalidParam(format!("theta must lie in [0, 1), got {theta}")))
    }
}

/// One piece of a basis waveform: `phi(t) = a0 + a1 t + a2 t^2` cycles on
/// `[t_start, t_end)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSegment {
    pub t_start: f64,
    pub t_end: f64,
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
}

impl PhaseSegment {
    #[inline]
    pub fn phase(&self, t: f64) -> f64 {
        self.a0 + t * (self.a1 + self.a2 * t)
    }

    #[inline]
    pub fn inst_freq(&self, t: f64) -> f64 {
        self.a1 + 2.0 * self.a2 * t
    }

    #[inline]
    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }
}

/// Unit-modulus basis function `g_m(t) = exp(j 2 pi phi_m(t))`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubcarrierWaveform {
    m: usize,
    realization: Realization,
    segments: Vec<PhaseSegment>,
    cpp_duration: f64,
}

impl SubcarrierWaveform {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn realization(&self) -> Realization {
        self.realization
    }

    pub fn segments(&self) -> &[PhaseSegment] {
        &self.segments
    }

    /// Segments covering the data block `[0, T)`, i.e. without the prefix.
    pub fn block_segments(&self) -> &[PhaseSegment] {
        let first = self.segments.partition_point(|s| s.t_start < 0.0);
        &self.segments[first..]
    }

    pub fn with_cpp(&self) -> bool {
        self.cpp_duration > 0.0
    }

    pub fn cpp_duration(&self) -> f64 {
        self.cpp_duration
    }

    /// Support `[lo, hi)` of the waveform.
    pub fn support(&self) -> (f64, f64) {
        (
            self.segments[0].t_start,
            self.segments[self.segments.len() - 1].t_end,
        )
    }

    fn out_of_domain(&self, t: f64) -> Error {
        let (lo, hi) = self.support();
        Error::OutOfDomain { t, lo, hi }
    }

    /// Index of the segment containing `t`, right-continuous at boundaries.
    pub fn segment_index(&self, t: f64) -> Result<usize> {
        let (lo, hi) = self.support();
        if !(t >= lo && t < hi) {
            return Err(self.out_of_domain(t));
        }
        Ok(self.segments.partition_point(|s| s.t_start <= t) - 1)
    }

    /// Index of the segment whose closure contains `t` from the left.
    fn left_segment_index(&self, t: f64) -> Result<usize> {
        let (lo, hi) = self.support();
        if !(t > lo && t <= hi) {
            return Err(self.out_of_domain(t));
        }
        Ok(self.segments.partition_point(|s| s.t_start < t) - 1)
    }

    pub fn phase(&self, t: f64) -> Result<f64> {
        Ok(self.segments[self.segment_index(t)?].phase(t))
    }

    pub fn inst_freq(&self, t: f64) -> Result<f64> {
        Ok(self.segments[self.segment_index(t)?].inst_freq(t))
    }

    pub fn value(&self, t: f64) -> Result<Complex64> {
        Ok(cis_cycles(self.phase(t)?))
    }

    /// One-sided limit `g(t^-)`.
    pub fn value_left(&self, t: f64) -> Result<Complex64> {
        let seg = &self.segments[self.left_segment_index(t)?];
        Ok(cis_cycles(seg.phase(t)))
    }
}

/// Discrete block `s[n] = 1/sqrt(N) sum_m x[m] exp{j2pi(c2 m^2 + c1 n^2 + mn/N)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleVector {
    values: Vec<Complex64>,
}

impl SampleVector {
    pub fn new(values: Vec<Complex64>, params: &WaveformParams) -> Result<Self> {
        if values.len() != params.n() {
            return Err(Error::DimensionMismatch {
                expected: params.n(),
                got: values.len(),
            });
        }
        Ok(Self { values })
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.values
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Phase (cycles) of the IDAFT kernel at `(n, m)`, without the `c2 m^2` term.
///
/// `mn/N` is reduced exactly before conversion.
#[inline]
pub fn idaft_phase(n: usize, m: usize, params: &WaveformParams) -> f64 {
    let nn = params.n();
    let nf = n as f64;
    params.c1() * nf * nf + ((m * n) % nn) as f64 / nn as f64
}

#[inline]
pub(crate) fn c2_phase(m: usize, params: &WaveformParams) -> f64 {
    let mf = m as f64;
    params.c2() * mf * mf
}

pub fn idaft_modulate(x: &SymbolBlock, params: &WaveformParams) -> Result<SampleVector> {
    let n = params.n();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    let scale = 1.0 / (n as f64).sqrt();
    let weighted: Vec<Complex64> = x
        .as_slice()
        .iter()
        .enumerate()
        .map(|(m, &xm)| xm * cis_cycles(c2_phase(m, params)))
        .collect();
    let values = (0..n)
        .map(|k| {
            weighted
                .iter()
                .enumerate()
                .map(|(m, &w)| w * cis_cycles(idaft_phase(k, m, params)))
                .sum::<Complex64>()
                * scale
        })
        .collect();
    Ok(SampleVector { values })
}

pub fn build_pc_subcarrier(m: usize, params: &WaveformParams) -> Result<SubcarrierWaveform> {
    params.check_index(m)?;
    let b = params.bandwidth();
    let t_end = params.duration();
    let half_k = 0.5 * params.chirp_rate();
    let base_freq = m as f64 / t_end;
    let rate = 2.0 * params.alpha() * b;

    let mut bounds = vec![0.0];
    bounds.extend(wrap_numerators(m, params).into_iter().map(|k| k as f64 / rate));
    bounds.push(t_end);

    let segments = bounds
        .windows(2)
        .enumerate()
        .map(|(q, w)| PhaseSegment {
            t_start: w[0],
            t_end: w[1],
            a0: 0.0,
            a1: base_freq - q as f64 * b,
            a2: half_k,
        })
        .collect();
    Ok(SubcarrierWaveform {
        m,
        realization: Realization::Pc,
        segments,
        cpp_duration: 0.0,
    })
}

pub fn build_step_subcarrier(m: usize, params: &WaveformParams) -> Result<SubcarrierWaveform> {
    let mut w = stepped(m, 0.5, params)?;
    w.realization = Realization::Step;
    Ok(w)
}

pub fn build_theta_subcarrier(
    m: usize,
    theta: f64,
    params: &WaveformParams,
) -> Result<SubcarrierWaveform> {
    check_theta(theta)?;
    stepped(m, theta, params)
}

/// Wrapped representative frequency on interval `n` as `(q, f)`.
///
/// The raw frequency over `B` is `(2 alpha (n + theta) + m) / N`; its floor is
/// the wrap count and the fractional part times `B` the held frequency, which
/// therefore lies in `[0, B)`.
fn step_frequency(n: usize, m: usize, theta: f64, params: &WaveformParams) -> (i64, f64) {
    let x = (2.0 * params.alpha() * (n as f64 + theta) + m as f64) / params.n() as f64;
    let q = x.floor();
    let f = ((x - q) * params.bandwidth()).min(params.bandwidth() * (1.0 - f64::EPSILON));
    (q as i64, f)
}

fn stepped(m: usize, theta: f64, params: &WaveformParams) -> Result<SubcarrierWaveform> {
    params.check_index(m)?;
    let n_sub = params.n();
    let b = params.bandwidth();
    let c1 = params.c1();
    let mut segments = Vec::with_capacity(n_sub);
    // phi(t_n) = c1 n^2 + c1 (2 theta - 1) n + mn/N - sum_{i<n} q_i, evaluated in
    // closed form so the accumulated phase does not drift with N.
    let mut integer_part: i64 = 0;
    for n in 0..n_sub {
        let (q, f) = step_frequency(n, m, theta, params);
        let nf = n as f64;
        let mn = m * n;
        let frac_mn = (mn % n_sub) as f64 / n_sub as f64;
        let whole_mn = (mn / n_sub) as i64;
        let phase_n = c1 * nf * nf
            + c1 * (2.0 * theta - 1.0) * nf
            + frac_mn
            + (whole_mn - integer_part) as f64;
        let t_n = nf / b;
        segments.push(PhaseSegment {
            t_start: t_n,
            t_end: (nf + 1.0) / b,
            a0: phase_n - f * t_n,
            a1: f,
            a2: 0.0,
        });
        integer_part += q;
    }
    Ok(SubcarrierWaveform {
        m,
        realization: Realization::Theta(theta),
        segments,
        cpp_duration: 0.0,
    })
}

pub fn build_subcarrier(
    m: usize,
    realization: Realization,
    params: &WaveformParams,
) -> Result<SubcarrierWaveform> {
    match realization {
        Realization::Pc => build_pc_subcarrier(m, params),
        Realization::Step => build_step_subcarrier(m, params),
        Realization::Theta(theta) => build_theta_subcarrier(m, theta, params),
    }
}

/// Prepends the chirp periodic prefix on `[-t_cpp, 0)`.
///
/// Prefix values equal `g(t + T) exp{-j2pi c1 N (N + 2Bt)}`; the multiplier is
/// folded into the copied coefficients. Any prefix already present is
/// replaced.
pub fn append_cpp(
    w: &SubcarrierWaveform,
    t_cpp: f64,
    params: &WaveformParams,
) -> Result<SubcarrierWaveform> {
    let t_block = params.duration();
    if !(t_cpp >= 0.0 && t_cpp < t_block) {
        return Err(Error::InvalidParam(format!(
            "prefix duration must lie in [0, T={t_block}), got {t_cpp}"
        )));
    }
    let block = w.block_segments();
    if t_cpp == 0.0 {
        return Ok(SubcarrierWaveform {
            segments: block.to_vec(),
            cpp_duration: 0.0,
            ..w.clone()
        });
    }
    let nf = params.n() as f64;
    let c1 = params.c1();
    let b = params.bandwidth();
    let cut = t_block - t_cpp;
    let mut segments: Vec<PhaseSegment> = block
        .iter()
        .filter(|s| s.t_end > cut)
        .map(|s| PhaseSegment {
            t_start: s.t_start.max(cut) - t_block,
            t_end: s.t_end - t_block,
            a0: s.a0 + s.a1 * t_block + (s.a2 * t_block * t_block - c1 * nf * nf),
            a1: s.a1 + 2.0 * s.a2 * t_block - 2.0 * c1 * nf * b,
            a2: s.a2,
        })
        .collect();
    // The first copied segment starts exactly at -t_cpp.
    segments[0].t_start = -t_cpp;
    if let Some(last) = segments.last_mut() {
        last.t_end = 0.0;
    }
    segments.extend_from_slice(block);
    Ok(SubcarrierWaveform {
        m: w.m,
        realization: w.realization,
        segments,
        cpp_duration: t_cpp,
    })
}

/// All `N` basis waveforms of one realization, optionally with prefix.
#[derive(Debug, Clone)]
pub struct BasisSet {
    params: WaveformParams,
    realization: Realization,
    waveforms: Vec<SubcarrierWaveform>,
}

impl BasisSet {
    pub fn build(realization: Realization, params: &WaveformParams) -> Result<Self> {
        let waveforms = (0..params.n())
            .map(|m| build_subcarrier(m, realization, params))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            params: *params,
            realization,
            waveforms,
        })
    }

    pub fn with_cpp(self, t_cpp: f64) -> Result<Self> {
        let waveforms = self
            .waveforms
            .iter()
            .map(|w| append_cpp(w, t_cpp, &self.params))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { waveforms, ..self })
    }

    pub fn params(&self) -> &WaveformParams {
        &self.params
    }

    pub fn realization(&self) -> Realization {
        self.realization
    }

    pub fn waveforms(&self) -> &[SubcarrierWaveform] {
        &self.waveforms
    }

    pub fn cpp_duration(&self) -> f64 {
        self.waveforms[0].cpp_duration()
    }

    /// Transmitted basis function `u_m(t) = exp{j2pi c2 m^2} g_m(t) / sqrt(N)`.
    pub fn basis_value(&self, m: usize, t: f64) -> Result<Complex64> {
        self.params.check_index(m)?;
        let g = self.waveforms[m].value(t)?;
        Ok(g * cis_cycles(c2_phase(m, &self.params)) / (self.params.n() as f64).sqrt())
    }

    pub fn evaluate(&self, x: &SymbolBlock, t: f64) -> Result<Complex64> {
        Ok(self.evaluate_with_freq(x, t)?.0)
    }

    /// Block value together with its instantaneous frequency
    /// `Im(s* s') / (2 pi |s|^2)`; the frequency is `NaN` where `s = 0`.
    pub fn evaluate_with_freq(&self, x: &SymbolBlock, t: f64) -> Result<(Complex64, f64)> {
        if x.len() != self.params.n() {
            return Err(Error::DimensionMismatch {
                expected: self.params.n(),
                got: x.len(),
            });
        }
        let scale = 1.0 / (self.params.n() as f64).sqrt();
        let mut value = Complex64::new(0.0, 0.0);
        let mut weighted_freq = Complex64::new(0.0, 0.0);
        for (m, (w, &xm)) in self.waveforms.iter().zip(x.as_slice()).enumerate() {
            if xm == Complex64::new(0.0, 0.0) {
                // still validates the domain
                w.segment_index(t)?;
                continue;
            }
            let seg = &w.segments[w.segment_index(t)?];
            let term = xm * cis_cycles(c2_phase(m, &self.params) + seg.phase(t));
            value += term;
            weighted_freq += term * seg.inst_freq(t);
        }
        value *= scale;
        weighted_freq *= scale;
        let power = value.norm_sqr();
        let freq = if power > 0.0 {
            (value.conj() * weighted_freq).re / power
        } else {
            f64::NAN
        };
        Ok((value, freq))
    }
}

pub fn evaluate_block(
    x: &SymbolBlock,
    realization: Realization,
    t: f64,
    params: &WaveformParams,
) -> Result<Complex64> {
    BasisSet::build(realization, params)?.evaluate(x, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wrapped_cycles;

    fn p(n: usize, alpha: f64) -> WaveformParams {
        WaveformParams::with_alpha(n, alpha).unwrap()
    }

    fn grid_mismatch(w: &SubcarrierWaveform, params: &WaveformParams) -> f64 {
        (0..params.n())
            .map(|n| {
                let expect = cis_cycles(idaft_phase(n, w.m(), params));
                (w.value(params.grid_time(n)).unwrap() - expect).norm()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn idaft_of_impulse_is_a_chirp() {
        let params = p(16, 0.8).with_c2(0.3).unwrap();
        let x = SymbolBlock::impulse(0, &params).unwrap();
        let s = idaft_modulate(&x, &params).unwrap();
        for (n, v) in s.as_slice().iter().enumerate() {
            let nf = n as f64;
            let expect = cis_cycles(params.c1() * nf * nf) / 4.0;
            assert!((v - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn idaft_is_unitary() {
        let params = p(64, 0.8).with_c2(0.17).unwrap();
        let x = SymbolBlock::random(11, &params);
        let s = idaft_modulate(&x, &params).unwrap();
        let xn = x.as_slice().iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        assert!((s.norm() - xn).abs() < 1e-12);
    }

    #[test]
    fn pc_segments_at_generic_rate() {
        let params = p(64, 0.8);
        let w = build_pc_subcarrier(0, &params).unwrap();
        assert_eq!(w.segments().len(), 2);
        assert!((w.segments()[0].t_end - 40.0).abs() < 1e-12);

        let w = build_pc_subcarrier(63, &params).unwrap();
        assert_eq!(w.segments().len(), 3);
        assert!((w.segments()[0].t_end - 0.625).abs() < 1e-15);
        for (q, s) in w.segments().iter().enumerate() {
            assert_eq!(s.a2, params.chirp_rate() / 2.0);
            assert!((s.a1 - (63.0 / 64.0 - q as f64)).abs() < 1e-15);
        }
        assert!(build_pc_subcarrier(64, &params).is_err());
    }

    #[test]
    fn pc_without_internal_wrapping() {
        let params = p(64, 1.0 / 128.0);
        for m in 0..64 {
            assert_eq!(build_pc_subcarrier(m, &params).unwrap().segments().len(), 1);
        }
    }

    #[test]
    fn pc_is_right_continuous_at_wraps() {
        let params = p(64, 0.8);
        let w = build_pc_subcarrier(63, &params).unwrap();
        assert_eq!(w.segment_index(0.625).unwrap(), 1);
        assert_eq!(w.left_segment_index(0.625).unwrap(), 0);
    }

    #[test]
    fn step_first_interval_frequency() {
        let params = p(64, 0.8);
        let w = build_step_subcarrier(0, &params).unwrap();
        assert_eq!(w.segments().len(), 64);
        assert!((w.segments()[0].a1 - 0.0125).abs() < 1e-15);
    }

    #[test]
    fn step_frequencies_are_wrapped_into_band() {
        for alpha in [0.3, 0.5, 0.8, 1.7, 2.0] {
            let params = p(32, alpha);
            for m in 0..32 {
                let w = build_step_subcarrier(m, &params).unwrap();
                for s in w.segments() {
                    assert!(s.a1 >= 0.0 && s.a1 < params.bandwidth(), "{}", s.a1);
                    assert_eq!(s.a2, 0.0);
                }
            }
        }
    }

    #[test]
    fn step_sampling_equivalence() {
        for alpha in [0.05, 0.5, 0.8, 1.33] {
            let params = p(64, alpha);
            for m in 0..64 {
                let w = build_step_subcarrier(m, &params).unwrap();
                assert!(grid_mismatch(&w, &params) < 1e-10);
            }
        }
    }

    #[test]
    fn step_phase_continuity_at_large_n() {
        let params = p(4096, 1.37);
        for m in [0, 1, 2047, 4095] {
            let w = build_step_subcarrier(m, &params).unwrap();
            for pair in w.segments().windows(2) {
                let t = pair[1].t_start;
                let d = pair[0].phase(t) - pair[1].phase(t);
                assert!(d.abs() < 1e-9, "m={m} t={t} d={d}");
                assert!(wrapped_cycles(d).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn theta_half_is_step() {
        let params = p(64, 0.8);
        for m in [0, 17, 63] {
            let a = build_step_subcarrier(m, &params).unwrap();
            let b = build_theta_subcarrier(m, 0.5, &params).unwrap();
            assert_eq!(a.segments(), b.segments());
        }
        assert!(build_theta_subcarrier(0, 1.0, &params).is_err());
        assert!(build_theta_subcarrier(0, -0.1, &params).is_err());
    }

    #[test]
    fn off_midpoint_theta_breaks_sampling() {
        let params = p(64, 0.8);
        let worst = (0..64)
            .map(|m| grid_mismatch(&build_theta_subcarrier(m, 0.3, &params).unwrap(), &params))
            .fold(0.0, f64::max);
        assert!(worst > 1e-3, "{worst}");
    }

    #[test]
    fn realization_parsing() {
        assert_eq!("pc".parse::<Realization>().unwrap(), Realization::Pc);
        assert_eq!("step".parse::<Realization>().unwrap(), Realization::Step);
        assert_eq!(
            "theta:0.25".parse::<Realization>().unwrap(),
            Realization::Theta(0.25)
        );
        assert!("theta:1.5".parse::<Realization>().is_err());
        assert!("sinc".parse::<Realization>().is_err());
    }

    #[test]
    fn zero_prefix_is_identity() {
        let params = p(64, 0.8);
        let w = build_pc_subcarrier(5, &params).unwrap();
        assert_eq!(append_cpp(&w, 0.0, &params).unwrap(), w);
        assert!(append_cpp(&w, 64.0, &params).is_err());
        assert!(append_cpp(&w, -1.0, &params).is_err());
    }

    #[test]
    fn prefix_matches_definition() {
        let params = p(64, 0.8).with_c2(0.2).unwrap();
        let nf = 64.0;
        for realization in [Realization::Pc, Realization::Step] {
            for m in [0, 31, 63] {
                let w = build_subcarrier(m, realization, &params).unwrap();
                let wc = append_cpp(&w, 8.0, &params).unwrap();
                assert_eq!(wc.support(), (-8.0, 64.0));
                for i in 0..400 {
                    let t = -8.0 + i as f64 * 0.0199;
                    let expect = w.value(t + 64.0).unwrap()
                        * cis_cycles(-params.c1() * nf * (nf + 2.0 * t));
                    assert!((wc.value(t).unwrap() - expect).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn prefix_grid_samples_agree_across_realizations() {
        let params = p(64, 0.8);
        for m in 0..64 {
            let pc = append_cpp(&build_pc_subcarrier(m, &params).unwrap(), 7.5, &params).unwrap();
            let st =
                append_cpp(&build_step_subcarrier(m, &params).unwrap(), 7.5, &params).unwrap();
            for k in 1..=7 {
                let t = -(k as f64);
                assert!((pc.value(t).unwrap() - st.value(t).unwrap()).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn block_samples_match_idaft() {
        let params = p(64, 0.8).with_c2(0.37).unwrap();
        let x = SymbolBlock::random(5, &params);
        let s = idaft_modulate(&x, &params).unwrap();
        for realization in [Realization::Pc, Realization::Step] {
            let basis = BasisSet::build(realization, &params).unwrap();
            for n in 0..64 {
                let v = basis.evaluate(&x, params.grid_time(n)).unwrap();
                assert!((v - s.as_slice()[n]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn block_value_bounded_by_symbol_mass() {
        let params = p(64, 0.8);
        let x = SymbolBlock::random(9, &params);
        let bound: f64 = x.as_slice().iter().map(|v| v.norm()).sum::<f64>() / 8.0;
        let basis = BasisSet::build(Realization::Pc, &params).unwrap();
        for i in 0..640 {
            let v = basis.evaluate(&x, i as f64 * 0.1).unwrap();
            assert!(v.norm() <= bound + 1e-12);
        }
        assert!(basis.evaluate(&x, 64.0).is_err());
        assert!(basis.evaluate(&x, -0.1).is_err());
    }

    #[test]
    fn one_sided_limits_of_the_block() {
        let params = p(64, 0.8);
        let x = SymbolBlock::ones(&params);
        let scale = 1.0 / 8.0;
        let limits = |realization, t: f64| {
            let basis = BasisSet::build(realization, &params).unwrap();
            let right = basis.evaluate(&x, t).unwrap();
            let left: Complex64 = basis
                .waveforms()
                .iter()
                .map(|w| w.value_left(t).unwrap())
                .sum::<Complex64>()
                * scale;
            (left, right)
        };
        // Only m = 63 wraps at t = 0.625, with |dg|^2 = 2 + sqrt 2.
        let (l, r) = limits(Realization::Pc, 0.625);
        assert!(((r - l).norm_sqr() - (2.0 + 2f64.sqrt()) / 64.0).abs() < 1e-12);
        let (l, r) = limits(Realization::Step, 0.625);
        assert!((r - l).norm() < 1e-12);
        // m = 0 wraps at t = 40 but B t = 40 is an integer phase reset.
        let (l, r) = limits(Realization::Pc, 40.0);
        assert!((r - l).norm() < 1e-10);
    }

    #[test]
    fn instantaneous_frequency_of_single_subcarrier() {
        let params = p(64, 0.8);
        let x = SymbolBlock::impulse(63, &params).unwrap();
        let basis = BasisSet::build(Realization::Pc, &params).unwrap();
        let (_, f) = basis.evaluate_with_freq(&x, 0.3).unwrap();
        assert!((f - (params.chirp_rate() * 0.3 + 63.0 / 64.0)).abs() < 1e-12);
        let (_, f) = basis.evaluate_with_freq(&x, 0.7).unwrap();
        assert!((f - (params.chirp_rate() * 0.7 + 63.0 / 64.0 - 1.0)).abs() < 1e-12);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(200))]

        #[test]
        fn sampling_equivalence_both_realizations(
            alpha in 1e-3f64..2.0,
            n_pow in 3u32..7,
            m_frac in 0.0f64..1.0,
        ) {
            let n = 1usize << n_pow;
            let params = p(n, alpha);
            let m = ((m_frac * n as f64) as usize).min(n - 1);
            let pc = build_pc_subcarrier(m, &params).unwrap();
            let st = build_step_subcarrier(m, &params).unwrap();
            proptest::prop_assert!(grid_mismatch(&pc, &params) < 1e-9);
            proptest::prop_assert!(grid_mismatch(&st, &params) < 1e-9);
        }

        #[test]
        fn segments_partition_the_block(alpha in 1e-3f64..2.0, m in 0usize..64, theta in 0.0f64..1.0) {
            let params = p(64, alpha);
            for w in [
                build_pc_subcarrier(m, &params).unwrap(),
                build_theta_subcarrier(m, theta, &params).unwrap(),
            ] {
                let segs = w.segments();
                proptest::prop_assert_eq!(segs[0].t_start, 0.0);
                proptest::prop_assert_eq!(segs[segs.len() - 1].t_end, 64.0);
                for s in segs {
                    proptest::prop_assert!(s.t_start < s.t_end);
                }
                for pair in segs.windows(2) {
                    proptest::prop_assert_eq!(pair[0].t_end, pair[1].t_start);
                }
            }
        }

        #[test]
        fn stepped_phase_is_continuous(alpha in 1e-3f64..2.0, m in 0usize..64, theta in 0.0f64..1.0) {
            let params = p(64, alpha);
            let w = build_theta_subcarrier(m, theta, &params).unwrap();
            for pair in w.segments().windows(2) {
                let t = pair[1].t_start;
                proptest::prop_assert!((pair[0].phase(t) - pair[1].phase(t)).abs() < 1e-12);
            }
        }

        #[test]
        fn local_relation_bound(alpha in 0.05f64..2.0, m in 0usize..64) {
            let params = p(64, alpha);
            let pc = build_pc_subcarrier(m, &params).unwrap();
            let st = build_step_subcarrier(m, &params).unwrap();
            let bound = std::f64::consts::PI * alpha / 128.0 + 1e-9;
            for n in 0..64 {
                let (lo, hi) = (n as f64, n as f64 + 1.0);
                let seg = pc.segment_index(lo).unwrap();
                if pc.segments()[seg].t_end < hi {
                    continue;
                }
                let mid = lo + 0.5;
                let rot = cis_cycles(pc.phase(mid).unwrap() - st.phase(mid).unwrap());
                for i in 0..=32 {
                    let t = (lo + i as f64 / 32.0).min(hi - 1e-12);
                    let d = (pc.value(t).unwrap() - rot * st.value(t).unwrap()).norm();
                    proptest::prop_assert!(d <= bound, "n={} t={} d={} bound={}", n, t, d, bound);
                }
            }
        }

        #[test]
        fn basis_is_unit_modulus(alpha in 1e-3f64..2.0, m in 0usize..64, t in -7.99f64..63.99) {
            let params = p(64, alpha);
            for realization in [Realization::Pc, Realization::Step] {
                let w = append_cpp(&build_subcarrier(m, realization, &params).unwrap(), 8.0, &params).unwrap();
                proptest::prop_assert!((w.value(t).unwrap().norm() - 1.0).abs() < 1e-14);
            }
        }
    }
}
