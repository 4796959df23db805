//! Continuous-time realizations of an AFDM block.
//!
//! Two realizations of the same discrete IDAFT block are modelled exactly as
//! piecewise phase polynomials:
//!
//! * `Realization::Pc`: the wrapped-chirp waveform whose instantaneous
//!   frequency is folded into `[0, B)`; quadratic phase between wrap instants,
//!   with envelope jumps whenever a wrap is not an integer phase reset.
//! * `Realization::Step`: the stepped-frequency waveform holding the wrapped
//!   midpoint frequency on every sampling interval with continuous phase.
//!
//! On top of the waveform model the crate evaluates exact spectra (sinc sums
//! and Fresnel segments), OOBE and high-frequency tail coefficients, sampled
//! channel matrices under fractional delays, the analytic LMMSE EVM, and a
//! raised-cosine windowing baseline.

pub mod channel;
pub mod discontinuity;
mod error;
pub mod params;
pub mod receiver;
pub mod selftest;
pub mod spectrum;
pub mod synthesis;
pub mod windowing;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use params::{RawParams, SymbolBlock, WaveformParams};
pub use synthesis::{PhaseSegment, Realization, SampleVector, SubcarrierWaveform};

/// `exp(j 2 pi x)` for a phase given in cycles.
///
/// The integer part is dropped before scaling so that large cycle counts keep
/// full fractional precision.
#[inline]
pub fn cis_cycles(x: f64) -> Complex64 {
    let frac = x - x.round();
    let (s, c) = (std::f64::consts::TAU * frac).sin_cos();
    Complex64::new(c, s)
}

/// Distance of a phase (cycles) to the nearest integer.
#[inline]
pub fn wrapped_cycles(x: f64) -> f64 {
    x - x.round()
}
