//! Doubly selective multipath propagation and the sampled channel matrix.
//!
//! The receiver samples `r(t) = sum_l h_l s_tx(t - tau_l) exp(j2pi nu_l t)` at
//! `t_n = n/B` after prefix removal, so column `m` of the matrix holds the
//! prefixed basis waveform evaluated at the off-grid times `t_n - tau_l`.

use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::params::WaveformParams;
use crate::synthesis::{idaft_phase, BasisSet, Realization, SampleVector};
use crate::{cis_cycles, Complex64, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelPath {
    pub gain: Complex64,
    /// Delay in seconds.
    pub delay: f64,
    /// Doppler shift in Hz.
    pub doppler: f64,
}

impl ChannelPath {
    pub fn new(gain: Complex64, delay: f64, doppler: f64) -> Self {
        Self { gain, delay, doppler }
    }

    /// Unit-gain path with delay `(d + eps) / B` and no Doppler.
    pub fn fractional(d: usize, eps: f64, params: &WaveformParams) -> Self {
        Self::new(Complex64::new(1.0, 0.0), (d as f64 + eps) / params.bandwidth(), 0.0)
    }
}

impl FromStr for ChannelPath {
    type Err = Error;

    /// `h_re,h_im,tau,nu`.
    fn from_str(s: &str) -> Result<Self> {
        let fields: Vec<&str> = s.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(Error::InvalidParam(format!(
                "path `{s}` must have four fields h_re,h_im,tau,nu"
            )));
        }
        let mut v = [0.0; 4];
        for (slot, field) in v.iter_mut().zip(&fields) {
            *slot = field
                .parse()
                .map_err(|e| Error::InvalidParam(format!("path `{s}`: {e}")))?;
        }
        Ok(Self::new(Complex64::new(v[0], v[1]), v[2], v[3]))
    }
}

/// Parses `h_re,h_im,tau,nu;h_re,h_im,tau,nu;...`.
pub fn parse_paths(s: &str) -> Result<Vec<ChannelPath>> {
    let paths = s
        .split(';')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(str::parse)
        .collect::<Result<Vec<_>>>()?;
    if paths.is_empty() {
        return Err(Error::InvalidParam("no channel paths given".into()));
    }
    Ok(paths)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledChannelMatrix {
    pub entries: DMatrix<Complex64>,
    pub realization: Realization,
}

impl SampledChannelMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.dim();
        if x.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: x.len() });
        }
        Ok((0..n)
            .map(|r| (0..n).map(|c| self.entries[(r, c)] * x[c]).sum())
            .collect())
    }
}

fn check_paths(paths: &[ChannelPath], t_cpp: f64) -> Result<()> {
    for path in paths {
        if !(path.delay.is_finite() && path.delay >= 0.0) {
            return Err(Error::InvalidParam(format!(
                "path delay must be non-negative, got {}",
                path.delay
            )));
        }
        if path.delay > 0.0 && path.delay >= t_cpp {
            return Err(Error::DelayExceedsCpp {
                delay: path.delay,
                cpp: t_cpp,
            });
        }
    }
    Ok(())
}

/// `[H]_{n,m} = sum_l h_l exp(j2pi nu_l t_n) u_{m,tx}(t_n - tau_l)` for a basis
/// that already carries a prefix.
pub fn channel_matrix_from_basis(basis: &BasisSet, paths: &[ChannelPath]) -> Result<SampledChannelMatrix> {
    check_paths(paths, basis.cpp_duration())?;
    let params = basis.params();
    let n = params.n();
    let rows = (0..n)
        .into_par_iter()
        .map(|row| {
            let t_n = params.grid_time(row);
            let mut out = vec![Complex64::new(0.0, 0.0); n];
            for path in paths {
                let coef = path.gain * cis_cycles(path.doppler * t_n);
                let t = t_n - path.delay;
                for (m, slot) in out.iter_mut().enumerate() {
                    *slot += coef * basis.basis_value(m, t)?;
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SampledChannelMatrix {
        entries: DMatrix::from_fn(n, n, |r, c| rows[r][c]),
        realization: basis.realization(),
    })
}

pub fn sampled_channel_matrix(
    realization: Realization,
    paths: &[ChannelPath],
    params: &WaveformParams,
    t_cpp: f64,
) -> Result<SampledChannelMatrix> {
    check_paths(paths, t_cpp)?;
    let basis = BasisSet::build(realization, params)?.with_cpp(t_cpp)?;
    channel_matrix_from_basis(&basis, paths)
}

/// IDAFT modulation matrix `A[n, m] = exp{j2pi(c2 m^2 + c1 n^2 + mn/N)} / sqrt(N)`.
pub fn idaft_matrix(params: &WaveformParams) -> DMatrix<Complex64> {
    let n = params.n();
    let scale = 1.0 / (n as f64).sqrt();
    DMatrix::from_fn(n, n, |row, m| {
        let mf = m as f64;
        cis_cycles(params.c2() * mf * mf + idaft_phase(row, m, params)) * scale
    })
}

/// `z = A^H r`.
pub fn daft_demod(r: &SampleVector, params: &WaveformParams) -> Result<SampleVector> {
    let n = params.n();
    if r.as_slice().len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: r.as_slice().len(),
        });
    }
    let a = idaft_matrix(params);
    let z = (0..n)
        .map(|m| (0..n).map(|row| a[(row, m)].conj() * r.as_slice()[row]).sum())
        .collect();
    SampleVector::new(z, params)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelMismatch {
    /// `||H_step - H_pc||_F^2 / ||H_pc||_F^2`.
    pub nmse: f64,
    /// `||H_step - H_pc||_F`.
    pub delta_fro: f64,
    /// `||A^H (H_step - H_pc)||_F`, equal to `delta_fro` by unitarity.
    pub delta_daf_fro: f64,
}

pub fn channel_mismatch(
    paths: &[ChannelPath],
    params: &WaveformParams,
    t_cpp: f64,
) -> Result<ChannelMismatch> {
    let pc = sampled_channel_matrix(Realization::Pc, paths, params, t_cpp)?;
    let step = sampled_channel_matrix(Realization::Step, paths, params, t_cpp)?;
    mismatch_of(&pc, &step, params)
}

pub fn mismatch_of(
    pc: &SampledChannelMatrix,
    step: &SampledChannelMatrix,
    params: &WaveformParams,
) -> Result<ChannelMismatch> {
    let delta = &step.entries - &pc.entries;
    let delta_fro = delta.norm();
    let delta_daf_fro = (idaft_matrix(params).adjoint() * &delta).norm();
    if (delta_daf_fro - delta_fro).abs() > 1e-9 * delta_fro.max(1.0) {
        return Err(Error::NumericalFailure(format!(
            "DAF-domain mismatch {delta_daf_fro} differs from time-domain {delta_fro}"
        )));
    }
    Ok(ChannelMismatch {
        nmse: delta_fro * delta_fro / pc.entries.norm_squared(),
        delta_fro,
        delta_daf_fro,
    })
}

pub fn channel_nmse(paths: &[ChannelPath], params: &WaveformParams, t_cpp: f64) -> Result<f64> {
    Ok(channel_mismatch(paths, params, t_cpp)?.nmse)
}
