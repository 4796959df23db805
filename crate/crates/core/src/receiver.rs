//! LMMSE equalization with mismatched delay knowledge and its analytic EVM.

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::channel::{channel_matrix_from_basis, ChannelPath, SampledChannelMatrix};
use crate::params::WaveformParams;
use crate::synthesis::{BasisSet, Realization};
use crate::{Complex64, Error, Result};

#[derive(Debug, Clone)]
pub struct LmmseSetup {
    pub h_true: SampledChannelMatrix,
    pub h_assumed: SampledChannelMatrix,
    /// `sigma_w^2`, linear.
    pub noise_var: f64,
}

impl LmmseSetup {
    pub fn new(h_true: SampledChannelMatrix, h_assumed: SampledChannelMatrix, noise_var: f64) -> Result<Self> {
        if h_true.entries.shape() != h_assumed.entries.shape() || !h_true.entries.is_square() {
            return Err(Error::DimensionMismatch {
                expected: h_true.dim(),
                got: h_assumed.dim(),
            });
        }
        if h_true.realization != h_assumed.realization {
            return Err(Error::InvalidParam(
                "true and assumed matrices belong to different realizations".into(),
            ));
        }
        if !(noise_var.is_finite() && noise_var > 0.0) {
            return Err(Error::InvalidParam(format!(
                "noise variance must be positive, got {noise_var}"
            )));
        }
        Ok(Self { h_true, h_assumed, noise_var })
    }

    /// Scales both matrices by the same factor so that `||H_true||_F^2 / N = 1`.
    pub fn normalized(mut self) -> Self {
        let n = self.h_true.dim() as f64;
        let scale = (n / self.h_true.entries.norm_squared()).sqrt();
        self.h_true.entries *= Complex64::new(scale, 0.0);
        self.h_assumed.entries *= Complex64::new(scale, 0.0);
        self
    }
}

pub fn snr_to_noise_var(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

/// `W = (H^H H + sigma^2 I)^{-1} H^H` through a Cholesky solve.
pub fn lmmse_filter(h_assumed: &DMatrix<Complex64>, noise_var: f64) -> Result<DMatrix<Complex64>> {
    let n = h_assumed.ncols();
    let hh = h_assumed.adjoint();
    let mut normal = &hh * h_assumed;
    for i in 0..n {
        normal[(i, i)] += Complex64::new(noise_var, 0.0);
    }
    let chol = normal
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NumericalFailure("regularized normal matrix is not positive definite".into()))?;
    let w = chol.solve(&hh);
    let residual = (&normal * &w - &hh).norm() / hh.norm().max(f64::MIN_POSITIVE);
    if residual.is_nan() || residual > 1e-8 {
        return Err(Error::NumericalFailure(format!(
            "LMMSE solve residual {residual:e} exceeds 1e-8"
        )));
    }
    Ok(w)
}

/// `EVM^2 = ||W H - I||_F^2 / N + sigma^2 ||W||_F^2 / N`, returned as `EVM`.
pub fn lmmse_evm(setup: &LmmseSetup) -> Result<f64> {
    let n = setup.h_true.dim();
    let w = lmmse_filter(&setup.h_assumed.entries, setup.noise_var)?;
    let mut wh = &w * &setup.h_true.entries;
    for i in 0..n {
        wh[(i, i)] -= Complex64::new(1.0, 0.0);
    }
    let evm_sq = (wh.norm_squared() + setup.noise_var * w.norm_squared()) / n as f64;
    Ok(evm_sq.sqrt())
}

/// Linear-interpolation percentile, `q` in `[0, 100]`.
pub fn percentile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pos = (q / 100.0).clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Prefixed basis sets of both realizations, built once per experiment.
struct BasisPair {
    pc: BasisSet,
    step: BasisSet,
}

impl BasisPair {
    fn new(params: &WaveformParams, t_cpp: f64) -> Result<Self> {
        Ok(Self {
            pc: BasisSet::build(Realization::Pc, params)?.with_cpp(t_cpp)?,
            step: BasisSet::build(Realization::Step, params)?.with_cpp(t_cpp)?,
        })
    }

    fn evm(&self, basis: &BasisSet, truth: &[ChannelPath], assumed: &[ChannelPath], noise_var: f64) -> Result<f64> {
        let setup = LmmseSetup::new(
            channel_matrix_from_basis(basis, truth)?,
            channel_matrix_from_basis(basis, assumed)?,
            noise_var,
        )?;
        lmmse_evm(&setup.normalized())
    }

    fn paired(&self, truth: &[ChannelPath], assumed: &[ChannelPath], noise_var: f64) -> Result<(f64, f64)> {
        Ok((
            self.evm(&self.pc, truth, assumed, noise_var)?,
            self.evm(&self.step, truth, assumed, noise_var)?,
        ))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SinglePathConfig {
    pub d: usize,
    pub eps_grid: Vec<f64>,
    pub delta_eps: f64,
    pub snr_db: f64,
    pub t_cpp: f64,
}

impl SinglePathConfig {
    /// `points` uniform values of `eps` in `[0, 1)`.
    pub fn uniform_grid(points: usize) -> Vec<f64> {
        (0..points).map(|i| i as f64 / points as f64).collect()
    }
}

impl Default for SinglePathConfig {
    fn default() -> Self {
        Self {
            d: 4,
            eps_grid: Self::uniform_grid(512),
            delta_eps: 0.005,
            snr_db: 35.0,
            t_cpp: 8.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub epsilon: f64,
    pub evm_pc: f64,
    pub evm_step: f64,
}

/// EVM over the fractional delay of a unit single path, matrix built at
/// `eps + delta_eps`.
pub fn single_path_sweep(params: &WaveformParams, cfg: &SinglePathConfig) -> Result<Vec<SweepPoint>> {
    let max_eps = cfg.eps_grid.iter().copied().fold(0.0, f64::max);
    let reach = (cfg.d as f64 + max_eps + cfg.delta_eps.abs()) / params.bandwidth();
    if reach >= cfg.t_cpp {
        return Err(Error::DelayExceedsCpp { delay: reach, cpp: cfg.t_cpp });
    }
    let bases = BasisPair::new(params, cfg.t_cpp)?;
    let noise_var = snr_to_noise_var(cfg.snr_db);
    cfg.eps_grid
        .par_iter()
        .map(|&eps| {
            let truth = [ChannelPath::fractional(cfg.d, eps, params)];
            let assumed = [ChannelPath::fractional(cfg.d, eps + cfg.delta_eps, params)];
            let (evm_pc, evm_step) = bases.paired(&truth, &assumed, noise_var)?;
            Ok(SweepPoint { epsilon: eps, evm_pc, evm_step })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultipathConfig {
    pub n_trials: usize,
    pub n_paths: usize,
    /// Largest integer delay tap; taps are drawn from `1..=max_tap`.
    pub max_tap: usize,
    /// Normalized Doppler bound, `|nu| / B <= max_doppler`.
    pub max_doppler: f64,
    /// Bound on `B delta`.
    pub delta_max: f64,
    pub snr_db: f64,
    pub seed: u64,
    pub t_cpp: f64,
}

impl Default for MultipathConfig {
    fn default() -> Self {
        Self {
            n_trials: 2000,
            n_paths: 3,
            max_tap: 7,
            max_doppler: 0.03,
            delta_max: 0.005,
            snr_db: 35.0,
            seed: 1,
            t_cpp: 9.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DrawnChannel {
    pub truth: Vec<ChannelPath>,
    pub assumed: Vec<ChannelPath>,
}

/// Channel of trial `trial`; each trial has its own ChaCha stream, so draws do
/// not depend on evaluation order.
pub fn draw_channel(cfg: &MultipathConfig, params: &WaveformParams, trial: u64) -> DrawnChannel {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(trial);
    let b = params.bandwidth();
    let taps = sample(&mut rng, cfg.max_tap, cfg.n_paths);
    let mut gains: Vec<Complex64> = Vec::with_capacity(cfg.n_paths);
    let mut truth = Vec::with_capacity(cfg.n_paths);
    for tap in taps.iter() {
        let d = (tap + 1) as f64;
        let eps: f64 = rng.random();
        let nu = rng.random_range(-cfg.max_doppler..=cfg.max_doppler) * b;
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        gains.push(Complex64::new(re, im));
        truth.push(ChannelPath::new(Complex64::new(0.0, 0.0), (d + eps) / b, nu));
    }
    let norm = gains.iter().map(|g| g.norm_sqr()).sum::<f64>().sqrt();
    for (path, g) in truth.iter_mut().zip(&gains) {
        path.gain = g / norm;
    }
    let assumed = truth
        .iter()
        .map(|path| {
            let delay = loop {
                let delta = rng.random_range(-cfg.delta_max..=cfg.delta_max) / b;
                if path.delay + delta >= 0.0 {
                    break path.delay + delta;
                }
            };
            ChannelPath { delay, ..*path }
        })
        .collect();
    DrawnChannel { truth, assumed }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialResult {
    pub trial: usize,
    pub evm_pc: f64,
    pub evm_step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvmSummary {
    pub median: f64,
    pub p99: f64,
    pub max: f64,
}

impl EvmSummary {
    pub fn of(values: &[f64]) -> Self {
        Self {
            median: percentile(values, 50.0),
            p99: percentile(values, 99.0),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultipathResult {
    pub trials: Vec<TrialResult>,
    pub pc: EvmSummary,
    pub step: EvmSummary,
}

/// Paired Monte Carlo over random multipath channels with delay errors.
pub fn multipath_ensemble(params: &WaveformParams, cfg: &MultipathConfig) -> Result<MultipathResult> {
    if cfg.n_trials == 0 {
        return Err(Error::InvalidParam("at least one trial is required".into()));
    }
    if !(cfg.delta_max > 0.0 && cfg.delta_max < 0.5) {
        return Err(Error::InvalidParam(format!(
            "delta_max must lie in (0, 0.5), got {}",
            cfg.delta_max
        )));
    }
    if cfg.n_paths == 0 || cfg.n_paths > cfg.max_tap {
        return Err(Error::InvalidParam(format!(
            "cannot draw {} distinct taps from 1..={}",
            cfg.n_paths, cfg.max_tap
        )));
    }
    let reach = (cfg.max_tap as f64 + 1.0 + cfg.delta_max) / params.bandwidth();
    if reach >= cfg.t_cpp {
        return Err(Error::DelayExceedsCpp { delay: reach, cpp: cfg.t_cpp });
    }
    let bases = BasisPair::new(params, cfg.t_cpp)?;
    let noise_var = snr_to_noise_var(cfg.snr_db);
    let trials = (0..cfg.n_trials)
        .into_par_iter()
        .map(|trial| {
            let ch = draw_channel(cfg, params, trial as u64);
            let (evm_pc, evm_step) = bases.paired(&ch.truth, &ch.assumed, noise_var)?;
            Ok(TrialResult { trial, evm_pc, evm_step })
        })
        .collect::<Result<Vec<_>>>()?;
    let pc: Vec<f64> = trials.iter().map(|t| t.evm_pc).collect();
    let step: Vec<f64> = trials.iter().map(|t| t.evm_step).collect();
    Ok(MultipathResult {
        pc: EvmSummary::of(&pc),
        step: EvmSummary::of(&step),
        trials,
    })
}
