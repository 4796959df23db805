//! Fast internal consistency checks run by the `selftest` subcommand.

use crate::channel::{channel_mismatch, idaft_matrix, sampled_channel_matrix, ChannelPath};
use crate::discontinuity::{all_wrap_events, is_continuous, wrap_events};
use crate::params::WaveformParams;
use crate::receiver::{lmmse_evm, LmmseSetup};
use crate::spectrum::{average_esd, total_energy, SpectrumEvaluator};
use crate::synthesis::{idaft_phase, BasisSet, Realization};
use crate::windowing::{window_sample_evm, EdgeWindow};
use crate::{cis_cycles, Complex64, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, outcome: Result<(bool, String)>) -> CheckResult {
    match outcome {
        Ok((passed, detail)) => CheckResult { name, passed, detail },
        Err(e) => CheckResult { name, passed: false, detail: format!("error: {e}") },
    }
}

fn sampling_equivalence() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for (n, alpha) in [(8, 0.3), (8, 1.7), (64, 0.8), (64, 1.23)] {
        let params = WaveformParams::with_alpha(n, alpha)?;
        for r in [Realization::Pc, Realization::Step] {
            let basis = BasisSet::build(r, &params)?;
            for m in 0..n {
                for k in 0..n {
                    let expect = cis_cycles(idaft_phase(k, m, &params)) / (n as f64).sqrt();
                    worst = worst.max((basis.basis_value(m, params.grid_time(k))? - expect).norm());
                }
            }
        }
    }
    Ok((worst < 1e-9, format!("max sample error {worst:e}")))
}

fn continuity() -> Result<(bool, String)> {
    let mut ok = true;
    for k in [2.0, 4.0, 6.0, 8.0] {
        let params = WaveformParams::with_alpha(64, 1.0 / k)?;
        ok &= is_continuous(&params) && all_wrap_events(&params).iter().all(|e| e.jump_sq < 1e-18);
    }
    let generic = WaveformParams::with_alpha(64, 0.8)?;
    ok &= !is_continuous(&generic);
    let jump = wrap_events(63, &generic)?[0].jump_sq;
    let pass = ok && (jump - (2.0 + 2f64.sqrt())).abs() < 1e-10;
    Ok((pass, format!("jump at t=0.625 is {jump}")))
}

fn esd_invariants() -> Result<(bool, String)> {
    let params = WaveformParams::with_alpha(16, 0.8)?;
    let grid: Vec<f64> = (0..40).map(|i| -2.0 + 0.1 * i as f64).collect();
    let a = average_esd(Realization::Pc, &grid, &params)?;
    let b = average_esd(Realization::Pc, &grid, &params.with_c2(0.37)?)?;
    let c2_shift = a.esd.iter().zip(&b.esd).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let mut parseval: f64 = 0.0;
    for r in [Realization::Pc, Realization::Step] {
        let total = total_energy(&SpectrumEvaluator::new(r, &params)?, 20.0)?;
        parseval = parseval.max((total / params.duration() - 1.0).abs());
    }
    Ok((
        c2_shift < 1e-12 && parseval < 5e-3,
        format!("c2 shift {c2_shift:e}, Parseval error {parseval:e}"),
    ))
}

fn channel_equivalence() -> Result<(bool, String)> {
    let params = WaveformParams::with_alpha(32, 0.8)?.with_c2(0.1)?;
    let id = [ChannelPath::new(Complex64::new(1.0, 0.0), 0.0, 0.0)];
    let h = sampled_channel_matrix(Realization::Pc, &id, &params, 4.0)?;
    let id_err = (&h.entries - idaft_matrix(&params)).camax();
    let integer = [
        ChannelPath::new(Complex64::new(0.7, 0.1), 1.0, 0.02),
        ChannelPath::new(Complex64::new(0.2, -0.6), 3.0, -0.01),
    ];
    let int_nmse = channel_mismatch(&integer, &params, 4.0)?.nmse;
    let frac = channel_mismatch(&[ChannelPath::fractional(2, 0.4, &params)], &params, 4.0)?;
    Ok((
        id_err < 1e-10 && int_nmse < 1e-20 && frac.delta_fro > 1e-6,
        format!("identity {id_err:e}, integer NMSE {int_nmse:e}, fractional |dH| {:e}", frac.delta_fro),
    ))
}

fn receiver_closed_forms() -> Result<(bool, String)> {
    let params = WaveformParams::with_alpha(16, 0.8)?;
    let id = [ChannelPath::new(Complex64::new(1.0, 0.0), 0.0, 0.0)];
    let h = sampled_channel_matrix(Realization::Step, &id, &params, 2.0)?;
    let sigma2 = 0.01;
    let evm = lmmse_evm(&LmmseSetup::new(h.clone(), h, sigma2)?)?;
    let err = (evm * evm - sigma2 / (1.0 + sigma2)).abs();
    let win = window_sample_evm(&EdgeWindow::new(2.0, &WaveformParams::with_alpha(64, 0.8)?)?);
    Ok((
        err < 1e-12 && win == 0.0234375,
        format!("unitary-channel EVM error {err:e}, window EVM^2 {win}"),
    ))
}

/// Runs every check; a failed check never aborts the others.
pub fn run_all() -> Vec<CheckResult> {
    vec![
        check("sampling-equivalence", sampling_equivalence()),
        check("continuity-and-jumps", continuity()),
        check("esd-invariants", esd_invariants()),
        check("channel-equivalence", channel_equivalence()),
        check("receiver-closed-forms", receiver_closed_forms()),
    ]
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_checks_pass() {
        for c in super::run_all() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
