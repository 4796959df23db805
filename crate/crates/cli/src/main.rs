//! `sfdm`: experiments comparing wrapped-chirp (PC) and stepped (SFDM)
//! realizations of an AFDM block. Every subcommand writes one CSV.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use sfdm_core::channel::{channel_mismatch, parse_paths};
use sfdm_core::discontinuity::all_wrap_events;
use sfdm_core::receiver::{multipath_ensemble, single_path_sweep, MultipathConfig, SinglePathConfig};
use sfdm_core::spectrum::{
    oobe_ratio, out_of_band_energy, predicted_tail_coefficient, tail_curve, EsdSource, OobeBand,
    SpectrumEvaluator,
};
use sfdm_core::synthesis::BasisSet;
use sfdm_core::windowing::{window_sample_evm, EdgeWindow, WindowedEvaluator};
use sfdm_core::{RawParams, Realization, SymbolBlock, WaveformParams};

use output::{sibling, CsvSink, Field};

#[derive(Parser, Debug)]
#[command(name = "sfdm", version, about = "PC-AFDM vs SFDM waveform, spectrum and receiver experiments")]
struct Cli {
    /// Worker threads for parallel kernels (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Output CSV path (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

/// Block parameters. Flags override values read from `--config`.
#[derive(Args, Debug, Clone)]
struct BlockArgs {
    /// `key=value` file with any of n, bandwidth, c1, c2, alpha.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of subcarriers N.
    #[arg(long)]
    n: Option<usize>,
    /// Normalized chirp rate alpha = c1 N.
    #[arg(long, conflicts_with = "c1")]
    alpha: Option<f64>,
    /// Chirp parameter c1.
    #[arg(long)]
    c1: Option<f64>,
    /// Second chirp parameter c2.
    #[arg(long)]
    c2: Option<f64>,
    /// Bandwidth B in Hz.
    #[arg(long)]
    bandwidth: Option<f64>,
}

impl BlockArgs {
    fn resolve(&self) -> Result<WaveformParams> {
        let base = match &self.config {
            Some(path) => WaveformParams::from_config_file(path)?.raw(),
            None => RawParams::default(),
        };
        let n = self.n.unwrap_or(base.n);
        // a new N alone keeps alpha, not c1
        let c1 = match (self.c1, self.alpha) {
            (Some(c1), _) => c1,
            (None, Some(alpha)) => alpha / n as f64,
            (None, None) => base.c1 * base.n as f64 / n as f64,
        };
        let raw = RawParams {
            n,
            bandwidth: self.bandwidth.unwrap_or(base.bandwidth),
            c1,
            c2: self.c2.unwrap_or(base.c2),
        };
        Ok(WaveformParams::derive(raw)?)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a block waveform and its instantaneous frequency.
    Synth(SynthArgs),
    /// List the internal wrap instants and jump magnitudes of every subcarrier.
    Jumps(BlockOnly),
    /// Average ESD of both realizations on a uniform grid.
    Spectrum(SpectrumArgs),
    /// Out-of-band energy ratio against alpha.
    OobeSweep(OobeSweepArgs),
    /// Finite-band tail coefficient against the lower edge F.
    Tail(TailArgs),
    /// Mismatch between the PC and stepped sampled channel matrices.
    ChannelNmse(ChannelArgs),
    /// LMMSE EVM against the fractional delay of a single path.
    EvmSweep(EvmSweepArgs),
    /// LMMSE EVM over random multipath channels.
    EvmMc(EvmMcArgs),
    /// Sample distortion and OOBE against the edge-window length.
    WindowTradeoff(WindowArgs),
    /// Run the internal consistency checks.
    Selftest,
}

#[derive(Args, Debug)]
struct BlockOnly {
    #[command(flatten)]
    block: BlockArgs,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[command(flatten)]
    block: BlockArgs,
    /// pc, step or theta:<v>.
    #[arg(long, default_value = "step")]
    realization: String,
    /// impulse:<m>, random:<seed> or ones.
    #[arg(long, default_value = "random:1")]
    data: String,
    /// Samples per 1/B.
    #[arg(long, default_value_t = 16)]
    oversample: usize,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[command(flatten)]
    block: BlockArgs,
    /// Lowest frequency in units of B.
    #[arg(long, default_value_t = -3.0, allow_hyphen_values = true)]
    f_min: f64,
    /// Highest frequency in units of B.
    #[arg(long, default_value_t = 4.0, allow_hyphen_values = true)]
    f_max: f64,
    /// Grid points per B/N.
    #[arg(long, default_value_t = 16)]
    density: usize,
}

#[derive(Args, Debug)]
struct OobeSweepArgs {
    #[command(flatten)]
    block: BlockArgs,
    #[arg(long, default_value_t = 0.05)]
    alpha_min: f64,
    #[arg(long, default_value_t = 1.5)]
    alpha_max: f64,
    #[arg(long, default_value_t = 0.025)]
    alpha_step: f64,
    /// Numerical integration limit in units of B.
    #[arg(long, default_value_t = 50.0)]
    fmax: f64,
}

#[derive(Args, Debug)]
struct TailArgs {
    #[command(flatten)]
    block: BlockArgs,
    /// Smallest lower edge F in units of B.
    #[arg(long, default_value_t = 2.0)]
    f_min: f64,
    /// Upper limit F_max in units of B.
    #[arg(long, default_value_t = 200.0)]
    f_max: f64,
    /// Spacing of the lower edges in units of B.
    #[arg(long, default_value_t = 1.0)]
    f_step: f64,
}

#[derive(Args, Debug)]
struct ChannelArgs {
    #[command(flatten)]
    block: BlockArgs,
    /// `h_re,h_im,tau,nu;...` with tau in s and nu in Hz.
    #[arg(long)]
    paths: String,
    /// Prefix duration in units of 1/B.
    #[arg(long, default_value_t = 8.0)]
    tcpp: f64,
}

#[derive(Args, Debug)]
struct EvmSweepArgs {
    #[command(flatten)]
    block: BlockArgs,
    /// Integer part of the delay in samples.
    #[arg(long, default_value_t = 4)]
    d: usize,
    /// Delay error of the assumed channel in samples.
    #[arg(long, default_value_t = 0.005, allow_hyphen_values = true)]
    delta_eps: f64,
    #[arg(long, default_value_t = 35.0, allow_hyphen_values = true)]
    snr_db: f64,
    /// Uniform fractional-delay points in [0, 1).
    #[arg(long, default_value_t = 512)]
    points: usize,
    /// Prefix duration in units of 1/B.
    #[arg(long, default_value_t = 8.0)]
    tcpp: f64,
}

#[derive(Args, Debug)]
struct EvmMcArgs {
    #[command(flatten)]
    block: BlockArgs,
    #[arg(long, default_value_t = 2000)]
    trials: usize,
    /// Bound on the delay error in samples.
    #[arg(long, default_value_t = 0.005)]
    delta_max: f64,
    #[arg(long, default_value_t = 35.0, allow_hyphen_values = true)]
    snr_db: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Prefix duration in units of 1/B.
    #[arg(long, default_value_t = 9.0)]
    tcpp: f64,
}

#[derive(Args, Debug)]
struct WindowArgs {
    #[command(flatten)]
    block: BlockArgs,
    /// Edge lengths in samples.
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4,5,6,8,10,12,16,20")]
    rhos: Vec<f64>,
    /// Numerical integration limit in units of B.
    #[arg(long, default_value_t = 50.0)]
    fmax: f64,
}

/// `sfdm <cmd> key=value ...` comment line.
struct Meta(String);

impl Meta {
    fn new(cmd: &str, p: &WaveformParams) -> Self {
        let mut m = Self(format!("sfdm {cmd}"));
        m.push("n", p.n());
        m.push("bandwidth", p.bandwidth());
        m.push("c1", p.c1());
        m.push("c2", p.c2());
        m.push("alpha", p.alpha());
        m
    }

    fn push(&mut self, key: &str, value: impl std::fmt::Debug) {
        self.0.push_str(&format!(" {key}={value:?}"));
    }

    fn push_str(&mut self, key: &str, value: &str) {
        self.0.push_str(&format!(" {key}={value}"));
    }

    fn seed(mut self, seed: u64) -> String {
        self.push("seed", seed);
        self.0
    }
}

fn sink(out: Option<&Path>, meta: String, header: &[&str]) -> Result<CsvSink> {
    CsvSink::create(out, &meta, header)
}

fn parse_data(data: &str, p: &WaveformParams) -> Result<(SymbolBlock, u64)> {
    if data == "ones" {
        return Ok((SymbolBlock::ones(p), 0));
    }
    if let Some(m) = data.strip_prefix("impulse:") {
        let m: usize = m.parse().with_context(|| format!("bad impulse index `{m}`"))?;
        return Ok((SymbolBlock::impulse(m, p)?, 0));
    }
    if let Some(seed) = data.strip_prefix("random:") {
        let seed: u64 = seed.parse().with_context(|| format!("bad seed `{seed}`"))?;
        return Ok((SymbolBlock::random(seed, p), seed));
    }
    bail!("unknown data `{data}` (expected impulse:<m>, random:<seed> or ones)")
}

fn synth(a: &SynthArgs, out: Option<&Path>) -> Result<()> {
    let p = a.block.resolve()?;
    let realization: Realization = a.realization.parse()?;
    let (x, seed) = parse_data(&a.data, &p)?;
    if a.oversample == 0 {
        bail!("oversample must be at least 1");
    }
    let basis = BasisSet::build(realization, &p)?;
    let mut meta = Meta::new("synth", &p);
    meta.push_str("realization", &realization.label());
    meta.push_str("data", &a.data);
    meta.push("oversample", a.oversample);
    let mut csv = sink(out, meta.seed(seed), &["t", "re", "im", "inst_freq"])?;
    let step = p.sample_period() / a.oversample as f64;
    for k in 0..p.n() * a.oversample {
        let t = k as f64 * step;
        let (s, freq) = basis.evaluate_with_freq(&x, t)?;
        csv.row(&[Field::F(t), Field::F(s.re), Field::F(s.im), Field::F(freq)])?;
    }
    csv.finish()
}

fn jumps(a: &BlockOnly, out: Option<&Path>) -> Result<()> {
    let p = a.block.resolve()?;
    let mut csv = sink(out, Meta::new("jumps", &p).seed(0), &["m", "r", "t", "jump_sq"])?;
    for e in all_wrap_events(&p) {
        csv.row(&[Field::U(e.m as u64), Field::U(e.r), Field::F(e.t), Field::F(e.jump_sq)])?;
    }
    csv.finish()
}

/// `count` points `lo + i step`, counted with integers to avoid drift.
fn grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && hi >= lo) {
        bail!("empty grid: lo={lo}, hi={hi}, step={step}");
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| lo + i as f64 * step).collect())
}

fn spectrum(a: &SpectrumArgs, out: Option<&Path>) -> Result<()> {
    let p = a.block.resolve()?;
    if a.density == 0 {
        bail!("density must be at least 1");
    }
    let b = p.bandwidth();
    let df = 1.0 / (a.density * p.n()) as f64;
    let xs = grid(a.f_min, a.f_max, df)?;
    let freqs: Vec<f64> = xs.iter().map(|x| x * b).collect();
    let pc = SpectrumEvaluator::new(Realization::Pc, &p)?.esd_many(&freqs);
    let step = SpectrumEvaluator::new(Realization::Step, &p)?.esd_many(&freqs);
    let mut meta = Meta::new("spectrum", &p);
    meta.push("f_min", a.f_min);
    meta.push("f_max", a.f_max);
    meta.push("density", a.density);
    let header = ["f_over_B", "esd_pc", "esd_step", "comp_pc", "comp_step"];
    let mut csv = sink(out, meta.seed(0), &header)?;
    for ((x, ep), es) in xs.iter().zip(&pc).zip(&step) {
        csv.row(&[Field::F(*x), Field::F(*ep), Field::F(*es), Field::F(x * x * ep), Field::F(x * x * es)])?;
    }
    csv.finish()
}

fn oobe_sweep(a: &OobeSweepArgs, out: Option<&Path>) -> Result<()> {
    let base = a.block.resolve()?;
    let alphas = grid(a.alpha_min, a.alpha_max, a.alpha_step)?;
    let f_max = a.fmax * base.bandwidth();
    let mut meta = Meta::new("oobe-sweep", &base);
    meta.push("alpha_min", a.alpha_min);
    meta.push("alpha_max", a.alpha_max);
    meta.push("alpha_step", a.alpha_step);
    meta.push("fmax", a.fmax);
    let mut csv = sink(out, meta.seed(0), &["alpha", "oobe_pc", "oobe_step"])?;
    for alpha in alphas {
        let raw = RawParams { c1: alpha / base.n() as f64, ..base.raw() };
        let p = WaveformParams::derive(raw)?;
        let pc = oobe_ratio(Realization::Pc, &p, f_max)?;
        let step = oobe_ratio(Realization::Step, &p, f_max)?;
        csv.row(&[Field::F(alpha), Field::F(pc), Field::F(step)])?;
    }
    csv.finish()
}

fn tail(a: &TailArgs, out: Option<&Path>) -> Result<()> {
    let p = a.block.resolve()?;
    let b = p.bandwidth();
    if a.f_max <= a.f_min {
        bail!("f-max must exceed f-min");
    }
    // lower edges strictly below F_max
    let xs: Vec<f64> = grid(a.f_min, a.f_max, a.f_step)?
        .into_iter()
        .filter(|&x| x < a.f_max)
        .collect();
    let lowers: Vec<f64> = xs.iter().map(|x| x * b).collect();
    let pc_eval = SpectrumEvaluator::new(Realization::Pc, &p)?;
    let step_eval = SpectrumEvaluator::new(Realization::Step, &p)?;
    let pc = tail_curve(&pc_eval, &lowers, a.f_max * b)?;
    let step = tail_curve(&step_eval, &lowers, a.f_max * b)?;
    let pred_pc = predicted_tail_coefficient(Realization::Pc, &p);
    let pred_step = predicted_tail_coefficient(Realization::Step, &p);
    let mut meta = Meta::new("tail", &p);
    meta.push("f_min", a.f_min);
    meta.push("f_max", a.f_max);
    meta.push("f_step", a.f_step);
    let header = ["F_over_B", "chat_pc", "chat_step", "chat_pc_pred", "chat_step_pred"];
    let mut csv = sink(out, meta.seed(0), &header)?;
    for (cp, cs) in pc.iter().zip(&step) {
        csv.row(&[
            Field::F(cp.f_lower / b),
            Field::F(cp.c_hat),
            Field::F(cs.c_hat),
            Field::F(pred_pc),
            Field::F(pred_step),
        ])?;
    }
    csv.finish()
}

fn channel_nmse(a: &ChannelArgs, out: Option<&Path>) -> Result<()> {
    let p = a.block.resolve()?;
    let paths = parse_paths(&a.paths)?;
    let mismatch = channel_mismatch(&paths, &p, a.tcpp / p.bandwidth())?;
    let mut meta = Meta::new("channel-nmse", &p);
    meta.push_str("paths", &format!("\"{}\"", a.paths));
    meta.push("tcpp", a.tcpp);
    let mut csv = sink(out, meta.seed(0), &["nmse", "delta_h_fro"])?;
    csv.row(&[Field::F(mismatch.nmse), Field::F(mismatch.delta_fro)])?;
    csv.finish()
}

fn evm_sweep(a: &EvmSweepArgs, out: Option<&Path>) -> Result<()> {
    let p = a.block.resolve()?;
    if a.points == 0 {
        bail!("points must be at least 1");
    }
    let cfg = SinglePathConfig {
        d: a.d,
        eps_grid: SinglePathConfig::uniform_grid(a.points),
        delta_eps: a.delta_eps,
        snr_db: a.snr_db,
        t_cpp: a.tcpp / p.bandwidth(),
    };
    let sweep = single_path_sweep(&p, &cfg)?;
    let mut meta = Meta::new("evm-sweep", &p);
    meta.push("d", a.d);
    meta.push("delta_eps", a.delta_eps);
    meta.push("snr_db", a.snr_db);
    meta.push("points", a.points);
    meta.push("tcpp", a.tcpp);
    let mut csv = sink(out, meta.seed(0), &["epsilon", "evm_pc", "evm_step"])?;
    for s in sweep {
        csv.row(&[Field::F(s.epsilon), Field::F(s.evm_pc), Field::F(s.evm_step)])?;
    }
    csv.finish()
}

fn evm_mc(a: &EvmMcArgs, out: Option<&Path>) -> Result<()> {
    let p = a.block.resolve()?;
    let cfg = MultipathConfig {
        n_trials: a.trials,
        delta_max: a.delta_max,
        snr_db: a.snr_db,
        seed: a.seed,
        t_cpp: a.tcpp / p.bandwidth(),
        ..MultipathConfig::default()
    };
    let result = multipath_ensemble(&p, &cfg)?;
    let mut meta = Meta::new("evm-mc", &p);
    meta.push("trials", cfg.n_trials);
    meta.push("paths", cfg.n_paths);
    meta.push("max_tap", cfg.max_tap);
    meta.push("max_doppler", cfg.max_doppler);
    meta.push("delta_max", cfg.delta_max);
    meta.push("snr_db", cfg.snr_db);
    meta.push("tcpp", a.tcpp);
    let meta = meta.seed(a.seed);
    let mut csv = sink(out, meta.clone(), &["trial", "evm_pc", "evm_step"])?;
    for t in &result.trials {
        csv.row(&[Field::U(t.trial as u64), Field::F(t.evm_pc), Field::F(t.evm_step)])?;
    }
    csv.finish()?;
    // the summary goes next to the trial file, or to stderr with stdout output
    let summary_path = out.map(|o| sibling(o, "summary"));
    let summary_out: Option<&Path> = summary_path.as_deref();
    let header = ["realization", "median", "p99", "max"];
    let mut summary = match summary_out {
        Some(path) => CsvSink::create(Some(path), &meta, &header)?,
        None => CsvSink::stderr(&meta, &header)?,
    };
    for (name, s) in [("pc", result.pc), ("step", result.step)] {
        summary.row(&[Field::S(name.into()), Field::F(s.median), Field::F(s.p99), Field::F(s.max)])?;
    }
    summary.finish()
}

fn window_tradeoff(a: &WindowArgs, out: Option<&Path>) -> Result<()> {
    let p = a.block.resolve()?;
    let f_max = a.fmax * p.bandwidth();
    let mut meta = Meta::new("window-tradeoff", &p);
    let rhos: Vec<String> = a.rhos.iter().map(|r| format!("{r:?}")).collect();
    meta.push_str("rhos", &rhos.join(":"));
    meta.push("fmax", a.fmax);
    let header = ["rho", "evm_win_db", "oobe_full_pc", "oobe_full_step", "oobe_far_pc", "oobe_far_step"];
    let mut csv = sink(out, meta.seed(0), &header)?;
    for &rho in &a.rhos {
        let w = EdgeWindow::new(rho, &p)?;
        let evm_db = 10.0 * window_sample_evm(&w).log10();
        let mut ratios = Vec::with_capacity(4);
        for band in [OobeBand::Full, OobeBand::FarOut] {
            for r in [Realization::Pc, Realization::Step] {
                let eval = WindowedEvaluator::new(r, &w)?;
                ratios.push(out_of_band_energy(&eval, band, f_max)? / w.energy());
            }
        }
        csv.row(&[
            Field::F(rho),
            Field::F(evm_db),
            Field::F(ratios[0]),
            Field::F(ratios[1]),
            Field::F(ratios[2]),
            Field::F(ratios[3]),
        ])?;
    }
    csv.finish()
}

fn selftest() -> Result<bool> {
    let results = sfdm_core::selftest::run_all();
    for c in &results {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(results.iter().all(|c| c.passed))
}

fn run(cli: Cli) -> Result<bool> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .context("cannot set up the thread pool")?;
    }
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Synth(a) => synth(a, out)?,
        Command::Jumps(a) => jumps(a, out)?,
        Command::Spectrum(a) => spectrum(a, out)?,
        Command::OobeSweep(a) => oobe_sweep(a, out)?,
        Command::Tail(a) => tail(a, out)?,
        Command::ChannelNmse(a) => channel_nmse(a, out)?,
        Command::EvmSweep(a) => evm_sweep(a, out)?,
        Command::EvmMc(a) => evm_mc(a, out)?,
        Command::WindowTradeoff(a) => window_tradeoff(a, out)?,
        Command::Selftest => return selftest(),
    }
    Ok(true)
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("sfdm: error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
