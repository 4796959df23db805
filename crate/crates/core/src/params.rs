//! Block constants and the derived time/frequency quantities.
//!
//! A block is fully described by `(N, B, c1, c2)`. Everything else (duration,
//! sampling period, continuous chirp rate `K = 2 c1 B^2`, normalized chirp rate
//! `alpha = c1 N`) is computed on demand so the values can never drift apart.

use std::path::Path;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Result};

/// Unvalidated block parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawParams {
    pub n: usize,
    pub bandwidth: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Default for RawParams {
    fn default() -> Self {
        Self {
            n: 64,
            bandwidth: 1.0,
            c1: 0.8 / 64.0,
            c2: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveformParams {
    n: usize,
    bandwidth: f64,
    c1: f64,
    c2: f64,
}

impl WaveformParams {
    pub fn derive(raw: RawParams) -> Result<Self> {
        if raw.n < 2 {
            return Err(Error::InvalidParam(format!("N must be >= 2, got {}", raw.n)));
        }
        if !(raw.bandwidth.is_finite() && raw.bandwidth > 0.0) {
            return Err(Error::InvalidParam(format!(
                "bandwidth must be positive, got {}",
                raw.bandwidth
            )));
        }
        if !(raw.c1.is_finite() && raw.c1 > 0.0) {
            return Err(Error::InvalidParam(format!("c1 must be positive, got {}", raw.c1)));
        }
        if !raw.c2.is_finite() {
            return Err(Error::InvalidParam(format!("c2 must be finite, got {}", raw.c2)));
        }
        Ok(Self {
            n: raw.n,
            bandwidth: raw.bandwidth,
            c1: raw.c1,
            c2: raw.c2,
        })
    }

    /// Parameters at unit bandwidth with `c1 = alpha / n`.
    pub fn with_alpha(n: usize, alpha: f64) -> Result<Self> {
        Self::derive(RawParams {
            n,
            bandwidth: 1.0,
            c1: alpha / n as f64,
            c2: 0.0,
        })
    }

    pub fn with_c2(self, c2: f64) -> Result<Self> {
        Self::derive(RawParams { c2, ..self.raw() })
    }

    pub fn with_bandwidth(self, bandwidth: f64) -> Result<Self> {
        Self::derive(RawParams {
            bandwidth,
            ..self.raw()
        })
    }

    pub fn raw(&self) -> RawParams {
        RawParams {
            n: self.n,
            bandwidth: self.bandwidth,
            c1: self.c1,
            c2: self.c2,
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    #[inline]
    pub fn c1(&self) -> f64 {
        self.c1
    }

    #[inline]
    pub fn c2(&self) -> f64 {
        self.c2
    }

    /// Block duration `T = N / B`.
    #[inline]
    pub fn duration(&self) -> f64 {
        self.n as f64 / self.bandwidth
    }

    /// Sampling period `1 / B`.
    #[inline]
    pub fn sample_period(&self) -> f64 {
        1.0 / self.bandwidth
    }

    /// Continuous chirp rate `K = 2 c1 B^2` in Hz/s.
    #[inline]
    pub fn chirp_rate(&self) -> f64 {
        2.0 * self.c1 * self.bandwidth * self.bandwidth
    }

    /// Normalized chirp rate `alpha = c1 N`.
    #[inline]
    pub fn alpha(&self) -> f64 {
        self.c1 * self.n as f64
    }

    /// Sampling instant `t_n = n / B`.
    #[inline]
    pub fn grid_time(&self, n: usize) -> f64 {
        n as f64 / self.bandwidth
    }

    pub(crate) fn check_index(&self, m: usize) -> Result<()> {
        if m < self.n {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: m,
                len: self.n,
            })
        }
    }

    /// Parses a `key=value` file (see [`parse_config`]).
    pub fn from_config_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::Config(format!("{}: {e}", path.as_ref().display())))?;
        parse_config(&text)
    }
}

/// Parses block parameters from `key=value` lines.
///
/// Recognized keys are `n`, `bandwidth`, `c1`, `c2` and `alpha`; `alpha` sets
/// `c1 = alpha / n` and may not be combined with `c1`. Blank lines and lines
/// starting with `#` are ignored. Missing keys take the defaults of
/// [`RawParams::default`].
pub fn parse_config(text: &str) -> Result<WaveformParams> {
    let mut raw = RawParams::default();
    let mut c1 = None;
    let mut alpha = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key=value", lineno + 1)))?;
        let key = key.trim();
        let value = value.trim();
        let num = || {
            value
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("line {}: {key}: {e}", lineno + 1)))
        };
        match key {
            "n" => {
                raw.n = value
                    .parse()
                    .map_err(|e| Error::Config(format!("line {}: n: {e}", lineno + 1)))?
            }
            "bandwidth" => raw.bandwidth = num()?,
            "c1" => c1 = Some(num()?),
            "c2" => raw.c2 = num()?,
            "alpha" => alpha = Some(num()?),
            other => {
                return Err(Error::Config(format!(
                    "line {}: unknown key `{other}`",
                    lineno + 1
                )))
            }
        }
    }
    raw.c1 = match (c1, alpha) {
        (Some(_), Some(_)) => {
            return Err(Error::Config("`c1` and `alpha` are mutually exclusive".into()))
        }
        (Some(c1), None) => c1,
        (None, Some(alpha)) => alpha / raw.n as f64,
        (None, None) => 0.8 / raw.n as f64,
    };
    WaveformParams::derive(raw)
}

/// DAF-domain data symbols `x[m]`, one per subcarrier.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolBlock {
    symbols: Vec<Complex64>,
}

impl SymbolBlock {
    pub fn new(symbols: Vec<Complex64>, params: &WaveformParams) -> Result<Self> {
        if symbols.len() != params.n() {
            return Err(Error::DimensionMismatch {
                expected: params.n(),
                got: symbols.len(),
            });
        }
        Ok(Self { symbols })
    }

    pub fn impulse(m: usize, params: &WaveformParams) -> Result<Self> {
        params.check_index(m)?;
        let mut symbols = vec![Complex64::new(0.0, 0.0); params.n()];
        symbols[m] = Complex64::new(1.0, 0.0);
        Ok(Self { symbols })
    }

    pub fn ones(params: &WaveformParams) -> Self {
        Self {
            symbols: vec![Complex64::new(1.0, 0.0); params.n()],
        }
    }

    /// Circularly symmetric complex Gaussian symbols with unit variance.
    pub fn random(seed: u64, params: &WaveformParams) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = std::f64::consts::FRAC_1_SQRT_2;
        let symbols = (0..params.n())
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re * scale, im * scale)
            })
            .collect();
        Self { symbols }
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}
