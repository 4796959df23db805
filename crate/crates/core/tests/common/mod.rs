//! Reference implementations used only by the tests. None of them call into
//! the library's spectrum or synthesis code.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

pub type Cx = Complex64;

fn cis(rad: f64) -> Cx {
    Cx::new(rad.cos(), rad.sin())
}

/// `exp(j2pi x)` with the integer part of `x` removed first.
pub fn cis_turns(x: f64) -> Cx {
    cis(2.0 * PI * (x - x.floor()))
}

// 15-point Kronrod nodes and weights with the embedded 7-point Gauss weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Kronrod estimate, error estimate and the rule applied to `|f|`.
fn gk15<F: Fn(f64) -> Cx>(f: &F, a: f64, b: f64) -> (Cx, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs = fc.norm() * WGK[7];
    for i in 0..7 {
        let x = h * XGK[i];
        let (lo, hi) = (f(c - x), f(c + x));
        let pair = lo + hi;
        kron += pair * WGK[i];
        abs += (lo.norm() + hi.norm()) * WGK[i];
        if i % 2 == 1 {
            gauss += pair * WG[i / 2];
        }
    }
    (kron * h, ((kron - gauss) * h).norm(), abs * h.abs())
}

/// Adaptive Gauss-Kronrod integral of a complex integrand.
pub fn integrate<F: Fn(f64) -> Cx>(f: &F, a: f64, b: f64, tol: f64) -> Cx {
    fn rec<F: Fn(f64) -> Cx>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> Cx {
        let (val, err, abs) = gk15(f, a, b);
        // below ~1e-14 of the integral of |f| the estimate is rounding noise
        if err <= tol.max(1e-14 * abs) || depth >= 30 {
            return val;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, 0.5 * tol, depth + 1) + rec(f, m, b, 0.5 * tol, depth + 1)
    }
    if a == b {
        return Cx::new(0.0, 0.0);
    }
    // start from a few panels so that narrow features are not missed
    let panels = 8;
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|k| rec(f, a + k as f64 * h, a + (k + 1) as f64 * h, tol / panels as f64, 0))
        .sum()
}

/// `u^2 / 4` reduced modulo one, using an exact two-product split of `u^2`.
fn quarter_square_turns(u: f64) -> f64 {
    let hi = u * u;
    let lo = u.mul_add(u, -hi);
    let q = hi / 4.0;
    (q - q.floor()) + lo / 4.0
}

/// `int_0^u exp(j pi v^2/2) dv` by direct quadrature for small `u` and the
/// steepest-descent contour `v = u + s exp(j pi/4)` for the tail otherwise.
pub fn fresnel_oracle(u: f64) -> Cx {
    let x = u.abs();
    let sign = u.signum();
    if x <= 3.0 {
        let val = integrate(&|v: f64| cis(0.5 * PI * v * v), 0.0, x, 1e-15);
        return val * sign;
    }
    let rot = Cx::new(std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2);
    let decay = PI * x / std::f64::consts::SQRT_2;
    // exp(pi x s (j - 1)/sqrt2 - pi s^2/2)
    let g = |s: f64| {
        let mag = (-decay * s - 0.5 * PI * s * s).exp();
        cis(decay * s) * mag
    };
    let s_max = 40.0 / decay;
    let tail = integrate(&g, 0.0, s_max, 1e-16 / x.max(1.0)) * rot * cis_turns(quarter_square_turns(x));
    (Cx::new(0.5, 0.5) - tail) * sign
}

/// Block parameters as plain numbers.
#[derive(Debug, Clone, Copy)]
pub struct Block {
    pub n: usize,
    pub b: f64,
    pub alpha: f64,
}

impl Block {
    pub fn new(n: usize, alpha: f64) -> Self {
        Self { n, b: 1.0, alpha }
    }
    pub fn t(&self) -> f64 {
        self.n as f64 / self.b
    }
    pub fn c1(&self) -> f64 {
        self.alpha / self.n as f64
    }
    pub fn k(&self) -> f64 {
        2.0 * self.c1() * self.b * self.b
    }

    /// Wrap instants `(N r - m)/(2 alpha B)` inside `(0, T)`.
    pub fn wrap_times(&self, m: usize) -> Vec<f64> {
        let mut out = Vec::new();
        for r in 1.. {
            let t = (self.n * r - m) as f64 / (2.0 * self.alpha * self.b);
            if t >= self.t() * (1.0 - 1e-13) {
                break;
            }
            out.push(t);
        }
        out
    }

    /// Wrapped-chirp phase `K t^2/2 + (m/T - qB) t`, `q = floor((Kt + m/T)/B)`.
    pub fn pc_phase(&self, m: usize, t: f64) -> f64 {
        let f_unwrapped = self.k() * t + m as f64 / self.t();
        let q = (f_unwrapped / self.b).floor();
        0.5 * self.k() * t * t + (m as f64 / self.t() - q * self.b) * t
    }

    /// Midpoint frequency of interval `i`.
    pub fn step_freq(&self, m: usize, i: usize) -> f64 {
        let f = self.k() * (i as f64 + 0.5) / self.b + m as f64 / self.t();
        f - self.b * (f / self.b).floor()
    }

    /// Stepped phase: accumulated `f_i / B` up to the interval, then linear.
    pub fn step_phase(&self, m: usize, t: f64) -> f64 {
        let i = ((t * self.b).floor() as usize).min(self.n - 1);
        let mut acc = 0.0;
        for k in 0..i {
            acc += self.step_freq(m, k) / self.b;
        }
        acc + self.step_freq(m, i) * (t - i as f64 / self.b)
    }

    pub fn g_pc(&self, m: usize, t: f64) -> Cx {
        cis_turns(self.pc_phase(m, t))
    }

    pub fn g_step(&self, m: usize, t: f64) -> Cx {
        cis_turns(self.step_phase(m, t))
    }

    /// `G_m(f)` of the wrapped chirp by quadrature between wrap instants.
    pub fn pc_spectrum(&self, m: usize, f: f64) -> Cx {
        let mut cuts = vec![0.0];
        cuts.extend(self.wrap_times(m));
        cuts.push(self.t());
        cuts.windows(2)
            .map(|w| {
                // evaluate the piece with its own wrap count to avoid flooring at the ends
                let mid = 0.5 * (w[0] + w[1]);
                let q = ((self.k() * mid + m as f64 / self.t()) / self.b).floor();
                let phase = |t: f64| 0.5 * self.k() * t * t + (m as f64 / self.t() - q * self.b) * t - f * t;
                integrate(&|t| cis_turns(phase(t)), w[0], w[1], 1e-13)
            })
            .sum()
    }

    /// `G_m(f)` of the stepped waveform by quadrature over each interval.
    pub fn step_spectrum(&self, m: usize, f: f64) -> Cx {
        let mut acc = 0.0;
        let mut total = Cx::new(0.0, 0.0);
        for i in 0..self.n {
            let fi = self.step_freq(m, i);
            let t0 = i as f64 / self.b;
            let base = acc;
            let phase = |t: f64| base + fi * (t - t0) - f * t;
            total += integrate(&|t| cis_turns(phase(t)), t0, t0 + 1.0 / self.b, 1e-13);
            acc += fi / self.b;
        }
        total
    }

    /// `sum_m sum_r sin^2(pi (N r - m) / (2 alpha))` over internal wraps.
    pub fn jump_double_sum(&self) -> f64 {
        let mut total = 0.0;
        for m in 0..self.n {
            for r in 1..=((2.0 * self.alpha + 1.0).ceil() as usize + 1) {
                let rf = r as f64;
                let mf = m as f64 / self.n as f64;
                if rf > mf && rf < 2.0 * self.alpha + mf - 1e-12 {
                    let s = (PI * (self.n * r - m) as f64 / (2.0 * self.alpha)).sin();
                    total += s * s;
                }
            }
        }
        total
    }
}

/// `|G(f)|` on the FFT bin grid from midpoint samples of `g` with `over`
/// samples per sampling interval and `pad` times zero padding.
pub fn fft_spectrum<G: Fn(f64) -> Cx>(g: &G, block: &Block, over: usize, pad: usize) -> Vec<(f64, Cx)> {
    let n_samples = block.n * over;
    let h = 1.0 / (block.b * over as f64);
    let len = n_samples * pad;
    let mut buf: Vec<Cx> = (0..len)
        .map(|k| if k < n_samples { g((k as f64 + 0.5) * h) } else { Cx::new(0.0, 0.0) })
        .collect();
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let df = 1.0 / (len as f64 * h);
    buf.into_iter()
        .enumerate()
        .map(|(k, v)| {
            let kk = if k < len / 2 { k as f64 } else { k as f64 - len as f64 };
            let f = kk * df;
            // midpoint offset: sample k sits at (k + 1/2) h
            (f, v * h * cis(-PI * f * h))
        })
        .collect()
}
