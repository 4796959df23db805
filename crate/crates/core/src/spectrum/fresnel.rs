//! Complex Fresnel integral `F(u) = int_0^u exp(j pi v^2 / 2) dv = C(u) + j S(u)`.
//!
//! Small arguments use the Maclaurin series. For `|u| >= 1.5` the integral is
//! written through the complementary error function, whose continued
//! fraction converges quickly there:
//!
//! ```text
//! F(u) = sgn(u) (1 + j)/2 + Q(u) exp(j pi u^2 / 2)
//! ```
//!
//! The split form is exposed so callers can merge the oscillating factor with
//! other phases before exponentiating.

use std::f64::consts::PI;

use num_complex::Complex64;

const SERIES_LIMIT: f64 = 1.5;
const CF_EPS: f64 = 1e-16;
const CF_MAX_ITER: usize = 10_000;

/// `F(u) = base + osc * exp(j pi u^2 / 2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FresnelParts {
    pub base: Complex64,
    pub osc: Complex64,
}

pub fn fresnel(u: f64) -> Complex64 {
    let parts = fresnel_parts(u);
    if parts.osc == Complex64::new(0.0, 0.0) {
        parts.base
    } else {
        parts.base + parts.osc * half_pi_square_phase(u)
    }
}

/// `exp(j pi u^2 / 2)` with `u^2` split into an exact high part and an
/// FMA-recovered low part before reduction.
pub fn half_pi_square_phase(u: f64) -> Complex64 {
    let hi = u * u;
    let lo = u.mul_add(u, -hi);
    // pi u^2 / 2 rad = u^2 / 4 cycles; division by 4 is exact.
    let cycles = (hi / 4.0 - (hi / 4.0).round()) + lo / 4.0;
    let (s, c) = (2.0 * PI * cycles).sin_cos();
    Complex64::new(c, s)
}

pub fn fresnel_parts(u: f64) -> FresnelParts {
    let x = u.abs();
    let sign = if u < 0.0 { -1.0 } else { 1.0 };
    if x < SERIES_LIMIT {
        FresnelParts {
            base: series(u),
            osc: Complex64::new(0.0, 0.0),
        }
    } else {
        FresnelParts {
            base: Complex64::new(0.5, 0.5) * sign,
            osc: continued_fraction(x) * sign,
        }
    }
}

fn series(u: f64) -> Complex64 {
    // sum_k (j pi/2)^k u^(2k+1) / (k! (2k+1))
    let z = Complex64::new(0.0, 0.5 * PI * u * u);
    let mut power = Complex64::new(u, 0.0);
    let mut sum = power;
    for k in 0..200 {
        power *= z / (k as f64 + 1.0);
        let term = power / (2.0 * k as f64 + 3.0);
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    sum
}

/// Oscillating coefficient for `x >= 1.5` from the modified Lentz evaluation
/// of the erfc continued fraction.
fn continued_fraction(x: f64) -> Complex64 {
    let pix2 = PI * x * x;
    let one = Complex64::new(1.0, 0.0);
    let mut b = Complex64::new(1.0, -pix2);
    let mut c = Complex64::new(1.0 / f64::MIN_POSITIVE, 0.0);
    let mut d = one / b;
    let mut h = d;
    let mut n = -1.0;
    for _ in 1..CF_MAX_ITER {
        n += 2.0;
        let a = -n * (n + 1.0);
        b += Complex64::new(4.0, 0.0);
        d = one / (d * a + b);
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del.re - 1.0).abs() + del.im.abs() < CF_EPS {
            break;
        }
    }
    // F = (1+j)/2 [1 - (x - jx) h exp(j pi x^2/2)] and (1+j)(1-j)/2 = 1.
    -h * x
}
