//! Sinusoid generation the way a 16-bit DSP does it: a truncated Taylor
//! series evaluated by Horner's rule on a 16×16 multiplier feeding a wide
//! accumulator.
//!
//! Arguments are folded to `[0, π/4]` first so every operand fits a Q1.15
//! word; the octant decides whether the sine or the cosine kernel runs and
//! with which sign. The sign of the input is stripped before anything else,
//! which makes `sin` odd and `cos` even bit-for-bit.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use crate::error::{Error, Result};
use crate::fixedpoint::{Acc, Fx, QFormat};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaylorConfig {
    pub n_terms: u32,
    pub operand_fmt: QFormat,
    pub acc_bits: u32,
}

impl Default for TaylorConfig {
    fn default() -> Self {
        TaylorConfig {
            n_terms: 8,
            operand_fmt: QFormat::Q1_15,
            acc_bits: 36,
        }
    }
}

impl TaylorConfig {
    pub fn new(n_terms: u32, operand_fmt: QFormat, acc_bits: u32) -> Result<Self> {
        if n_terms == 0 {
            return Err(Error::Config("Taylor series needs at least one term".into()));
        }
        if acc_bits < 2 * operand_fmt.word_bits() || acc_bits > 128 {
            return Err(Error::Config(format!(
                "{acc_bits}-bit accumulator cannot hold a {0}×{0} product",
                operand_fmt.word_bits()
            )));
        }
        Ok(TaylorConfig {
            n_terms,
            operand_fmt,
            acc_bits,
        })
    }

    /// Order `r` of the remainder: the sine series stops at `x^r`, the
    /// cosine series at `x^(r-1)`.
    pub fn remainder_order(&self) -> u32 {
        2 * self.n_terms - 1
    }

    fn acc(&self) -> Acc {
        Acc::new(self.acc_bits, 2 * self.operand_fmt.frac_bits())
            .expect("validated accumulator width")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Sin,
    Cos,
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Printed remainder bounds: `x^(r+1)/(r+1)!` for sine, `x^r/r!` for cosine.
pub fn remainder_bound<T: Real>(x: T, r: u32, which: Which) -> T {
    let k = match which {
        Which::Sin => r + 1,
        Which::Cos => r,
    };
    x.powi(k as i32) / T::lit(factorial(k))
}

/// Truncated sine series `Σ_{k<n} (-1)^k x^(2k+1)/(2k+1)!`, evaluated by
/// Horner's rule in `T`.
pub fn series_sin<T: Real>(x: T, n_terms: u32) -> T {
    let y = x * x;
    let h = (0..n_terms).rev().fold(T::zero(), |h, k| {
        let c = T::lit((-1f64).powi(k as i32) / factorial(2 * k + 1));
        c + y * h
    });
    x * h
}

/// Truncated cosine series `Σ_{k<n} (-1)^k x^(2k)/(2k)!`.
pub fn series_cos<T: Real>(x: T, n_terms: u32) -> T {
    let y = x * x;
    (0..n_terms).rev().fold(T::zero(), |h, k| {
        let c = T::lit((-1f64).powi(k as i32) / factorial(2 * k));
        c + y * h
    })
}

/// Coefficients `c_1 … c_{n-1}` of the sine (`(2k+1)!`) or cosine (`(2k)!`)
/// series in the operand format. The unit leading term is added in the
/// accumulator instead.
fn coefficients(which: Which, cfg: &TaylorConfig) -> Vec<Fx> {
    (1..cfg.n_terms)
        .map(|k| {
            let f = match which {
                Which::Sin => factorial(2 * k + 1),
                Which::Cos => factorial(2 * k),
            };
            Fx::from_real((-1f64).powi(k as i32) / f, cfg.operand_fmt)
        })
        .collect()
}

/// `1 + y·(c_1 + y·(c_2 + …))` minus its leading 1: returns `y·h` narrowed.
fn horner_tail(y: Fx, coeffs: &[Fx], cfg: &TaylorConfig) -> Fx {
    let fmt = cfg.operand_fmt;
    let mut h = Fx::zero(fmt);
    for &c in coeffs.iter().rev() {
        let mut acc = cfg.acc();
        acc.load(c);
        acc.mac(y, h);
        h = acc.narrow(fmt);
    }
    y.mul(h, fmt)
}

/// Sine of `u ∈ [0, π/4]` in the operand format.
fn sin_kernel(u: Fx, cfg: &TaylorConfig) -> Fx {
    let fmt = cfg.operand_fmt;
    let y = u.mul(u, fmt);
    let t = horner_tail(y, &coefficients(Which::Sin, cfg), cfg);
    let mut acc = cfg.acc();
    acc.load(u);
    acc.mac(u, t);
    acc.narrow(fmt)
}

/// Cosine of `u ∈ [0, π/4]` in the operand format.
fn cos_kernel(u: Fx, cfg: &TaylorConfig) -> Fx {
    let fmt = cfg.operand_fmt;
    let y = u.mul(u, fmt);
    let t = horner_tail(y, &coefficients(Which::Cos, cfg), cfg);
    let mut acc = cfg.acc();
    acc.load_real(1.0);
    acc.add(t);
    acc.narrow(fmt)
}

/// Fold `|x|` to an octant. Returns `(u, use_cos_kernel, negate)` for the
/// requested function such that `f(|x|) = ±kernel(u)`.
fn octant(abs_x: f64, which: Which) -> (f64, bool, bool) {
    let mut a = abs_x - TAU * (abs_x / TAU).floor();
    // sin(a) for a in [0, 2π): fold the lower half-turn first
    let mut negate = false;
    if which == Which::Cos {
        // cos a = sin(a + π/2)
        a += FRAC_PI_2;
        if a >= TAU {
            a -= TAU;
        }
    }
    if a >= PI {
        a -= PI;
        negate = true;
    }
    if a > FRAC_PI_2 {
        a = PI - a;
    }
    // now sin(a), a in [0, π/2]
    if a > FRAC_PI_4 {
        (FRAC_PI_2 - a, true, negate)
    } else {
        (a, false, negate)
    }
}

fn evaluate(x: Fx, which: Which, cfg: &TaylorConfig) -> Fx {
    let v = x.to_real();
    let (u, cos_kernel_needed, mut negate) = octant(v.abs(), which);
    if which == Which::Sin && v < 0.0 {
        negate = !negate;
    }
    let u = Fx::from_real(u, cfg.operand_fmt);
    let r = if cos_kernel_needed {
        cos_kernel(u, cfg)
    } else {
        sin_kernel(u, cfg)
    };
    if negate {
        r.sat_neg()
    } else {
        r
    }
}

pub fn taylor_sin(x: Fx, cfg: &TaylorConfig) -> Fx {
    evaluate(x, Which::Sin, cfg)
}

pub fn taylor_cos(x: Fx, cfg: &TaylorConfig) -> Fx {
    evaluate(x, Which::Cos, cfg)
}

/// `(cos, sin)` pair.
pub fn taylor_sincos(x: Fx, cfg: &TaylorConfig) -> (Fx, Fx) {
    (taylor_cos(x, cfg), taylor_sin(x, cfg))
}
