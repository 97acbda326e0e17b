//! Generalized CORDIC: circular, linear and hyperbolic coordinates in
//! rotation or vectoring direction, on fixed-point state.
//!
//! One micro-rotation at index `i` with direction `σ`:
//!
//! ```text
//! x' = x - m·σ·2^-i·y
//! y' = y + σ·2^-i·x
//! z' = z - σ·e_i        e_i = atan 2^-i | 2^-i | atanh 2^-i
//! ```
//!
//! The `2^-i` products are arithmetic shifts. Linear mode accepts negative
//! indices (left shifts) so that additions of large operands converge.

use crate::error::{Error, Result};
use crate::fixedpoint::{Fx, QFormat};
use crate::Real;

/// Coordinate system selector `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CordicMode {
    Hyperbolic,
    Linear,
    Circular,
}

impl CordicMode {
    pub fn m(self) -> i32 {
        match self {
            CordicMode::Hyperbolic => -1,
            CordicMode::Linear => 0,
            CordicMode::Circular => 1,
        }
    }

    pub fn from_m(m: i32) -> Result<Self> {
        match m {
            -1 => Ok(CordicMode::Hyperbolic),
            0 => Ok(CordicMode::Linear),
            1 => Ok(CordicMode::Circular),
            _ => Err(Error::Config(format!("CORDIC mode must be -1, 0 or 1, got {m}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// Drive `z` to zero.
    Rotation,
    /// Drive `y` to zero.
    Vectoring,
}

/// Micro-rotation direction. There is no zero digit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sigma {
    Plus,
    Minus,
}

impl Sigma {
    /// `+1` for non-negative values, so zero resolves to `Plus`.
    pub fn sign_of(negative: bool) -> Self {
        if negative {
            Sigma::Minus
        } else {
            Sigma::Plus
        }
    }

    pub fn value(self) -> i32 {
        match self {
            Sigma::Plus => 1,
            Sigma::Minus => -1,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sigma::Plus => Sigma::Minus,
            Sigma::Minus => Sigma::Plus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CordicConfig {
    pub n_iter: u32,
    pub fmt: QFormat,
    pub direction: Direction,
}

impl CordicConfig {
    pub fn new(n_iter: u32, fmt: QFormat, direction: Direction) -> Result<Self> {
        if n_iter == 0 {
            return Err(Error::Config("CORDIC needs at least one iteration".into()));
        }
        if n_iter > fmt.frac_bits() + 2 {
            return Err(Error::Config(format!(
                "{n_iter} iterations exceed the {} useful ones for {fmt}",
                fmt.frac_bits() + 2
            )));
        }
        Ok(CordicConfig {
            n_iter,
            fmt,
            direction,
        })
    }

    pub fn rotation(n_iter: u32, fmt: QFormat) -> Result<Self> {
        Self::new(n_iter, fmt, Direction::Rotation)
    }
}

impl Default for CordicConfig {
    /// 24 iterations on Q8.24.
    fn default() -> Self {
        CordicConfig {
            n_iter: 24,
            fmt: QFormat::Q8_24,
            direction: Direction::Rotation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CordicState {
    pub x: Fx,
    pub y: Fx,
    pub z: Fx,
    pub i: i32,
}

impl CordicState {
    pub fn new(x: Fx, y: Fx, z: Fx, i: i32) -> Result<Self> {
        if x.fmt() != y.fmt() || x.fmt() != z.fmt() {
            return Err(Error::FormatMismatch {
                lhs: x.fmt(),
                rhs: if x.fmt() != y.fmt() { y.fmt() } else { z.fmt() },
            });
        }
        Ok(CordicState { x, y, z, i })
    }
}

/// Elementary angle `e_i` as a real number.
pub fn elementary_angle<T: Real>(mode: CordicMode, i: i32) -> T {
    let t = T::lit(2.0).powi(-i);
    match mode {
        CordicMode::Circular => t.atan(),
        CordicMode::Linear => t,
        CordicMode::Hyperbolic => t.atanh(),
    }
}

/// `v · 2^-i`: arithmetic right shift for `i ≥ 0`, saturating left shift
/// otherwise.
fn scale_pow2(v: Fx, i: i32) -> Fx {
    let fmt = v.fmt();
    if i >= 0 {
        let k = (i as u32).min(fmt.word_bits() - 1);
        v.shr(k).expect("shift clamped below word width")
    } else {
        let k = (-i) as u32;
        let raw = if k >= 64 {
            if v.raw() == 0 {
                0
            } else {
                v.raw().signum() as i128 * i128::MAX
            }
        } else {
            (v.raw() as i128).saturating_mul(1i128 << k)
        };
        Fx::from_raw_saturating(raw, fmt)
    }
}

fn add_signed(a: Fx, b: Fx, sign: i32) -> Fx {
    let r = if sign >= 0 { a.sat_add(b) } else { a.sat_sub(b) };
    r.expect("CORDIC state shares one format")
}

/// One generalized micro-rotation.
pub fn cordic_step(s: CordicState, mode: CordicMode, sigma: Sigma) -> CordicState {
    let fmt = s.x.fmt();
    let sg = sigma.value();
    let dy = scale_pow2(s.y, s.i);
    let dx = scale_pow2(s.x, s.i);
    let x = match mode.m() * sg {
        0 => s.x,
        k => add_signed(s.x, dy, -k),
    };
    let y = add_signed(s.y, dx, sg);
    let e = Fx::from_real(elementary_angle::<f64>(mode, s.i), fmt);
    let z = add_signed(s.z, e, -sg);
    CordicState { x, y, z, i: s.i + 1 }
}

/// Real-valued micro-rotation on `(x, y, z)` at index `i`, the exact-arithmetic
/// counterpart of [`cordic_step`].
pub fn step_real<T: Real>(
    (x, y, z): (T, T, T),
    i: i32,
    mode: CordicMode,
    sigma: Sigma,
) -> (T, T, T) {
    let s = T::lit(sigma.value() as f64);
    let m = T::lit(mode.m() as f64);
    let t = T::lit(2.0).powi(-i);
    (
        x - m * s * t * y,
        y + s * t * x,
        z - s * elementary_angle::<T>(mode, i),
    )
}

/// Iteration indices for `n_iter` steps. Hyperbolic mode starts at 1 and
/// repeats 4, 13, 40, …; linear mode may start below zero.
pub fn schedule(mode: CordicMode, n_iter: u32, linear_start: i32) -> Vec<i32> {
    match mode {
        CordicMode::Circular => (0..n_iter as i32).collect(),
        CordicMode::Linear => (linear_start..n_iter as i32).collect(),
        CordicMode::Hyperbolic => {
            let mut out = Vec::with_capacity(n_iter as usize);
            let mut i = 1;
            let mut repeat_at = 4;
            while out.len() < n_iter as usize {
                out.push(i);
                if i == repeat_at && out.len() < n_iter as usize {
                    out.push(i);
                    repeat_at = 3 * repeat_at + 1;
                }
                i += 1;
            }
            out
        }
    }
}

/// Largest `|z|` a schedule can absorb: `Σ e_i`.
pub fn convergence_range(mode: CordicMode, n_iter: u32) -> f64 {
    schedule(mode, n_iter, 0)
        .into_iter()
        .map(|i| elementary_angle::<f64>(mode, i))
        .sum()
}

/// Scale factor `K = Π √(1 + m·2^-2i)` over the iteration schedule.
pub fn gain<T: Real>(n_iter: u32, mode: CordicMode) -> T {
    let m = T::lit(mode.m() as f64);
    schedule(mode, n_iter, 0)
        .into_iter()
        .fold(T::one(), |k, i| {
            k * (T::one() + m * T::lit(2.0).powi(-2 * i)).sqrt()
        })
}

/// First linear-mode index such that the schedule covers `|target|`.
fn linear_start(target: f64, n_iter: u32, fmt: QFormat) -> Result<i32> {
    let tail = (1.0 - n_iter as f64).exp2();
    let mut start = 0i32;
    while target.abs() > (1.0 - start as f64).exp2() - tail {
        start -= 1;
        if -start > fmt.int_bits() as i32 + 1 {
            return Err(Error::Domain(format!(
                "linear CORDIC operand {target} exceeds {fmt} range"
            )));
        }
    }
    Ok(start)
}

fn check_formats(x0: Fx, y0: Fx, z0: Fx, cfg: &CordicConfig) -> Result<()> {
    for v in [x0, y0, z0] {
        if v.fmt() != cfg.fmt {
            return Err(Error::FormatMismatch {
                lhs: cfg.fmt,
                rhs: v.fmt(),
            });
        }
    }
    Ok(())
}

/// Rotation direction: drive `z → 0` with `σ = sign(z)`.
///
/// Circular: `K·(x cos z − y sin z, y cos z + x sin z, ~0)`.
/// Linear: `(x, y + x·z, ~0)`.
pub fn cordic_rotate(
    x0: Fx,
    y0: Fx,
    z0: Fx,
    mode: CordicMode,
    cfg: &CordicConfig,
) -> Result<(Fx, Fx, Fx)> {
    check_formats(x0, y0, z0, cfg)?;
    let start = match mode {
        CordicMode::Linear => linear_start(z0.to_real(), cfg.n_iter, cfg.fmt)?,
        _ => {
            let range = convergence_range(mode, cfg.n_iter);
            if z0.to_real().abs() > range {
                return Err(Error::Domain(format!(
                    "|z0| = {} exceeds convergence range {range:.6}",
                    z0.to_real().abs()
                )));
            }
            0
        }
    };
    let mut s = CordicState { x: x0, y: y0, z: z0, i: 0 };
    for i in schedule(mode, cfg.n_iter, start) {
        s.i = i;
        s = cordic_step(s, mode, Sigma::sign_of(s.z.is_negative()));
    }
    Ok((s.x, s.y, s.z))
}

/// Vectoring direction: drive `y → 0` with `σ = −sign(y)`.
///
/// Circular: `(K·√(x² + y²), ~0, z + atan(y/x))`.
/// Linear: `(x, ~0, z + y/x)`.
pub fn cordic_vector(
    x0: Fx,
    y0: Fx,
    z0: Fx,
    mode: CordicMode,
    cfg: &CordicConfig,
) -> Result<(Fx, Fx, Fx)> {
    check_formats(x0, y0, z0, cfg)?;
    let start = match mode {
        CordicMode::Circular => {
            if x0.raw() == 0 && y0.raw() == 0 {
                return Err(Error::Domain("circular vectoring of the zero vector".into()));
            }
            0
        }
        CordicMode::Linear => {
            if x0.raw() == 0 {
                return Err(Error::Domain("linear vectoring divides by x0 = 0".into()));
            }
            linear_start(y0.to_real() / x0.to_real(), cfg.n_iter, cfg.fmt)?
        }
        CordicMode::Hyperbolic => {
            let ratio = y0.to_real() / x0.to_real();
            let range = convergence_range(mode, cfg.n_iter);
            if x0.to_real() <= 0.0 || ratio.abs() >= 1.0 || ratio.atanh().abs() > range {
                return Err(Error::Domain(format!(
                    "hyperbolic vectoring needs x0 > |y0| within range {range:.6}"
                )));
            }
            0
        }
    };
    let mut s = CordicState { x: x0, y: y0, z: z0, i: 0 };
    for i in schedule(mode, cfg.n_iter, start) {
        s.i = i;
        // the sign of x steers linear mode when x0 < 0
        let y_pos = s.y.raw() > 0;
        let flip = mode == CordicMode::Linear && s.x.is_negative();
        let sigma = if y_pos != flip { Sigma::Minus } else { Sigma::Plus };
        s = cordic_step(s, mode, sigma);
    }
    Ok((s.x, s.y, s.z))
}

/// Fold an angle into `[-π/2, π/2]`. Returns the folded angle and whether
/// the rotation result must be negated (a half-turn was removed).
pub fn fold_half_turn(theta: f64) -> (f64, bool) {
    use std::f64::consts::{FRAC_PI_2, PI, TAU};
    let mut r = theta - TAU * (theta / TAU).round();
    let mut negate = false;
    if r > FRAC_PI_2 {
        r -= PI;
        negate = true;
    } else if r < -FRAC_PI_2 {
        r += PI;
        negate = true;
    }
    (r, negate)
}

/// Cosine and sine of any finite angle by circular rotation of
/// `(1/K, 0)`, after folding into `[-π/2, π/2]`.
pub fn sincos_cordic(theta: Fx, cfg: &CordicConfig) -> (Fx, Fx) {
    let fmt = cfg.fmt;
    let (r, negate) = fold_half_turn(theta.to_real());
    let inv_k = Fx::from_real(1.0 / gain::<f64>(cfg.n_iter, CordicMode::Circular), fmt);
    let (c, s, _) = cordic_rotate(
        inv_k,
        Fx::zero(fmt),
        Fx::from_real(r, fmt),
        CordicMode::Circular,
        cfg,
    )
    .expect("folded angle lies inside the circular range");
    if negate {
        (c.sat_neg(), s.sat_neg())
    } else {
        (c, s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6, PI};

    const F: QFormat = QFormat::Q8_24;

    fn q(v: f64) -> Fx {
        Fx::from_real(v, F)
    }

    fn cfg() -> CordicConfig {
        CordicConfig::default()
    }

    #[test]
    fn config_limits() {
        assert!(CordicConfig::rotation(0, F).is_err());
        assert!(CordicConfig::rotation(26, F).is_ok());
        assert!(CordicConfig::rotation(27, F).is_err());
        assert!(CordicMode::from_m(2).is_err());
        assert_eq!(CordicMode::from_m(-1).unwrap(), CordicMode::Hyperbolic);
    }

    #[test]
    fn linear_step_adds_half() {
        let s = CordicState::new(q(1.0), q(0.0), q(0.5), 1).unwrap();
        let t = cordic_step(s, CordicMode::Linear, Sigma::Plus);
        assert_eq!(t.y.to_real(), 0.5);
        assert_eq!(t.z.to_real(), 0.0);
        assert_eq!(t.i, 2);
    }

    #[test]
    fn circular_step_substitution() {
        let s = CordicState::new(q(1.0), q(0.0), q(0.0), 0).unwrap();
        let t = cordic_step(s, CordicMode::Circular, Sigma::Plus);
        assert_eq!(t.x.to_real(), 1.0);
        assert_eq!(t.y.to_real(), 1.0);
        assert_eq!(t.z, q(-FRAC_PI_4));
    }

    #[test]
    fn linear_steps_cancel() {
        let s = CordicState::new(q(0.7), q(-0.3), q(0.1), 3).unwrap();
        let a = cordic_step(s, CordicMode::Linear, Sigma::Plus);
        let b = cordic_step(CordicState { i: 3, ..a }, CordicMode::Linear, Sigma::Minus);
        assert_eq!(b.y, s.y);
        assert_eq!(b.z, s.z);
    }

    #[test]
    fn gain_values() {
        assert_eq!(gain::<f64>(17, CordicMode::Linear), 1.0);
        assert_eq!(gain::<f64>(1, CordicMode::Circular), 2f64.sqrt());
        // direct product evaluation, independent of the schedule helper
        let mut k = 1.0f64;
        for i in 0..24 {
            k *= (1.0 + 4f64.powi(-i)).sqrt();
        }
        assert!((gain::<f64>(24, CordicMode::Circular) - k).abs() < 1e-15);
        assert!((k - 1.646760258).abs() < 1e-9);
        let kh = gain::<f64>(24, CordicMode::Hyperbolic);
        assert!((kh - 0.828159).abs() < 1e-5, "{kh}");
    }

    #[test]
    fn hyperbolic_schedule_repeats() {
        let s = schedule(CordicMode::Hyperbolic, 16, 0);
        assert_eq!(s, vec![1, 2, 3, 4, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 13, 14]);
    }

    #[test]
    fn linear_rotation_is_an_addition() {
        let (a, b) = (0.375, -0.8125);
        let (_, y, _) = cordic_rotate(q(1.0), q(a), q(b), CordicMode::Linear, &cfg()).unwrap();
        assert!((y.to_real() - (a + b)).abs() <= 2.0 * F.quantum());
        // wider operand pulls in negative indices
        let (_, y, _) = cordic_rotate(q(1.0), q(0.25), q(9.5), CordicMode::Linear, &cfg()).unwrap();
        assert!((y.to_real() - 9.75).abs() <= 2.0 * F.quantum());
    }

    #[test]
    fn circular_rotation_examples() {
        let inv_k = 1.0 / gain::<f64>(24, CordicMode::Circular);
        let (x, y, z) =
            cordic_rotate(q(inv_k), q(0.0), q(0.0), CordicMode::Circular, &cfg()).unwrap();
        assert!((x.to_real() - 1.0).abs() < 1e-6);
        assert!(y.to_real().abs() < 1e-6);
        assert!(z.to_real().abs() < 1e-6);
        let (x, y, _) =
            cordic_rotate(q(inv_k), q(0.0), q(FRAC_PI_6), CordicMode::Circular, &cfg()).unwrap();
        assert!((x.to_real() - 0.866_025_403_784_438_6).abs() < 1e-6);
        assert!((y.to_real() - 0.5).abs() < 1e-6);
    }

    #[test]
    fn rotation_outside_range_is_domain_error() {
        let e = cordic_rotate(q(1.0), q(0.0), q(1.8), CordicMode::Circular, &cfg());
        assert!(matches!(e, Err(Error::Domain(_))));
        let e = cordic_rotate(q(1.0), q(0.0), q(1.2), CordicMode::Hyperbolic, &cfg());
        assert!(matches!(e, Err(Error::Domain(_))));
    }

    #[test]
    fn vectoring_examples() {
        let k = gain::<f64>(24, CordicMode::Circular);
        let (x, y, z) = cordic_vector(q(1.0), q(0.0), q(0.0), CordicMode::Circular, &cfg()).unwrap();
        assert!((x.to_real() - k).abs() < 1e-6);
        assert!(y.to_real().abs() < 1e-6);
        assert!(z.to_real().abs() < 1e-6);
        let (_, _, z) = cordic_vector(q(1.0), q(1.0), q(0.0), CordicMode::Circular, &cfg()).unwrap();
        assert!((z.to_real() - 1f64.atan2(1.0)).abs() < 1e-6);
        let (_, _, z) = cordic_vector(q(1.5), q(0.9), q(0.0), CordicMode::Linear, &cfg()).unwrap();
        assert!((z.to_real() - 0.9 / 1.5).abs() < 1e-6);
        let (_, _, z) = cordic_vector(q(-0.5), q(2.0), q(0.0), CordicMode::Linear, &cfg()).unwrap();
        assert!((z.to_real() + 4.0).abs() < 1e-6);
        let e = cordic_vector(q(0.0), q(0.0), q(0.0), CordicMode::Circular, &cfg());
        assert!(matches!(e, Err(Error::Domain(_))));
    }

    #[test]
    fn hyperbolic_functions() {
        let kh = gain::<f64>(24, CordicMode::Hyperbolic);
        let (c, s, _) =
            cordic_rotate(q(1.0 / kh), q(0.0), q(0.5), CordicMode::Hyperbolic, &cfg()).unwrap();
        assert!((c.to_real() - 0.5f64.cosh()).abs() < 1e-5);
        assert!((s.to_real() - 0.5f64.sinh()).abs() < 1e-5);
        let (_, _, z) =
            cordic_vector(q(1.0), q(0.5), q(0.0), CordicMode::Hyperbolic, &cfg()).unwrap();
        assert!((z.to_real() - 0.5f64.atanh()).abs() < 1e-5);
    }

    #[test]
    fn sincos_examples() {
        let (c, s) = sincos_cordic(q(0.0), &cfg());
        assert!((c.to_real() - 1.0).abs() < 1e-6 && s.to_real().abs() < 1e-6);
        let (c, s) = sincos_cordic(q(FRAC_PI_2), &cfg());
        assert!(c.to_real().abs() < 1e-6 && (s.to_real() - 1.0).abs() < 1e-6);
        let (c, s) = sincos_cordic(q(1.0), &cfg());
        assert!((c.to_real() - 0.540_302_305_868_139_8).abs() < 1e-6);
        assert!((s.to_real() - 0.841_470_984_807_896_5).abs() < 1e-6);
        let (c, s) = sincos_cordic(q(-3.0 * PI / 4.0 - 10.0 * PI), &cfg());
        assert!((c.to_real() + FRAC_PI_4.cos()).abs() < 2e-6);
        assert!((s.to_real() + FRAC_PI_4.sin()).abs() < 2e-6);
    }

    proptest! {
        #[test]
        fn rotation_residual_bounded(z0 in -1.74f64..1.74) {
            prop_assume!(z0.abs() <= convergence_range(CordicMode::Circular, 24));
            let (_, _, z) = cordic_rotate(q(0.5), q(0.25), q(z0), CordicMode::Circular, &cfg()).unwrap();
            // z picks up one table rounding per iteration
            let bound = 2f64.powi(-23).atan() + 24.0 * F.quantum();
            prop_assert!(z.to_real().abs() <= bound, "{}", z.to_real());
        }

        #[test]
        fn norm_grows_by_gain(x in -1.0f64..1.0, y in -1.0f64..1.0, z0 in -1.5f64..1.5) {
            let (xn, yn, _) = cordic_rotate(q(x), q(y), q(z0), CordicMode::Circular, &cfg()).unwrap();
            let k = gain::<f64>(24, CordicMode::Circular);
            let n0 = q(x).to_real().hypot(q(y).to_real());
            let n1 = xn.to_real().hypot(yn.to_real());
            prop_assert!((n1 - k * n0).abs() <= 24.0 * F.quantum() * k, "{} vs {}", n1, k * n0);
        }

        #[test]
        fn linear_mode_is_multiply_add(x in -1.0f64..1.0, y in -1.0f64..1.0, z0 in -1.9f64..1.9) {
            let (fx, fy, fz) = (q(x), q(y), q(z0));
            let (_, yn, _) = cordic_rotate(fx, fy, fz, CordicMode::Linear, &cfg()).unwrap();
            let exact = fy.to_real() + fx.to_real() * fz.to_real();
            prop_assert!((yn.to_real() - exact).abs() <= 26.0 * F.quantum());
        }

        #[test]
        fn sincos_pythagorean(theta in -PI..PI) {
            let (c, s) = sincos_cordic(q(theta), &cfg());
            let (c, s) = (c.to_real(), s.to_real());
            prop_assert!((c * c + s * s - 1.0).abs() <= 4e-6);
        }
    }
}
