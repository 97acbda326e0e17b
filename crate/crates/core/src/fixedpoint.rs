//! Two's-complement fixed-point arithmetic with hardware narrowing semantics.
//!
//! Values enter through [`Fx::from_real`] with round-to-nearest-even. Every
//! later narrowing (products, shifts, format conversion) truncates toward
//! negative infinity, which is what an arithmetic right shift does in a
//! datapath. Overflow saturates to the format bounds; nothing wraps.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Word and fraction widths of a fixed-point encoding (`Qm.n`, `m = word - frac`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QFormat {
    word_bits: u32,
    frac_bits: u32,
}

impl QFormat {
    /// 16-bit DSP operand format.
    pub const Q1_15: QFormat = QFormat::new_unchecked(16, 15);
    /// 32-bit word with 24 fraction bits, the CORDIC datapath default.
    pub const Q8_24: QFormat = QFormat::new_unchecked(32, 24);
    /// 16-bit word that still holds 1.0 exactly.
    pub const Q2_14: QFormat = QFormat::new_unchecked(16, 14);
    /// 32-bit word able to hold exactly 1.0 with 30 fraction bits.
    pub const Q2_30: QFormat = QFormat::new_unchecked(32, 30);
    /// 64-bit word with 62 fraction bits.
    pub const Q2_62: QFormat = QFormat::new_unchecked(64, 62);

    const fn new_unchecked(word_bits: u32, frac_bits: u32) -> Self {
        QFormat {
            word_bits,
            frac_bits,
        }
    }

    pub fn new(word_bits: u32, frac_bits: u32) -> Result<Self> {
        if !(8..=64).contains(&word_bits) {
            return Err(Error::InvalidFormat(format!(
                "word width {word_bits} outside 8..=64"
            )));
        }
        if frac_bits + 1 > word_bits {
            return Err(Error::InvalidFormat(format!(
                "{frac_bits} fraction bits leave no sign bit in a {word_bits}-bit word"
            )));
        }
        Ok(QFormat {
            word_bits,
            frac_bits,
        })
    }

    pub fn word_bits(self) -> u32 {
        self.word_bits
    }

    pub fn frac_bits(self) -> u32 {
        self.frac_bits
    }

    /// Integer bits excluding the sign bit.
    pub fn int_bits(self) -> u32 {
        self.word_bits - 1 - self.frac_bits
    }

    pub fn max_raw(self) -> i64 {
        (((1i128) << (self.word_bits - 1)) - 1) as i64
    }

    pub fn min_raw(self) -> i64 {
        (-((1i128) << (self.word_bits - 1))) as i64
    }

    /// Weight of one least-significant bit.
    pub fn quantum(self) -> f64 {
        (-(self.frac_bits as f64)).exp2()
    }

    pub fn max_real(self) -> f64 {
        self.max_raw() as f64 * self.quantum()
    }

    pub fn min_real(self) -> f64 {
        self.min_raw() as f64 * self.quantum()
    }

    fn clamp(self, raw: i128) -> i64 {
        raw.clamp(self.min_raw() as i128, self.max_raw() as i128) as i64
    }

    fn contains(self, raw: i128) -> bool {
        raw >= self.min_raw() as i128 && raw <= self.max_raw() as i128
    }
}

impl fmt::Display for QFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q{}.{}", self.word_bits - self.frac_bits, self.frac_bits)
    }
}

impl FromStr for QFormat {
    type Err = Error;

    /// Parses `Qm.n`, e.g. `Q8.24`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidFormat(format!("expected Qm.n, got {s:?}"));
        let body = s
            .strip_prefix('Q')
            .or_else(|| s.strip_prefix('q'))
            .ok_or_else(bad)?;
        let (m, n) = body.split_once('.').ok_or_else(bad)?;
        let m: u32 = m.parse().map_err(|_| bad())?;
        let n: u32 = n.parse().map_err(|_| bad())?;
        QFormat::new(m + n, n)
    }
}

/// Shift a wide value from `from_frac` to `to_frac` fraction bits, flooring
/// on right shifts. Left shifts that overflow i128 saturate.
fn rescale(raw: i128, from_frac: u32, to_frac: u32) -> i128 {
    if from_frac >= to_frac {
        let k = from_frac - to_frac;
        if k >= 127 {
            if raw < 0 {
                -1
            } else {
                0
            }
        } else {
            raw >> k
        }
    } else {
        let k = to_frac - from_frac;
        let overflow = if raw < 0 { i128::MIN } else { i128::MAX };
        if raw == 0 {
            0
        } else if k >= 127 {
            overflow
        } else {
            raw.checked_mul(1i128 << k).unwrap_or(overflow)
        }
    }
}

/// A fixed-point scalar: `raw * 2^-frac_bits`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fx {
    raw: i64,
    fmt: QFormat,
}

impl Fx {
    pub fn zero(fmt: QFormat) -> Self {
        Fx { raw: 0, fmt }
    }

    /// Round-to-nearest-even, then saturate. NaN maps to zero.
    pub fn from_real(v: f64, fmt: QFormat) -> Self {
        let scaled = (v * (fmt.frac_bits as f64).exp2()).round_ties_even();
        Fx {
            raw: fmt.clamp(scaled as i128),
            fmt,
        }
    }

    pub fn from_raw(raw: i64, fmt: QFormat) -> Result<Self> {
        if fmt.contains(raw as i128) {
            Ok(Fx { raw, fmt })
        } else {
            Err(Error::InvalidFormat(format!(
                "raw value {raw} does not fit {fmt}"
            )))
        }
    }

    pub fn from_raw_saturating(raw: i128, fmt: QFormat) -> Self {
        Fx {
            raw: fmt.clamp(raw),
            fmt,
        }
    }

    pub fn raw(self) -> i64 {
        self.raw
    }

    pub fn fmt(self) -> QFormat {
        self.fmt
    }

    pub fn to_real(self) -> f64 {
        self.raw as f64 * self.fmt.quantum()
    }

    pub fn max(fmt: QFormat) -> Self {
        Fx {
            raw: fmt.max_raw(),
            fmt,
        }
    }

    pub fn min(fmt: QFormat) -> Self {
        Fx {
            raw: fmt.min_raw(),
            fmt,
        }
    }

    fn check_fmt(self, rhs: Fx) -> Result<()> {
        if self.fmt == rhs.fmt {
            Ok(())
        } else {
            Err(Error::FormatMismatch {
                lhs: self.fmt,
                rhs: rhs.fmt,
            })
        }
    }

    pub fn sat_add(self, rhs: Fx) -> Result<Fx> {
        self.check_fmt(rhs)?;
        Ok(Fx::from_raw_saturating(
            self.raw as i128 + rhs.raw as i128,
            self.fmt,
        ))
    }

    pub fn sat_sub(self, rhs: Fx) -> Result<Fx> {
        self.check_fmt(rhs)?;
        Ok(Fx::from_raw_saturating(
            self.raw as i128 - rhs.raw as i128,
            self.fmt,
        ))
    }

    pub fn sat_neg(self) -> Fx {
        Fx::from_raw_saturating(-(self.raw as i128), self.fmt)
    }

    /// Full-width product narrowed to `out` by flooring, saturating.
    pub fn mul(self, rhs: Fx, out: QFormat) -> Fx {
        let mut acc = Acc::for_product(self.fmt, rhs.fmt);
        acc.mac(self, rhs);
        acc.narrow(out)
    }

    /// Arithmetic right shift (floor division by `2^k`).
    #[allow(clippy::should_implement_trait)]
    pub fn shr(self, k: u32) -> Result<Fx> {
        if k >= self.fmt.word_bits {
            return Err(Error::ShiftOutOfRange {
                shift: k,
                word_bits: self.fmt.word_bits,
            });
        }
        Ok(Fx {
            raw: self.raw >> k,
            fmt: self.fmt,
        })
    }

    /// Requantize into another format: exact when widening, floor when
    /// dropping fraction bits, saturating on range loss.
    pub fn convert(self, out: QFormat) -> Fx {
        Fx::from_raw_saturating(
            rescale(self.raw as i128, self.fmt.frac_bits, out.frac_bits),
            out,
        )
    }

    pub fn is_negative(self) -> bool {
        self.raw < 0
    }
}

impl fmt::Display for Fx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({} raw {})", self.to_real(), self.fmt, self.raw)
    }
}

/// Wide accumulator behind a multiplier: holds exact products and sums,
/// saturating at `acc_bits`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Acc {
    raw: i128,
    acc_bits: u32,
    frac_bits: u32,
}

impl Acc {
    pub fn new(acc_bits: u32, frac_bits: u32) -> Result<Self> {
        if !(2..=128).contains(&acc_bits) || frac_bits + 1 > acc_bits {
            return Err(Error::InvalidFormat(format!(
                "accumulator {acc_bits} bits with {frac_bits} fraction bits"
            )));
        }
        Ok(Acc {
            raw: 0,
            acc_bits,
            frac_bits,
        })
    }

    /// An accumulator exactly wide enough for one product of `a` and `b`.
    pub fn for_product(a: QFormat, b: QFormat) -> Self {
        Acc {
            raw: 0,
            acc_bits: a.word_bits + b.word_bits,
            frac_bits: a.frac_bits + b.frac_bits,
        }
    }

    pub fn acc_bits(self) -> u32 {
        self.acc_bits
    }

    pub fn frac_bits(self) -> u32 {
        self.frac_bits
    }

    pub fn raw(self) -> i128 {
        self.raw
    }

    fn bounds(self) -> (i128, i128) {
        if self.acc_bits >= 128 {
            (i128::MIN, i128::MAX)
        } else {
            let hi = (1i128 << (self.acc_bits - 1)) - 1;
            (-hi - 1, hi)
        }
    }

    fn set(&mut self, raw: i128) {
        let (lo, hi) = self.bounds();
        self.raw = raw.clamp(lo, hi);
    }

    pub fn clear(&mut self) {
        self.raw = 0;
    }

    /// Load a constant with round-to-nearest-even.
    pub fn load_real(&mut self, v: f64) {
        let scaled = (v * (self.frac_bits as f64).exp2()).round_ties_even();
        self.set(scaled as i128);
    }

    pub fn load(&mut self, v: Fx) {
        self.set(rescale(v.raw as i128, v.fmt.frac_bits, self.frac_bits));
    }

    /// `acc += a * b`, the product formed at full width first.
    pub fn mac(&mut self, a: Fx, b: Fx) {
        let prod = a.raw as i128 * b.raw as i128;
        let aligned = rescale(prod, a.fmt.frac_bits + b.fmt.frac_bits, self.frac_bits);
        self.set(self.raw.saturating_add(aligned));
    }

    pub fn add(&mut self, v: Fx) {
        let aligned = rescale(v.raw as i128, v.fmt.frac_bits, self.frac_bits);
        self.set(self.raw.saturating_add(aligned));
    }

    pub fn narrow(self, out: QFormat) -> Fx {
        Fx::from_raw_saturating(rescale(self.raw, self.frac_bits, out.frac_bits), out)
    }

    pub fn to_real(self) -> f64 {
        self.raw as f64 * (-(self.frac_bits as f64)).exp2()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(v: f64, fmt: QFormat) -> Fx {
        Fx::from_real(v, fmt)
    }

    #[test]
    fn format_validation() {
        assert!(QFormat::new(16, 15).is_ok());
        assert!(QFormat::new(16, 16).is_err());
        assert!(QFormat::new(7, 0).is_err());
        assert!(QFormat::new(65, 10).is_err());
        assert_eq!(QFormat::Q1_15.max_raw(), 32767);
        assert_eq!(QFormat::Q1_15.min_raw(), -32768);
        assert_eq!(QFormat::Q2_62.max_raw(), i64::MAX);
    }

    #[test]
    fn format_display_and_parse() {
        assert_eq!(QFormat::Q8_24.to_string(), "Q8.24");
        assert_eq!("Q1.15".parse::<QFormat>().unwrap(), QFormat::Q1_15);
        assert!("8.24".parse::<QFormat>().is_err());
        assert!("Q0.8".parse::<QFormat>().is_err());
    }

    #[test]
    fn from_real_examples() {
        assert_eq!(q(0.5, QFormat::Q1_15).raw(), 0x4000);
        assert_eq!(q(0.0, QFormat::Q8_24).raw(), 0);
        assert_eq!(q(2.0, QFormat::Q1_15).raw(), 0x7FFF);
        assert_eq!(q(-7.0, QFormat::Q1_15).raw(), -0x8000);
        assert_eq!(q(f64::NAN, QFormat::Q1_15).raw(), 0);
        // ties go to even
        assert_eq!(q(1.5 / 32768.0, QFormat::Q1_15).raw(), 2);
        assert_eq!(q(2.5 / 32768.0, QFormat::Q1_15).raw(), 2);
    }

    #[test]
    fn add_sub_examples() {
        let f = QFormat::Q1_15;
        assert_eq!(q(0.25, f).sat_add(q(0.25, f)).unwrap().raw(), 16384);
        assert_eq!(q(0.9, f).sat_add(q(0.9, f)).unwrap().raw(), 0x7FFF);
        assert_eq!(q(-0.9, f).sat_sub(q(0.9, f)).unwrap().raw(), -0x8000);
        let g = QFormat::Q8_24;
        assert_eq!(q(1.0, g).sat_sub(q(1.0, g)).unwrap().raw(), 0);
    }

    #[test]
    fn mismatched_formats_are_rejected() {
        let e = q(0.5, QFormat::Q1_15).sat_add(q(0.5, QFormat::Q8_24));
        assert!(matches!(e, Err(Error::FormatMismatch { .. })));
    }

    #[test]
    fn mul_examples() {
        let f = QFormat::Q1_15;
        assert_eq!(q(0.5, f).mul(q(0.5, f), f).raw(), 8192);
        assert_eq!(q(-0.5, f).mul(q(0.5, f), f).to_real(), -0.25);
        let g = QFormat::Q8_24;
        assert_eq!(q(1.5, g).mul(q(2.0, g), g).to_real(), 3.0);
        // truncation toward -inf on the dropped bits
        let tiny = Fx::from_raw(1, f).unwrap();
        assert_eq!(tiny.mul(q(0.5, f), f).raw(), 0);
        assert_eq!(tiny.sat_neg().mul(q(0.5, f), f).raw(), -1);
        // -1 * -1 overflows Q1.15 and saturates
        assert_eq!(Fx::min(f).mul(Fx::min(f), f).raw(), 0x7FFF);
    }

    #[test]
    fn shr_examples() {
        let f = QFormat::Q1_15;
        assert_eq!(Fx::from_raw(16384, f).unwrap().shr(1).unwrap().raw(), 8192);
        assert_eq!(Fx::from_raw(-1, f).unwrap().shr(1).unwrap().raw(), -1);
        assert_eq!(Fx::from_raw(3, f).unwrap().shr(2).unwrap().raw(), 0);
        assert!(matches!(
            Fx::from_raw(3, f).unwrap().shr(16),
            Err(Error::ShiftOutOfRange { .. })
        ));
    }

    #[test]
    fn accumulator_holds_one_and_saturates() {
        let mut acc = Acc::new(36, 30).unwrap();
        acc.load_real(1.0);
        assert_eq!(acc.to_real(), 1.0);
        acc.load_real(1e6);
        assert_eq!(acc.raw(), (1i128 << 35) - 1);
        assert!(Acc::new(36, 36).is_err());
    }

    #[test]
    fn convert_widens_exactly_and_narrows_by_floor() {
        let v = q(0.123456789, QFormat::Q8_24);
        let wide = v.convert(QFormat::Q2_62);
        assert_eq!(wide.to_real(), v.to_real());
        let back = Fx::from_raw(-3, QFormat::Q8_24).unwrap().convert(QFormat::Q1_15);
        assert_eq!(back.raw(), -1);
        assert_eq!(q(100.0, QFormat::Q8_24).convert(QFormat::Q1_15).raw(), 0x7FFF);
    }

    fn formats() -> impl Strategy<Value = QFormat> {
        (8u32..=64).prop_flat_map(|w| (Just(w), 0..w)).prop_map(|(w, f)| QFormat::new(w, f).unwrap())
    }

    proptest! {
        #[test]
        fn round_trip_within_half_quantum(fmt in formats(), t in 0.0f64..1.0) {
            let v = fmt.min_real() + t * (fmt.max_real() - fmt.min_real());
            let back = Fx::from_real(v, fmt).to_real();
            // f64 carries 53 bits; wide words lose low bits in to_real
            let slack = v.abs() * f64::EPSILON * 2.0;
            prop_assert!((back - v).abs() <= fmt.quantum() / 2.0 + slack);
        }

        #[test]
        fn add_sub_match_clamped_wide_oracle(fmt in formats(), a in any::<i64>(), b in any::<i64>()) {
            let a = Fx::from_raw_saturating(a as i128, fmt);
            let b = Fx::from_raw_saturating(b as i128, fmt);
            let lo = fmt.min_raw() as i128;
            let hi = fmt.max_raw() as i128;
            let sum = a.sat_add(b).unwrap().raw() as i128;
            let diff = a.sat_sub(b).unwrap().raw() as i128;
            prop_assert_eq!(sum, (a.raw() as i128 + b.raw() as i128).clamp(lo, hi));
            prop_assert_eq!(diff, (a.raw() as i128 - b.raw() as i128).clamp(lo, hi));
        }

        #[test]
        fn mul_floor_within_one_quantum(a in -1.0f64..1.0, b in -1.0f64..1.0) {
            let f = QFormat::Q8_24;
            let (fa, fb) = (Fx::from_real(a, f), Fx::from_real(b, f));
            let p = fa.mul(fb, f);
            let exact = fa.to_real() * fb.to_real();
            let err = exact - p.to_real();
            prop_assert!((0.0..f.quantum()).contains(&err), "err {}", err);
        }

        #[test]
        fn mul_result_in_range(fmt in formats(), a in any::<i64>(), b in any::<i64>()) {
            let a = Fx::from_raw_saturating(a as i128, fmt);
            let b = Fx::from_raw_saturating(b as i128, fmt);
            let p = a.mul(b, fmt);
            prop_assert!(p.raw() >= fmt.min_raw() && p.raw() <= fmt.max_raw());
        }

        #[test]
        fn shr_is_floor_division(raw in -32768i64..32768, k in 0u32..16) {
            let v = Fx::from_raw(raw, QFormat::Q1_15).unwrap();
            let expected = (raw as f64 / (k as f64).exp2()).floor() as i64;
            prop_assert_eq!(v.shr(k).unwrap().raw(), expected);
        }
    }
}
