//! Quarter-wave sine table backend.
//!
//! `n` entries sample `sin` on `[0, π/2)` at spacing `h = (π/2)/n`; index `n`
//! is an implicit guard entry holding `1.0`, so the cosine side of every
//! quadrant is read from the same table at `n − t`. Interpolation runs on
//! the raw entries in integer arithmetic.

use std::f64::consts::FRAC_PI_2;
use std::io::{Read, Write};

use crate::dh::{chain_pose_with, DhChain, Hmat};
use crate::error::{Error, Result};
use crate::fixedpoint::{Fx, QFormat};

/// Low part of π/2 for two-step argument reduction.
const PI_2_LO: f64 = 6.123_233_995_736_766e-17;
const MAGIC: &[u8; 6] = b"FKLUT1";
/// Angles in one [`error_profile`] scan.
pub const PROFILE_SAMPLES: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Interp {
    Nearest,
    Linear,
}

impl Interp {
    fn code(self) -> u8 {
        match self {
            Interp::Nearest => 0,
            Interp::Linear => 1,
        }
    }

    fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(Interp::Nearest),
            1 => Some(Interp::Linear),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SinTable {
    fmt: QFormat,
    mode: Interp,
    values: Vec<Fx>,
}

pub fn build_table(n_entries: usize, fmt: QFormat, mode: Interp) -> Result<SinTable> {
    if n_entries < 2 || !n_entries.is_power_of_two() || n_entries > u32::MAX as usize {
        return Err(Error::TableSize(n_entries));
    }
    let h = FRAC_PI_2 / n_entries as f64;
    let values = (0..n_entries)
        .map(|k| Fx::from_real((k as f64 * h).sin(), fmt))
        .collect();
    Ok(SinTable { fmt, mode, values })
}

impl SinTable {
    pub fn n_entries(&self) -> usize {
        self.values.len()
    }

    pub fn fmt(&self) -> QFormat {
        self.fmt
    }

    pub fn mode(&self) -> Interp {
        self.mode
    }

    pub fn values(&self) -> &[Fx] {
        &self.values
    }

    pub fn with_mode(mut self, mode: Interp) -> Self {
        self.mode = mode;
        self
    }

    /// Entry `k`, with the guard `1.0` at `k = n`.
    fn entry(&self, k: usize) -> i64 {
        match self.values.get(k) {
            Some(v) => v.raw(),
            None => Fx::from_real(1.0, self.fmt).raw(),
        }
    }

    /// `sin(t·h)` for a table position `t ∈ [0, n]`.
    fn at(&self, t: f64) -> Fx {
        let n = self.n_entries();
        let raw = match self.mode {
            Interp::Nearest => self.entry(((t + 0.5).floor() as usize).min(n)),
            Interp::Linear => {
                let k = (t.floor() as usize).min(n - 1);
                let f = t - k as f64;
                let (lo, hi) = (self.entry(k), self.entry(k + 1));
                // fraction carried with 60 bits; the product fits in i128
                let fi = (f * (1u64 << 60) as f64).round() as i128;
                let d = (hi - lo) as i128 * fi;
                (lo as i128 + (d >> 60)) as i64
            }
        };
        Fx::from_raw_saturating(raw as i128, self.fmt)
    }
}

/// Reduce `a ≥ 0` to `(quadrant mod 4, r)` with `r ∈ [0, π/2)`.
fn reduce(a: f64) -> (u64, f64) {
    let mut q = (a / FRAC_PI_2).floor();
    let mut r = (a - q * FRAC_PI_2) - q * PI_2_LO;
    if r < 0.0 {
        q -= 1.0;
        r += FRAC_PI_2;
    } else if r >= FRAC_PI_2 {
        q += 1.0;
        r -= FRAC_PI_2;
    }
    ((q.rem_euclid(4.0)) as u64, r.max(0.0))
}

/// `(cos θ, sin θ)` from the table, in the table format.
pub fn lut_sincos(theta: f64, table: &SinTable) -> (Fx, Fx) {
    let n = table.n_entries() as f64;
    let (q, r) = reduce(theta.abs());
    let t = (r * (n / FRAC_PI_2)).min(n);
    let s = table.at(t);
    let c = table.at(n - t);
    let (cos, sin) = match q {
        0 => (c, s),
        1 => (s.sat_neg(), c),
        2 => (c.sat_neg(), s.sat_neg()),
        _ => (s, c.sat_neg()),
    };
    if theta < 0.0 {
        (cos, sin.sat_neg())
    } else {
        (cos, sin)
    }
}

/// Real-valued convenience wrapper around [`lut_sincos`].
pub fn lut_sincos_real(theta: f64, table: &SinTable) -> (f64, f64) {
    let (c, s) = lut_sincos(theta, table);
    (c.to_real(), s.to_real())
}

/// Chain pose with table trig in every link matrix; the matrix products run
/// in double precision.
pub fn lut_fk_pose(c: &DhChain<f64>, table: &SinTable) -> Result<Hmat<f64>> {
    chain_pose_with(c, |x| lut_sincos_real(x, table))
}

/// Max and RMS error of table sin and cos against double trig over
/// [`PROFILE_SAMPLES`] uniform angles on `[0, 2π)`.
pub fn error_profile(table: &SinTable) -> (f64, f64) {
    let step = 4.0 * FRAC_PI_2 / PROFILE_SAMPLES as f64;
    let (max, sq) = (0..PROFILE_SAMPLES).fold((0.0f64, 0.0f64), |(max, sq), k| {
        let th = k as f64 * step;
        let (c, s) = lut_sincos_real(th, table);
        let (es, ec) = ((s - th.sin()).abs(), (c - th.cos()).abs());
        (max.max(es).max(ec), sq + es * es + ec * ec)
    });
    (max, (sq / (2 * PROFILE_SAMPLES) as f64).sqrt())
}

/// Serialize in the FKLUT1 layout: magic, `n_entries` (u32 LE), word bits,
/// frac bits, mode (u8 each), then each entry little-endian in
/// `ceil(word_bits / 8)` bytes.
pub fn dump_table<W: Write>(table: &SinTable, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(table.n_entries() as u32).to_le_bytes())?;
    w.write_all(&[
        table.fmt.word_bits() as u8,
        table.fmt.frac_bits() as u8,
        table.mode.code(),
    ])?;
    let width = table.fmt.word_bits().div_ceil(8) as usize;
    for v in &table.values {
        w.write_all(&v.raw().to_le_bytes()[..width])?;
    }
    Ok(())
}

pub fn load_table<R: Read>(mut r: R) -> Result<SinTable> {
    let bad = |m: &str| Error::Config(format!("malformed FKLUT1 table: {m}"));
    let mut head = [0u8; 13];
    r.read_exact(&mut head).map_err(|_| bad("truncated header"))?;
    if &head[..6] != MAGIC {
        return Err(bad("bad magic"));
    }
    let n = u32::from_le_bytes(head[6..10].try_into().expect("4 bytes")) as usize;
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::TableSize(n));
    }
    let fmt = QFormat::new(head[10] as u32, head[11] as u32)?;
    let mode = Interp::from_code(head[12]).ok_or_else(|| bad("unknown mode"))?;
    let width = fmt.word_bits().div_ceil(8) as usize;
    let shift = 64 - 8 * width as u32;
    let mut buf = [0u8; 8];
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        buf.fill(0);
        r.read_exact(&mut buf[..width]).map_err(|_| bad("truncated entries"))?;
        // sign-extend from the stored width
        let raw = (i64::from_le_bytes(buf) << shift) >> shift;
        values.push(Fx::from_raw(raw, fmt)?);
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(bad("trailing bytes"));
    }
    Ok(SinTable { fmt, mode, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dh::{chain_pose, DhJoint};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};

    fn table(n: usize, mode: Interp) -> SinTable {
        build_table(n, QFormat::Q2_62, mode).unwrap()
    }

    #[test]
    fn two_entry_table() {
        let t = table(2, Interp::Nearest);
        let v: Vec<f64> = t.values().iter().map(|v| v.to_real()).collect();
        assert_eq!(v[0], 0.0);
        assert!((v[1] - FRAC_PI_4.sin()).abs() < 1e-18);
    }

    #[test]
    fn size_validation() {
        for n in [0, 1, 3, 1000] {
            assert_eq!(
                build_table(n, QFormat::Q2_62, Interp::Linear),
                Err(Error::TableSize(n))
            );
        }
    }

    #[test]
    fn deterministic_and_increasing() {
        let a = table(1024, Interp::Linear);
        assert_eq!(a, table(1024, Interp::Linear));
        assert!(a.values().windows(2).all(|w| w[0].raw() < w[1].raw()));
    }

    #[test]
    fn special_angles() {
        for mode in [Interp::Nearest, Interp::Linear] {
            let t = table(1024, mode);
            assert_eq!(lut_sincos_real(0.0, &t), (1.0, 0.0));
            // π itself is off by ~1e-16, far above a Q2.62 quantum
            let t30 = build_table(1024, QFormat::Q2_30, mode).unwrap();
            let (c, s) = lut_sincos_real(PI, &t30);
            let q = t30.fmt().quantum();
            assert!((c + 1.0).abs() <= q && s.abs() <= q);
        }
        let (c, s) = lut_sincos_real(FRAC_PI_4, &table(1024, Interp::Linear));
        assert!((c - FRAC_1_SQRT_2).abs() < 3e-6 && (s - FRAC_1_SQRT_2).abs() < 3e-6);
    }

    #[test]
    fn nearest_bound_and_small_table_floor() {
        let (max, rms) = error_profile(&table(2, Interp::Nearest));
        assert!(max > 0.2 && max <= FRAC_PI_2 / 2.0, "{max}");
        assert!(rms < max);
        let (max, _) = error_profile(&table(256, Interp::Nearest));
        assert!(max <= FRAC_PI_2 / 256.0);
    }

    #[test]
    fn linear_bound() {
        let h = FRAC_PI_2 / 256.0;
        let (max, _) = error_profile(&table(256, Interp::Linear));
        assert!(max <= h * h / 8.0, "{max}");
    }

    #[test]
    fn doubling_shrinks_error() {
        let lin = |n| error_profile(&table(n, Interp::Linear)).0;
        let near = |n| error_profile(&table(n, Interp::Nearest)).0;
        let (l1, l2) = (lin(64), lin(128));
        assert!(l1 / l2 > 3.5, "linear ratio {}", l1 / l2);
        let (n1, n2) = (near(64), near(128));
        assert!(n1 / n2 > 1.8, "nearest ratio {}", n1 / n2);
    }

    #[test]
    fn zero_chain_is_identity() {
        let c = DhChain::new(vec![DhJoint::rotary(0.0, 0.0, 0.0, 0.0); 3]);
        let pose = lut_fk_pose(&c, &table(64, Interp::Nearest)).unwrap();
        assert_eq!(pose, Hmat::identity());
        assert_eq!(lut_fk_pose(&DhChain::new(vec![]), &table(64, Interp::Nearest)), Err(Error::EmptyChain));
    }

    #[test]
    fn random_chain_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let t = table(4096, Interp::Linear);
        for _ in 0..50 {
            let c = DhChain::new(
                (0..6)
                    .map(|_| {
                        DhJoint::rotary(
                            rng.gen_range(-PI..PI),
                            rng.gen_range(-0.5..0.5),
                            rng.gen_range(-0.5..0.5),
                            rng.gen_range(-PI..PI),
                        )
                    })
                    .collect(),
            );
            let got = lut_fk_pose(&c, &t).unwrap();
            assert!(got.max_abs_diff(&chain_pose(&c).unwrap()) < 1e-5);
        }
    }

    #[test]
    fn dump_load_round_trip() {
        for fmt in [QFormat::Q1_15, QFormat::Q2_30, QFormat::Q2_62, QFormat::new(12, 10).unwrap()] {
            let t = build_table(32, fmt, Interp::Linear).unwrap();
            let mut bytes = Vec::new();
            dump_table(&t, &mut bytes).unwrap();
            assert_eq!(&bytes[..6], b"FKLUT1");
            let width = fmt.word_bits().div_ceil(8) as usize;
            assert_eq!(bytes.len(), 13 + 32 * width);
            assert_eq!(load_table(&bytes[..]).unwrap(), t);
        }
    }

    #[test]
    fn load_rejects_garbage() {
        let t = table(8, Interp::Nearest);
        let mut bytes = Vec::new();
        dump_table(&t, &mut bytes).unwrap();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(load_table(&bad[..]).is_err());
        assert!(load_table(&bytes[..bytes.len() - 1]).is_err());
        let mut long = bytes.clone();
        long.push(0);
        assert!(load_table(&long[..]).is_err());
        let mut odd = bytes;
        odd[6] = 3;
        assert_eq!(load_table(&odd[..]), Err(Error::TableSize(3)));
    }

    proptest! {
        #[test]
        fn sin_is_odd_bit_exact(th in -100.0f64..100.0, linear in any::<bool>()) {
            let t = table(256, if linear { Interp::Linear } else { Interp::Nearest });
            let (cp, sp) = lut_sincos(th, &t);
            let (cn, sn) = lut_sincos(-th, &t);
            prop_assert_eq!(sn, sp.sat_neg());
            prop_assert_eq!(cn, cp);
        }

        #[test]
        fn pythagorean_drift(th in -10.0f64..10.0) {
            let t = table(256, Interp::Nearest);
            let bound = FRAC_PI_2 / 256.0;
            let (c, s) = lut_sincos_real(th, &t);
            prop_assert!((c * c + s * s - 1.0).abs() <= 4.0 * bound);
        }

        #[test]
        fn error_within_linear_bound(th in -10.0f64..10.0) {
            let t = table(1024, Interp::Linear);
            let h = FRAC_PI_2 / 1024.0;
            let (c, s) = lut_sincos_real(th, &t);
            prop_assert!((s - th.sin()).abs() <= h * h / 8.0);
            prop_assert!((c - th.cos()).abs() <= h * h / 8.0);
        }
    }
}
