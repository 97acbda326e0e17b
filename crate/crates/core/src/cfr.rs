//! Constant-factor redundant CORDIC (CFR-CORDIC) and the macro-PE pipeline.
//!
//! The recurrences carry a scaled residual angle `U[i] = 2^i · r[i]`:
//!
//! ```text
//! X[i+1] = X[i] + σ_i 2^-i Y[i]
//! Y[i+1] = Y[i] − σ_i 2^-i X[i]
//! U[i+1] = 2 (U[i] − σ_i 2^i atan 2^-i)
//! ```
//!
//! Each step rotates `(X, Y)` by `−σ_i·atan 2^-i`, and `σ_i` is never zero,
//! so the norm gain depends only on the iteration schedule.
//!
//! Redundant arithmetic is modeled by what it does to the selection: in
//! the first group of iterations the sign of `U` is read from a truncated
//! view of its fraction bits ([`selection`]). Wrong guesses near zero are
//! absorbed by correcting iterations (repeats of the first exact-group index)
//! whose count is fixed per policy, which keeps the scale factor constant.

use crate::cordic::{fold_half_turn, Sigma};
use crate::dh::{DhChain, DhJoint, Hmat, Vec4};
use crate::error::{Error, Result};
use crate::fixedpoint::{Fx, QFormat};
use crate::Real;

/// CFR triple in exact arithmetic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfrState<T> {
    pub x: T,
    pub y: T,
    pub u: T,
    pub i: i32,
}

/// CFR triple on the fixed-point datapath.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CfrFxState {
    pub x: Fx,
    pub y: Fx,
    pub u: Fx,
    pub i: i32,
}

fn pow2<T: Real>(k: i32) -> T {
    T::lit(2.0).powi(k)
}

/// One CFR step, exact recurrence.
pub fn cfr_step<T: Real>(s: CfrState<T>, sigma: Sigma) -> CfrState<T> {
    let sg = T::lit(sigma.value() as f64);
    let t = pow2::<T>(-s.i);
    let c = pow2::<T>(s.i) * t.atan();
    CfrState {
        x: s.x + sg * t * s.y,
        y: s.y - sg * t * s.x,
        u: T::lit(2.0) * (s.u - sg * c),
        i: s.i + 1,
    }
}

/// `2^i·atan 2^-i` quantized; the constant subtracted from `U`.
fn scaled_angle(i: i32, fmt: QFormat) -> Fx {
    Fx::from_real((i as f64).exp2() * (-(i as f64)).exp2().atan(), fmt)
}

/// One CFR step on fixed-point state.
pub fn cfr_step_fx(s: CfrFxState, sigma: Sigma) -> CfrFxState {
    let fmt = s.x.fmt();
    let k = (s.i.max(0) as u32).min(fmt.word_bits() - 1);
    let dy = s.y.shr(k).expect("clamped shift");
    let dx = s.x.shr(k).expect("clamped shift");
    let c = scaled_angle(s.i, fmt);
    let (x, y, r) = match sigma {
        Sigma::Plus => (s.x.sat_add(dy), s.y.sat_sub(dx), s.u.sat_sub(c)),
        Sigma::Minus => (s.x.sat_sub(dy), s.y.sat_add(dx), s.u.sat_add(c)),
    };
    let r = r.expect("CFR state shares one format");
    CfrFxState {
        x: x.expect("CFR state shares one format"),
        y: y.expect("CFR state shares one format"),
        u: Fx::from_raw_saturating(2 * r.raw() as i128, fmt),
        i: s.i + 1,
    }
}

/// Sign estimate of `U` from its top `w_frac` fraction bits, truncated
/// toward zero; an estimate of zero selects `+1`.
pub fn selection(u: Fx, w_frac: u32) -> Sigma {
    let f = u.fmt().frac_bits();
    let est = if w_frac >= f {
        u.raw()
    } else {
        let k = f - w_frac;
        let mag = u.raw().unsigned_abs() >> k;
        if u.raw() < 0 {
            -(mag as i128) as i64
        } else {
            mag as i64
        }
    };
    Sigma::sign_of(est < 0)
}

/// [`selection`] on a real-valued `U`.
pub fn selection_real<T: Real>(u: T, w_frac: u32) -> Sigma {
    Sigma::sign_of((u * pow2::<T>(w_frac as i32)).trunc() < T::zero())
}

/// How `σ_i` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelectionPolicy {
    /// Fraction bits visible to the estimate in the first group; `None`
    /// reads the exact sign everywhere.
    pub estimate_bits: Option<u32>,
    /// First index of the exact-selection group.
    pub split: u32,
}

impl SelectionPolicy {
    pub fn exact() -> Self {
        SelectionPolicy {
            estimate_bits: None,
            split: 0,
        }
    }

    pub fn two_group(estimate_bits: u32, split: u32) -> Result<Self> {
        if estimate_bits == 0 {
            return Err(Error::Config("sign estimate needs at least one fraction bit".into()));
        }
        Ok(SelectionPolicy {
            estimate_bits: Some(estimate_bits),
            split,
        })
    }
}

impl Default for SelectionPolicy {
    fn default() -> Self {
        Self::exact()
    }
}

/// One scheduled iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slot {
    pub index: i32,
    /// Estimate bits used for this slot, `None` for exact selection.
    pub estimate: Option<u32>,
}

fn atan_pow2(i: i32) -> f64 {
    (-(i as f64)).exp2().atan()
}

/// Iteration schedule for `n_iter` base iterations: the estimated group
/// `0..split`, then `r` correcting repeats of index `split`, then
/// `split..n_iter`. `r` is the smallest count for which every wrong guess
/// in the first group stays inside the remaining convergence range.
pub fn cfr_schedule(n_iter: u32, policy: &SelectionPolicy) -> Result<Vec<Slot>> {
    if n_iter == 0 {
        return Err(Error::Config("CFR-CORDIC needs at least one iteration".into()));
    }
    let n = n_iter as i32;
    let exact = |index| Slot {
        index,
        estimate: None,
    };
    let Some(w) = policy.estimate_bits else {
        return Ok((0..n).map(exact).collect());
    };
    let split = (policy.split as i32).min(n - 1);
    if split <= 0 {
        return Ok((0..n).map(exact).collect());
    }
    let base_tail: Vec<f64> = {
        // tail[i] = Σ_{k ≥ i} atan 2^-k + atan 2^-(n-1)
        let mut t = vec![atan_pow2(n - 1); (n + 1) as usize];
        for k in (0..n).rev() {
            t[k as usize] = t[k as usize + 1] + atan_pow2(k);
        }
        t
    };
    let deficit = (0..split)
        .map(|i| atan_pow2(i) + (-(w as f64) - i as f64).exp2() - base_tail[i as usize + 1])
        .fold(0.0f64, f64::max);
    let repeats = (deficit / atan_pow2(split)).ceil() as i32;
    let mut out: Vec<Slot> = (0..split)
        .map(|index| Slot {
            index,
            estimate: Some(w),
        })
        .collect();
    out.extend((0..repeats).map(|_| exact(split)));
    out.extend((split..n).map(exact));
    Ok(out)
}

/// Norm gain `K = Π √(1 + 2^-2i)` over a schedule.
pub fn schedule_gain<T: Real>(schedule: &[Slot]) -> T {
    schedule
        .iter()
        .fold(T::one(), |k, s| k * (T::one() + pow2::<T>(-2 * s.index)).sqrt())
}

fn schedule_range(schedule: &[Slot]) -> f64 {
    schedule.iter().map(|s| atan_pow2(s.index)).sum()
}

/// Exact-arithmetic run with a forced σ sequence; returns every state,
/// starting with the initial one. Used to study the recurrence itself.
pub fn cfr_trajectory<T: Real>(x0: T, y0: T, angle: T, sigmas: &[Sigma]) -> Vec<CfrState<T>> {
    let mut s = CfrState {
        x: x0,
        y: y0,
        u: angle,
        i: 0,
    };
    let mut out = vec![s];
    for &sg in sigmas {
        s = cfr_step(s, sg);
        out.push(s);
    }
    out
}

/// Replays a schedule in exact arithmetic, re-basing `U` when an index
/// repeats.
fn run_real<T: Real>(x0: T, y0: T, angle: T, schedule: &[Slot]) -> (T, T, T) {
    let (mut x, mut y) = (x0, y0);
    // residual angle r = U·2^-i, carried as U for the current slot index
    let mut u = angle;
    let mut idx = 0i32;
    for slot in schedule {
        // U is defined relative to the slot index
        u = u * pow2::<T>(slot.index - idx);
        idx = slot.index;
        let sigma = match slot.estimate {
            Some(w) => selection_real(u, w),
            None => Sigma::sign_of(u < T::zero()),
        };
        let s = cfr_step(CfrState { x, y, u, i: idx }, sigma);
        x = s.x;
        y = s.y;
        u = s.u;
        idx += 1;
    }
    (x, y, u * pow2::<T>(-idx))
}

/// `K·Rot(−angle)·(x0, y0)` in exact arithmetic. Also returns the final
/// residual angle.
pub fn cfr_rotate<T: Real>(
    x0: T,
    y0: T,
    angle: T,
    n_iter: u32,
    sel: &SelectionPolicy,
) -> Result<(T, T, T)> {
    let schedule = cfr_schedule(n_iter, sel)?;
    let range = schedule_range(&schedule);
    let a = angle.to_f64().unwrap_or(f64::NAN);
    if !(a.abs() <= range) {
        return Err(Error::Domain(format!(
            "CFR angle {a} outside convergence range {range:.6}"
        )));
    }
    Ok(run_real(x0, y0, angle, &schedule))
}

/// Fixed-point counterpart of [`cfr_rotate`].
pub fn cfr_rotate_fx(
    x0: Fx,
    y0: Fx,
    angle: f64,
    n_iter: u32,
    sel: &SelectionPolicy,
) -> Result<(Fx, Fx)> {
    let fmt = x0.fmt();
    if y0.fmt() != fmt {
        return Err(Error::FormatMismatch {
            lhs: fmt,
            rhs: y0.fmt(),
        });
    }
    let schedule = cfr_schedule(n_iter, sel)?;
    let range = schedule_range(&schedule);
    if !(angle.abs() <= range) {
        return Err(Error::Domain(format!(
            "CFR angle {angle} outside convergence range {range:.6}"
        )));
    }
    let mut s = CfrFxState {
        x: x0,
        y: y0,
        u: Fx::from_real(angle, fmt),
        i: 0,
    };
    for slot in &schedule {
        if slot.index < s.i {
            // repeated index: U is 2^i·r, re-base one level down
            let back = (s.i - slot.index) as u32;
            s.u = s.u.shr(back.min(fmt.word_bits() - 1)).expect("clamped shift");
            s.i = slot.index;
        }
        let sigma = match slot.estimate {
            Some(w) => selection(s.u, w),
            None => Sigma::sign_of(s.u.is_negative()),
        };
        s = cfr_step_fx(s, sigma);
    }
    Ok((s.x, s.y))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CfrConfig {
    pub n_iter: u32,
    pub fmt: QFormat,
    pub policy: SelectionPolicy,
}

impl Default for CfrConfig {
    fn default() -> Self {
        CfrConfig {
            n_iter: 24,
            fmt: QFormat::Q8_24,
            policy: SelectionPolicy::exact(),
        }
    }
}

/// Rotate `(p, q)` by `+angle` on the macro-PE: gain pre-compensated,
/// half-turns folded out.
fn macro_rotate(p: Fx, q: Fx, angle: f64, cfg: &CfrConfig) -> Result<(Fx, Fx)> {
    let fmt = cfg.fmt;
    let k: f64 = schedule_gain(&cfr_schedule(cfg.n_iter, &cfg.policy)?);
    let inv_k = Fx::from_real(1.0 / k, fmt);
    let (r, negate) = fold_half_turn(angle);
    let (x, y) = cfr_rotate_fx(p.mul(inv_k, fmt), q.mul(inv_k, fmt), -r, cfg.n_iter, &cfg.policy)?;
    Ok(if negate {
        (x.sat_neg(), y.sat_neg())
    } else {
        (x, y)
    })
}

/// `(x, y, z)` plus whether translations apply (`w = 1`).
type FxTriple = (Fx, Fx, Fx, bool);

fn macro_pe_fx(j: &DhJoint<f64>, (x, y, z, point): FxTriple, cfg: &CfrConfig) -> Result<FxTriple> {
    let fmt = cfg.fmt;
    let offset = |v: f64| {
        if point {
            Fx::from_real(v, fmt)
        } else {
            Fx::zero(fmt)
        }
    };
    // stage A: Rot(x, α) on the (y, z) block, Trans(x, a) on the (x, w) block
    let (ya, za) = macro_rotate(y, z, j.alpha, cfg)?;
    let xa = x.sat_add(offset(j.effective_a()))?;
    // stage B: Rot(z, θ) on the (x, y) block, Trans(z, d) on the (z, w) block
    let (xb, yb) = macro_rotate(xa, ya, j.theta, cfg)?;
    let zb = za.sat_add(offset(j.d))?;
    Ok((xb, yb, zb, point))
}

/// One joint through two cascaded macro-PEs.
pub fn macro_pe_apply(j: &DhJoint<f64>, p: Vec4<f64>, cfg: &CfrConfig) -> Result<Vec4<f64>> {
    let point = if p.w == 1.0 {
        true
    } else if p.w == 0.0 {
        false
    } else {
        return Err(Error::Domain(format!("w must be 0 or 1, got {}", p.w)));
    };
    let q = |v: f64| Fx::from_real(v, cfg.fmt);
    let (x, y, z, _) = macro_pe_fx(j, (q(p.x), q(p.y), q(p.z), point), cfg)?;
    Ok(Vec4 {
        x: x.to_real(),
        y: y.to_real(),
        z: z.to_real(),
        w: p.w,
    })
}

/// Full pose through a macro-PE cascade, one pass per tool axis and one
/// for the tool origin.
pub fn macro_pe_pose(c: &DhChain<f64>, cfg: &CfrConfig) -> Result<Hmat<f64>> {
    if c.is_empty() {
        return Err(Error::EmptyChain);
    }
    let one = Fx::from_real(1.0, cfg.fmt);
    let zero = Fx::zero(cfg.fmt);
    let inputs = [
        (one, zero, zero, false),
        (zero, one, zero, false),
        (zero, zero, one, false),
        (zero, zero, zero, true),
    ];
    let mut cols = [[0.0; 3]; 4];
    for (col, v) in cols.iter_mut().zip(inputs) {
        let (x, y, z, _) = c
            .joints
            .iter()
            .rev()
            .try_fold(v, |acc, j| macro_pe_fx(j, acc, cfg))?;
        *col = [x.to_real(), y.to_real(), z.to_real()];
    }
    Ok(Hmat::from_rows([0, 1, 2].map(|r| cols.map(|c| c[r]))))
}

/// Closed-form timing of a fully pipelined macro-PE array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacroPeModel {
    pub joints: usize,
    pub micro_stages: usize,
    pub stage_delay: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineTiming {
    /// Two macro-PEs per joint.
    pub macro_pes: usize,
    pub fill_latency: f64,
    /// Time between successive results once full.
    pub interval: f64,
    pub throughput: f64,
}

impl MacroPeModel {
    pub fn new(joints: usize, micro_stages: usize, stage_delay: f64) -> Result<Self> {
        if joints == 0 || micro_stages == 0 || !(stage_delay > 0.0) {
            return Err(Error::Config(format!(
                "macro-PE model needs positive counts and delay, got {joints}, {micro_stages}, {stage_delay}"
            )));
        }
        Ok(MacroPeModel {
            joints,
            micro_stages,
            stage_delay,
        })
    }
}

pub fn pipeline_timing(m: &MacroPeModel) -> PipelineTiming {
    let interval = m.micro_stages as f64 * m.stage_delay;
    PipelineTiming {
        macro_pes: 2 * m.joints,
        fill_latency: (2 * m.joints) as f64 * interval,
        interval,
        throughput: 1.0 / interval,
    }
}
