//! Two-stage CORDIC computational module (CCM) and the n-link cascade.
//!
//! A CCM maps a vector from frame `i` to frame `i-1` with four CORDIC
//! processors. Stage 1 applies `Tran(x, a)·Rot(x, α)`:
//!
//! ```text
//! CIRC1 (y, z; α)  -> y_A = y cos α − z sin α,  z_A = z cos α + y sin α
//! LIN1  (1, a; x)  -> x_A = x + a
//! ```
//!
//! Stage 2 applies `Tran(z, d)·Rot(z, θ)`:
//!
//! ```text
//! CIRC1 (x_A, y_A; θ) -> x' = x_A cos θ − y_A sin θ,  y' = y_A cos θ + x_A sin θ
//! LIN1  (1, d; z_A)   -> z' = z_A + d
//! ```
//!
//! The two processors of a stage read only that stage's inputs.

use crate::cordic::{cordic_rotate, fold_half_turn, gain, CordicConfig, CordicMode};
use crate::dh::{DhChain, DhJoint, Hmat, Vec4};
use crate::error::{Error, Result};
use crate::fixedpoint::Fx;
use crate::Real;

/// Default delay of one CCM stage.
pub const STAGE_TIME_US: f64 = 40.0;
/// Fixed pipeline overhead.
pub const OVERHEAD_US: f64 = 120.0;
/// CORDIC processors per link.
pub const PROCESSORS_PER_LINK: usize = 4;

/// A vector on the fixed-point datapath. `point` selects `w = 1`; free
/// vectors (`w = 0`) skip the translation terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FxVec {
    pub x: Fx,
    pub y: Fx,
    pub z: Fx,
    pub point: bool,
}

impl FxVec {
    pub fn quantize(p: Vec4<f64>, cfg: &CordicConfig) -> Result<Self> {
        let point = if p.w == 1.0 {
            true
        } else if p.w == 0.0 {
            false
        } else {
            return Err(Error::Domain(format!("w must be 0 or 1, got {}", p.w)));
        };
        let q = |v: f64| Fx::from_real(v, cfg.fmt);
        Ok(FxVec {
            x: q(p.x),
            y: q(p.y),
            z: q(p.z),
            point,
        })
    }

    pub fn to_vec4(self) -> Vec4<f64> {
        Vec4 {
            x: self.x.to_real(),
            y: self.y.to_real(),
            z: self.z.to_real(),
            w: if self.point { 1.0 } else { 0.0 },
        }
    }
}

/// Stage-1 outputs `(x_A, y_A, z_A)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Intermediates {
    pub x_a: Fx,
    pub y_a: Fx,
    pub z_a: Fx,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CcmResult {
    pub p_out: Vec4<f64>,
    pub intermediates: Intermediates,
}

/// Circular rotation processor: rotates `(x0, y0)` by `angle` with the gain
/// pre-compensated. Angles beyond ±π/2 are folded by a half-turn, which
/// negates the result exactly.
pub fn circ1(x0: Fx, y0: Fx, angle: f64, cfg: &CordicConfig) -> Result<(Fx, Fx)> {
    let fmt = cfg.fmt;
    let (r, negate) = fold_half_turn(angle);
    let inv_k = Fx::from_real(1.0 / gain::<f64>(cfg.n_iter, CordicMode::Circular), fmt);
    let (x, y, _) = cordic_rotate(
        x0.mul(inv_k, fmt),
        y0.mul(inv_k, fmt),
        Fx::from_real(r, fmt),
        CordicMode::Circular,
        cfg,
    )?;
    Ok(if negate {
        (x.sat_neg(), y.sat_neg())
    } else {
        (x, y)
    })
}

/// Linear processor in the `y0 + x0·z0` configuration with `x0 = 1`:
/// returns `offset + value`.
pub fn lin1(offset: Fx, value: Fx, cfg: &CordicConfig) -> Result<Fx> {
    let one = Fx::from_real(1.0, cfg.fmt);
    let (_, y, _) = cordic_rotate(one, offset, value, CordicMode::Linear, cfg)?;
    Ok(y)
}

/// One CCM on the fixed-point datapath.
pub fn ccm_transform_fx(
    j: &DhJoint<f64>,
    v: FxVec,
    cfg: &CordicConfig,
) -> Result<(FxVec, Intermediates)> {
    let fmt = cfg.fmt;
    let zero = Fx::zero(fmt);
    let (a, d) = if v.point {
        (Fx::from_real(j.effective_a(), fmt), Fx::from_real(j.d, fmt))
    } else {
        (zero, zero)
    };

    // stage 1
    let (y_a, z_a) = circ1(v.y, v.z, j.alpha, cfg)?;
    let x_a = lin1(a, v.x, cfg)?;
    // stage 2
    let (x, y) = circ1(x_a, y_a, j.theta, cfg)?;
    let z = lin1(d, z_a, cfg)?;

    Ok((
        FxVec {
            x,
            y,
            z,
            point: v.point,
        },
        Intermediates { x_a, y_a, z_a },
    ))
}

/// `P_{i-1} = i-1A_i · P_i` through one CCM.
pub fn ccm_transform(j: &DhJoint<f64>, p: Vec4<f64>, cfg: &CordicConfig) -> Result<CcmResult> {
    let (out, intermediates) = ccm_transform_fx(j, FxVec::quantize(p, cfg)?, cfg)?;
    Ok(CcmResult {
        p_out: out.to_vec4(),
        intermediates,
    })
}

/// The same two-step transform in exact arithmetic; returns the
/// intermediate vector and the output.
pub fn two_step_real<T: Real>(j: &DhJoint<T>, p: Vec4<T>) -> (Vec4<T>, Vec4<T>) {
    let (sa, ca) = j.alpha.sin_cos();
    let (st, ct) = j.theta.sin_cos();
    let mid = Vec4 {
        x: p.x + j.effective_a() * p.w,
        y: p.y * ca - p.z * sa,
        z: p.z * ca + p.y * sa,
        w: p.w,
    };
    let out = Vec4 {
        x: mid.x * ct - mid.y * st,
        y: mid.y * ct + mid.x * st,
        z: mid.z + j.d * p.w,
        w: p.w,
    };
    (mid, out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineModel {
    pub n_links: usize,
    pub stage_time_us: f64,
    pub overhead_us: f64,
}

impl PipelineModel {
    pub fn new(n_links: usize, stage_time_us: f64, overhead_us: f64) -> Result<Self> {
        if n_links == 0 {
            return Err(Error::Config("pipeline needs at least one link".into()));
        }
        if !(stage_time_us > 0.0) || !(overhead_us >= 0.0) {
            return Err(Error::Config(format!(
                "stage time {stage_time_us} µs and overhead {overhead_us} µs must be positive"
            )));
        }
        Ok(PipelineModel {
            n_links,
            stage_time_us,
            overhead_us,
        })
    }

    pub fn with_links(n_links: usize) -> Result<Self> {
        Self::new(n_links, STAGE_TIME_US, OVERHEAD_US)
    }

    pub fn processors(&self) -> usize {
        PROCESSORS_PER_LINK * self.n_links
    }
}

/// Modeled computation time: two stages per link plus overhead.
pub fn latency_us(m: &PipelineModel) -> f64 {
    2.0 * m.stage_time_us * m.n_links as f64 + m.overhead_us
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencyReport {
    pub n_links: usize,
    pub processors: usize,
    pub latency_us: f64,
}

impl LatencyReport {
    pub fn for_links(n_links: usize) -> Result<Self> {
        let m = PipelineModel::with_links(n_links)?;
        Ok(LatencyReport {
            n_links,
            processors: m.processors(),
            latency_us: latency_us(&m),
        })
    }
}

/// Push a fixed-point vector through links `n … 1`.
pub fn fk_pipeline_fx(c: &DhChain<f64>, v: FxVec, cfg: &CordicConfig) -> Result<FxVec> {
    if c.is_empty() {
        return Err(Error::EmptyChain);
    }
    c.joints
        .iter()
        .rev()
        .try_fold(v, |acc, j| ccm_transform_fx(j, acc, cfg).map(|(out, _)| out))
}

/// End-effector point expressed in the base frame.
pub fn fk_pipeline(
    c: &DhChain<f64>,
    p_end: Vec4<f64>,
    cfg: &CordicConfig,
) -> Result<(Vec4<f64>, LatencyReport)> {
    let out = fk_pipeline_fx(c, FxVec::quantize(p_end, cfg)?, cfg)?;
    Ok((out.to_vec4(), LatencyReport::for_links(c.len())?))
}

/// Full pose: the tool origin as a point and the three tool axes as free
/// vectors, each pushed through the same CCM cascade.
pub fn fk_pipeline_pose(c: &DhChain<f64>, cfg: &CordicConfig) -> Result<(Hmat<f64>, LatencyReport)> {
    let axes = [
        Vec4::direction(1.0, 0.0, 0.0),
        Vec4::direction(0.0, 1.0, 0.0),
        Vec4::direction(0.0, 0.0, 1.0),
        Vec4::origin(),
    ];
    let mut cols = [Vec4::default(); 4];
    for (col, v) in cols.iter_mut().zip(axes) {
        *col = fk_pipeline_fx(c, FxVec::quantize(v, cfg)?, cfg)?.to_vec4();
    }
    let pose = Hmat::from_rows([0, 1, 2].map(|r| {
        cols.map(|v| match r {
            0 => v.x,
            1 => v.y,
            _ => v.z,
        })
    }));
    Ok((pose, LatencyReport::for_links(c.len())?))
}
