//! Scalar-operation counts and modeled latencies per backend.
//!
//! One operation is one add, subtract, multiply, shift, compare, negate,
//! table read or library trig call. Counts are analytic, derived from the
//! datapaths in this crate, so they are exact for a given configuration.

use crate::ccm::{latency_us, PipelineModel};
use crate::cfr::{cfr_schedule, pipeline_timing, CfrConfig, MacroPeModel};
use crate::cordic::CordicConfig;
use crate::lut::{Interp, SinTable};
use crate::taylor::TaylorConfig;
use crate::umdh::DEFAULT_CLOCK_MHZ;

/// DSP instruction cycle in microseconds.
pub const DSP_CYCLE_US: f64 = 0.06;

/// Filling one link matrix from `(cos θ, sin θ, cos α, sin α)`: six
/// products and two negations.
pub const LINK_BUILD_OPS: usize = 8;

/// Product of two homogeneous transforms with the constant bottom row
/// skipped: 36 multiplies, 27 adds.
pub const HMAT_PRODUCT_OPS: usize = 63;

/// Trig pair `(cos, sin)` by library calls.
pub const LIBRARY_SINCOS_OPS: usize = 2;

/// Ops for a chain whose link matrices come from `sincos_ops` per angle.
pub fn matrix_chain_ops(n_links: usize, sincos_ops: usize) -> usize {
    n_links * (2 * sincos_ops + LINK_BUILD_OPS) + n_links.saturating_sub(1) * HMAT_PRODUCT_OPS
}

/// Table `(cos, sin)`: argument reduction (4), position scale (1), then per
/// side either round and read (2) or split, two reads and interpolate (6),
/// plus quadrant sign fix-ups (2).
pub fn lut_sincos_ops(t: &SinTable) -> usize {
    let side = match t.mode() {
        Interp::Nearest => 2,
        Interp::Linear => 6,
    };
    4 + 1 + 2 * side + 2
}

/// Separate sine and cosine evaluations, each with octant folding (6),
/// squaring (1), a Horner step per extra term (mul + add), and the final
/// multiply-add.
pub fn taylor_sincos_ops(cfg: &TaylorConfig) -> usize {
    2 * (6 + 1 + 2 * (cfg.n_terms as usize - 1) + 2)
}

/// CIRC1 rotation: 1/K prescale (2), half-turn fold (2), then per iteration
/// two shifts, three add/subtracts and a sign test.
pub fn circ_rotation_ops(n_iter: usize) -> usize {
    4 + 6 * n_iter
}

/// LIN1 multiply-accumulate: per iteration a shift, two adds and a sign
/// test.
pub fn lin_ops(n_iter: usize) -> usize {
    4 * n_iter
}

/// CCM pose: three axis directions and the origin, each through two CIRC1
/// and two LIN1 per link.
pub fn cordic_pose_ops(n_links: usize, cfg: &CordicConfig) -> usize {
    let n = cfg.n_iter as usize;
    4 * n_links * (2 * circ_rotation_ops(n) + 2 * lin_ops(n))
}

/// Macro-PE pose: as CCM, but each translation is one add.
pub fn cfr_pose_ops(n_links: usize, cfg: &CfrConfig) -> usize {
    let slots = cfr_schedule(cfg.n_iter, &cfg.policy)
        .map(|s| s.len())
        .unwrap_or(cfg.n_iter as usize);
    4 * n_links * (2 * circ_rotation_ops(slots) + 2)
}

/// Microseconds for `ops` single-issue operations at the FK-processor clock.
pub fn clocked_latency_us(ops: usize) -> f64 {
    ops as f64 / DEFAULT_CLOCK_MHZ
}

/// CCM pipeline latency.
pub fn cordic_latency_us(n_links: usize) -> f64 {
    PipelineModel::with_links(n_links).map(|m| latency_us(&m)).unwrap_or(0.0)
}

/// DSP latency: one instruction per operation.
pub fn taylor_latency_us(ops: usize) -> f64 {
    ops as f64 * DSP_CYCLE_US
}

/// Macro-PE pipeline fill latency with one micro-stage per scheduled
/// iteration and one FK-processor clock per stage.
pub fn cfr_latency_us(n_links: usize, cfg: &CfrConfig) -> f64 {
    let stages = cfr_schedule(cfg.n_iter, &cfg.policy)
        .map(|s| s.len())
        .unwrap_or(cfg.n_iter as usize);
    MacroPeModel::new(n_links.max(1), stages.max(1), 1.0 / DEFAULT_CLOCK_MHZ)
        .map(|m| pipeline_timing(&m).fill_latency)
        .unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lut::build_table;
    use crate::QFormat;

    #[test]
    fn hand_counts() {
        // 3×3 rotation product (27 mul, 18 add) plus R·p + p (9 mul, 9 add)
        assert_eq!(HMAT_PRODUCT_OPS, 27 + 18 + 9 + 9);
        assert_eq!(matrix_chain_ops(1, 2), 12);
        assert_eq!(matrix_chain_ops(6, 2), 6 * 12 + 5 * 63);
        assert_eq!(taylor_sincos_ops(&TaylorConfig::default()), 2 * (6 + 1 + 14 + 2));
    }

    #[test]
    fn lut_cheaper_than_cordic() {
        let t = build_table(1024, QFormat::Q1_15, Interp::Linear).unwrap();
        let lut = matrix_chain_ops(6, lut_sincos_ops(&t));
        let cordic = cordic_pose_ops(6, &CordicConfig::default());
        assert!(lut < cordic, "{lut} vs {cordic}");
    }

    #[test]
    fn latencies() {
        assert_eq!(cordic_latency_us(6), 600.0);
        assert!((clocked_latency_us(103) - 10.0).abs() < 1e-12);
        assert!((taylor_latency_us(100) - 6.0).abs() < 1e-12);
        let l = cfr_latency_us(6, &CfrConfig::default());
        assert!((l - 12.0 * 24.0 / DEFAULT_CLOCK_MHZ).abs() < 1e-9);
    }
}
