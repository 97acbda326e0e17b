//! One pose, five ways.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::ccm::fk_pipeline_pose;
use crate::cfr::{macro_pe_pose, CfrConfig};
use crate::cordic::CordicConfig;
use crate::cost;
use crate::dh::{chain_pose, chain_pose_with, DhChain, Hmat};
use crate::error::{Error, Result};
use crate::fixedpoint::{Fx, QFormat};
use crate::lut::{build_table, lut_fk_pose, Interp, SinTable};
use crate::taylor::{taylor_sincos, TaylorConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BackendKind {
    Matrix,
    Cordic,
    Taylor,
    Lut,
    Cfr,
}

impl BackendKind {
    pub const ALL: [BackendKind; 5] = [
        BackendKind::Matrix,
        BackendKind::Cordic,
        BackendKind::Taylor,
        BackendKind::Lut,
        BackendKind::Cfr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BackendKind::Matrix => "matrix",
            BackendKind::Cordic => "cordic",
            BackendKind::Taylor => "taylor",
            BackendKind::Lut => "lut",
            BackendKind::Cfr => "cfr",
        }
    }
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BackendKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown backend `{s}`")))
    }
}

/// Overrides on top of each backend's defaults.
#[derive(Debug, Clone, Default)]
pub struct BackendParams {
    pub iters: Option<u32>,
    pub table_size: Option<usize>,
    pub format: Option<QFormat>,
    pub interp: Option<Interp>,
    /// Prebuilt table; takes precedence over size, format and mode.
    pub table: Option<Arc<SinTable>>,
}

pub const DEFAULT_TABLE_SIZE: usize = 1024;
pub const DEFAULT_TABLE_FORMAT: QFormat = QFormat::Q2_14;
pub const DEFAULT_INTERP: Interp = Interp::Linear;

/// A configured backend.
#[derive(Debug, Clone)]
pub enum Backend {
    Matrix,
    Cordic(CordicConfig),
    Taylor(TaylorConfig),
    Lut(Arc<SinTable>),
    Cfr(CfrConfig),
}

impl Backend {
    pub fn build(kind: BackendKind, p: &BackendParams) -> Result<Self> {
        Ok(match kind {
            BackendKind::Matrix => Backend::Matrix,
            BackendKind::Cordic => {
                let d = CordicConfig::default();
                Backend::Cordic(CordicConfig::rotation(
                    p.iters.unwrap_or(d.n_iter),
                    p.format.unwrap_or(d.fmt),
                )?)
            }
            BackendKind::Taylor => {
                let d = TaylorConfig::default();
                let fmt = p.format.unwrap_or(d.operand_fmt);
                let acc = d.acc_bits.max(2 * fmt.word_bits() + 4).min(128);
                Backend::Taylor(TaylorConfig::new(p.iters.unwrap_or(d.n_terms), fmt, acc)?)
            }
            BackendKind::Lut => match &p.table {
                Some(t) => Backend::Lut(t.clone()),
                None => Backend::Lut(Arc::new(build_table(
                    p.table_size.unwrap_or(DEFAULT_TABLE_SIZE),
                    p.format.unwrap_or(DEFAULT_TABLE_FORMAT),
                    p.interp.unwrap_or(DEFAULT_INTERP),
                )?)),
            },
            BackendKind::Cfr => {
                let d = CfrConfig::default();
                let n_iter = p.iters.unwrap_or(d.n_iter);
                let fmt = p.format.unwrap_or(d.fmt);
                if n_iter == 0 || n_iter > fmt.frac_bits() + 2 {
                    return Err(Error::Config(format!(
                        "{n_iter} CFR iterations do not fit {fmt}"
                    )));
                }
                Backend::Cfr(CfrConfig { n_iter, fmt, ..d })
            }
        })
    }

    pub fn kind(&self) -> BackendKind {
        match self {
            Backend::Matrix => BackendKind::Matrix,
            Backend::Cordic(_) => BackendKind::Cordic,
            Backend::Taylor(_) => BackendKind::Taylor,
            Backend::Lut(_) => BackendKind::Lut,
            Backend::Cfr(_) => BackendKind::Cfr,
        }
    }

    /// Datapath format the link parameters must fit, if any.
    fn datapath(&self) -> Option<QFormat> {
        match self {
            Backend::Matrix | Backend::Lut(_) => None,
            Backend::Cordic(c) => Some(c.fmt),
            Backend::Taylor(_) => Some(QFormat::Q8_24),
            Backend::Cfr(c) => Some(c.fmt),
        }
    }

    pub fn pose(&self, c: &DhChain<f64>) -> Result<Hmat<f64>> {
        if let Some(fmt) = self.datapath() {
            for (k, j) in c.joints.iter().enumerate() {
                let vals = [j.theta, j.d, j.a, j.alpha];
                if vals.iter().any(|v| !(v.abs() < fmt.max_real())) {
                    return Err(Error::Domain(format!(
                        "joint {} parameters {vals:?} exceed the {fmt} datapath",
                        k + 1
                    )));
                }
            }
        }
        match self {
            Backend::Matrix => chain_pose(c),
            Backend::Cordic(cfg) => fk_pipeline_pose(c, cfg).map(|(m, _)| m),
            Backend::Taylor(cfg) => chain_pose_with(c, |x| {
                let (co, si) = taylor_sincos(Fx::from_real(x, QFormat::Q8_24), cfg);
                (co.to_real(), si.to_real())
            }),
            Backend::Lut(t) => lut_fk_pose(c, t),
            Backend::Cfr(cfg) => macro_pe_pose(c, cfg),
        }
    }

    pub fn ops_per_pose(&self, n_links: usize) -> usize {
        match self {
            Backend::Matrix => cost::matrix_chain_ops(n_links, cost::LIBRARY_SINCOS_OPS),
            Backend::Cordic(cfg) => cost::cordic_pose_ops(n_links, cfg),
            Backend::Taylor(cfg) => cost::matrix_chain_ops(n_links, cost::taylor_sincos_ops(cfg)),
            Backend::Lut(t) => cost::matrix_chain_ops(n_links, cost::lut_sincos_ops(t)),
            Backend::Cfr(cfg) => cost::cfr_pose_ops(n_links, cfg),
        }
    }

    pub fn model_latency_us(&self, n_links: usize) -> f64 {
        match self {
            Backend::Cordic(_) => cost::cordic_latency_us(n_links),
            Backend::Taylor(_) => cost::taylor_latency_us(self.ops_per_pose(n_links)),
            Backend::Cfr(cfg) => cost::cfr_latency_us(n_links, cfg),
            Backend::Matrix | Backend::Lut(_) => cost::clocked_latency_us(self.ops_per_pose(n_links)),
        }
    }

    /// Table size or iteration count, for reports.
    pub fn describe(&self) -> String {
        match self {
            Backend::Matrix => "double precision".into(),
            Backend::Cordic(c) => format!("{} iterations, {}", c.n_iter, c.fmt),
            Backend::Taylor(c) => format!("{} terms, {} operands, {}-bit accumulator", c.n_terms, c.operand_fmt, c.acc_bits),
            Backend::Lut(t) => format!("{} entries, {}, {:?}", t.n_entries(), t.fmt(), t.mode()),
            Backend::Cfr(c) => format!("{} iterations, {}", c.n_iter, c.fmt),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dh::{puma_chain, DhJoint, PumaParams};

    #[test]
    fn names_round_trip() {
        for k in BackendKind::ALL {
            assert_eq!(k.name().parse::<BackendKind>().unwrap(), k);
        }
        assert!("abacus".parse::<BackendKind>().is_err());
    }

    #[test]
    fn identity_chain_all_backends() {
        let c = DhChain::new(vec![DhJoint::rotary(0.0, 0.0, 0.0, 0.0); 2]);
        for k in BackendKind::ALL {
            let b = Backend::build(k, &BackendParams::default()).unwrap();
            let pose = b.pose(&c).unwrap();
            // Q1.15 tops out at 1 - 2^-15, so each cos 0 is one quantum short
            let tol = if k == BackendKind::Taylor { 4.0 * 2f64.powi(-15) } else { 1e-5 };
            assert!(pose.max_abs_diff(&Hmat::identity()) <= tol, "{k}");
        }
    }

    #[test]
    fn puma_within_gate() {
        let c = puma_chain([0.3, -0.8, 0.5, 1.2, -0.4, 2.0], &PumaParams::puma560());
        let oracle = chain_pose(&c).unwrap();
        for k in BackendKind::ALL {
            let b = Backend::build(k, &BackendParams::default()).unwrap();
            let err = b.pose(&c).unwrap().max_abs_diff(&oracle);
            assert!(err <= 1e-3, "{k}: {err}");
        }
        let b = Backend::build(BackendKind::Cordic, &BackendParams::default()).unwrap();
        assert!(b.pose(&c).unwrap().max_abs_diff(&oracle) <= 1e-4);
    }

    #[test]
    fn out_of_format_parameters() {
        let c = DhChain::new(vec![DhJoint::rotary(0.0, 500.0, 0.0, 0.0)]);
        let b = Backend::build(BackendKind::Cordic, &BackendParams::default()).unwrap();
        assert!(matches!(b.pose(&c), Err(Error::Domain(_))));
        assert!(Backend::Matrix.pose(&c).is_ok());
    }

    #[test]
    fn bad_parameters() {
        let p = BackendParams {
            iters: Some(99),
            ..Default::default()
        };
        assert!(Backend::build(BackendKind::Cordic, &p).is_err());
        assert!(Backend::build(BackendKind::Cfr, &p).is_err());
        let p = BackendParams {
            table_size: Some(100),
            ..Default::default()
        };
        assert_eq!(Backend::build(BackendKind::Lut, &p).unwrap_err(), Error::TableSize(100));
    }
}
