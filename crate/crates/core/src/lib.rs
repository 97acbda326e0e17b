//! Forward-kinematics engine that emulates several hardware arithmetic
//! schemes at the bit level and compares them against a double-precision
//! reference.
//!
//! The float-valued geometry (homogeneous transforms, DH chains, closed-form
//! arm equations, the FK-processor VM) is generic over [`Real`]; the
//! hardware backends run on [`fixedpoint::Fx`]. Aliases for the common
//! `f64` instantiations live at the crate root.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod backend;
pub mod ccm;
pub mod cfr;
pub mod cli;
pub mod cordic;
pub mod cost;
pub mod dh;
pub mod error;
pub mod fixedpoint;
pub mod lut;
pub mod taylor;
pub mod umdh;

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

pub use error::{Error, Result};
pub use fixedpoint::{Acc, Fx, QFormat};

/// Scalar type for the float-valued models.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from `f64`, used for constants.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("finite literal")
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type Hmat64 = dh::Hmat<f64>;
pub type Hmat32 = dh::Hmat<f32>;
pub type Vec4f64 = dh::Vec4<f64>;
pub type Vec4f32 = dh::Vec4<f32>;
pub type DhJoint64 = dh::DhJoint<f64>;
pub type DhChain64 = dh::DhChain<f64>;
pub type PumaParams64 = dh::PumaParams<f64>;
pub type UmdhParams64 = umdh::UmdhParams<f64>;
