//! Denavit–Hartenberg chains: link transforms, the four-factor
//! decomposition, chain products and the PUMA closed-form arm equation.

mod matrix;
mod puma;

pub use matrix::{Hmat, Vec4};
pub use puma::{puma_chain, puma_closed_form, PumaParams};

use crate::error::{Error, Result};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum JointKind {
    /// Joint variable is `theta`.
    Rotary,
    /// Joint variable is `d`.
    Prismatic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DhJoint<T> {
    pub kind: JointKind,
    pub theta: T,
    pub d: T,
    pub a: T,
    pub alpha: T,
}

impl<T: Real> DhJoint<T> {
    pub fn rotary(theta: T, d: T, a: T, alpha: T) -> Self {
        DhJoint {
            kind: JointKind::Rotary,
            theta,
            d,
            a,
            alpha,
        }
    }

    pub fn prismatic(theta: T, d: T, a: T, alpha: T) -> Self {
        DhJoint {
            kind: JointKind::Prismatic,
            theta,
            d,
            a,
            alpha,
        }
    }

    pub fn variable(&self) -> T {
        match self.kind {
            JointKind::Rotary => self.theta,
            JointKind::Prismatic => self.d,
        }
    }

    pub fn with_variable(mut self, q: T) -> Self {
        match self.kind {
            JointKind::Rotary => self.theta = q,
            JointKind::Prismatic => self.d = q,
        }
        self
    }

    /// Link length entering the translation column. Prismatic links carry
    /// no `a` offset.
    pub fn effective_a(&self) -> T {
        match self.kind {
            JointKind::Rotary => self.a,
            JointKind::Prismatic => T::zero(),
        }
    }
}

/// Ordered joints, base to tip.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DhChain<T> {
    pub joints: Vec<DhJoint<T>>,
}

impl<T: Real> DhChain<T> {
    pub fn new(joints: Vec<DhJoint<T>>) -> Self {
        DhChain { joints }
    }

    pub fn len(&self) -> usize {
        self.joints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.joints.is_empty()
    }

    pub fn variables(&self) -> Vec<T> {
        self.joints.iter().map(DhJoint::variable).collect()
    }

    /// Copy of the chain with joint variables replaced in order.
    pub fn with_variables(&self, q: &[T]) -> Result<Self> {
        if q.len() != self.joints.len() {
            return Err(Error::Config(format!(
                "{} joint variables for a {}-joint chain",
                q.len(),
                self.joints.len()
            )));
        }
        Ok(DhChain {
            joints: self
                .joints
                .iter()
                .zip(q)
                .map(|(j, &v)| j.with_variable(v))
                .collect(),
        })
    }

    /// Concatenation `self ++ tail`.
    pub fn concat(&self, tail: &Self) -> Self {
        let mut joints = self.joints.clone();
        joints.extend_from_slice(&tail.joints);
        DhChain { joints }
    }
}

/// `i-1A_i` for one joint.
pub fn link_transform<T: Real>(j: &DhJoint<T>) -> Hmat<T> {
    let (st, ct) = j.theta.sin_cos();
    let (sa, ca) = j.alpha.sin_cos();
    let a = j.effective_a();
    Hmat::from_rows([
        [ct, -ca * st, sa * st, a * ct],
        [st, ca * ct, -sa * ct, a * st],
        [T::zero(), sa, ca, j.d],
    ])
}

/// The four factors `(Tran(z, d), Rot(z, θ), Tran(x, a), Rot(x, α))` whose
/// product is [`link_transform`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decomposition<T> {
    pub trans_z: Hmat<T>,
    pub rot_z: Hmat<T>,
    pub trans_x: Hmat<T>,
    pub rot_x: Hmat<T>,
}

impl<T: Real> Decomposition<T> {
    pub fn compose(&self) -> Hmat<T> {
        self.trans_z * self.rot_z * self.trans_x * self.rot_x
    }
}

pub fn decompose<T: Real>(j: &DhJoint<T>) -> Decomposition<T> {
    let z = T::zero();
    Decomposition {
        trans_z: Hmat::translation(z, z, j.d),
        rot_z: Hmat::rot_z(j.theta),
        trans_x: Hmat::translation(j.effective_a(), z, z),
        rot_x: Hmat::rot_x(j.alpha),
    }
}

/// `0T_n = 0A_1 · 1A_2 ⋯ n-1A_n`.
pub fn chain_pose<T: Real>(c: &DhChain<T>) -> Result<Hmat<T>> {
    let mut it = c.joints.iter();
    let first = it.next().ok_or(Error::EmptyChain)?;
    Ok(it.fold(link_transform(first), |acc, j| acc * link_transform(j)))
}

/// [`chain_pose`] with `trig(x) = (cos x, sin x)` standing in for the
/// library functions in every link matrix.
pub fn chain_pose_with<T: Real>(c: &DhChain<T>, trig: impl Fn(T) -> (T, T)) -> Result<Hmat<T>> {
    if c.is_empty() {
        return Err(Error::EmptyChain);
    }
    Ok(c.joints.iter().fold(Hmat::identity(), |acc, j| {
        let (ct, st) = trig(j.theta);
        let (ca, sa) = trig(j.alpha);
        let a = j.effective_a();
        acc * Hmat::from_rows([
            [ct, -ca * st, sa * st, a * ct],
            [st, ca * ct, -sa * ct, a * st],
            [T::zero(), sa, ca, j.d],
        ])
    }))
}

/// `P_{i-1} = A · P_i`.
pub fn apply_point<T: Real>(a: &Hmat<T>, p: Vec4<T>) -> Vec4<T> {
    a.apply(p)
}
