//! Thumb forward kinematics of the Utah/MIT dexterous hand and the
//! FK-processor VM that evaluates it.

mod program;
mod vm;

pub use program::{register_pressure, umdh_program, FkInstr, FkProgram, Op, OUTPUT_ENTRIES};
pub use vm::{clock_time, vm_run, SinCosUnit, VmConfig, DEFAULT_CLOCK_MHZ, FULL_REGISTERS};

use crate::dh::{DhChain, DhJoint, Hmat};
use crate::Real;

/// The five link constants loaded before execution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UmdhParams<T> {
    pub a0: T,
    pub a1: T,
    pub a2: T,
    pub a3: T,
    pub d1: T,
}

impl<T: Real> UmdhParams<T> {
    pub fn new(a0: T, a1: T, a2: T, a3: T, d1: T) -> Self {
        UmdhParams { a0, a1, a2, a3, d1 }
    }

    /// Constant bank order: `a0, a1, a2, a3, d1`.
    pub fn bank(&self) -> [T; 5] {
        [self.a0, self.a1, self.a2, self.a3, self.d1]
    }
}

/// Scalar evaluation that counts every trig call, `+`, `−`, `×` and
/// negation.
struct Tally {
    ops: usize,
}

impl Tally {
    fn add<T: Real>(&mut self, a: T, b: T) -> T {
        self.ops += 1;
        a + b
    }
    fn mul<T: Real>(&mut self, a: T, b: T) -> T {
        self.ops += 1;
        a * b
    }
    fn neg<T: Real>(&mut self, a: T) -> T {
        self.ops += 1;
        -a
    }
    fn sin<T: Real>(&mut self, a: T) -> T {
        self.ops += 1;
        a.sin()
    }
    fn cos<T: Real>(&mut self, a: T) -> T {
        self.ops += 1;
        a.cos()
    }
}

/// Entry-by-entry evaluation with no shared terms. Returns the pose and the
/// number of scalar operations spent.
pub fn umdh_t04_naive<T: Real>(th: [T; 4], p: &UmdhParams<T>) -> (Hmat<T>, usize) {
    let [t1, t2, t3, t4] = th;
    let mut k = Tally { ops: 0 };
    let z = T::zero();

    let s = k.add(t2, t3);
    let s = k.add(s, t4);
    let c = k.cos(s);
    let c1 = k.cos(t1);
    let r11 = k.mul(c1, c);

    let s = k.add(t2, t3);
    let s = k.add(s, t4);
    let sn = k.sin(s);
    let c1 = k.cos(t1);
    let m = k.mul(c1, sn);
    let r12 = k.neg(m);

    let r13 = k.sin(t1);

    let c1 = k.cos(t1);
    let c2 = k.cos(t2);
    let s = k.add(t2, t3);
    let c23 = k.cos(s);
    let u = k.mul(p.a2, c2);
    let v = k.mul(p.a3, c23);
    let w = k.add(p.a1, u);
    let w = k.add(w, v);
    let w = k.mul(c1, w);
    let r14 = k.add(p.a0, w);

    let s = k.add(t2, t3);
    let s = k.add(s, t4);
    let c = k.cos(s);
    let s1 = k.sin(t1);
    let r21 = k.mul(s1, c);

    let s = k.add(t2, t3);
    let s = k.add(s, t4);
    let sn = k.sin(s);
    let s1 = k.sin(t1);
    let m = k.mul(s1, sn);
    let r22 = k.neg(m);

    let c1 = k.cos(t1);
    let r23 = k.neg(c1);

    let s1 = k.sin(t1);
    let c2 = k.cos(t2);
    let s = k.add(t2, t3);
    let c23 = k.cos(s);
    let u = k.mul(p.a2, c2);
    let v = k.mul(p.a3, c23);
    let w = k.add(p.a1, u);
    let w = k.add(w, v);
    let r24 = k.mul(s1, w);

    let s = k.add(t2, t3);
    let s = k.add(s, t4);
    let r31 = k.sin(s);

    let s = k.add(t2, t3);
    let s = k.add(s, t4);
    let r32 = k.cos(s);

    let s2 = k.sin(t2);
    let s = k.add(t2, t3);
    let s23 = k.sin(s);
    let u = k.mul(p.a2, s2);
    let v = k.mul(p.a3, s23);
    let w = k.add(u, v);
    let r34 = k.add(w, p.d1);

    let m = Hmat::from_rows([
        [r11, r12, r13, r14],
        [r21, r22, r23, r24],
        [r31, r32, z, r34],
    ]);
    (m, k.ops)
}

/// DH chain the thumb equation is the product of: a fixed base offset `a0`,
/// one out-of-plane joint, then three coplanar joints.
pub fn umdh_chain<T: Real>(th: [T; 4], p: &UmdhParams<T>) -> DhChain<T> {
    let z = T::zero();
    DhChain::new(vec![
        DhJoint::rotary(z, z, p.a0, z),
        DhJoint::rotary(th[0], p.d1, p.a1, T::FRAC_PI_2()),
        DhJoint::rotary(th[1], z, p.a2, z),
        DhJoint::rotary(th[2], z, p.a3, z),
        DhJoint::rotary(th[3], z, z, z),
    ])
}
