use super::{DhChain, DhJoint, Hmat};
use crate::Real;

/// Link constants of a PUMA-style 6R arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumaParams<T> {
    pub d2: T,
    pub d4: T,
    pub d6: T,
    pub a2: T,
    pub a3: T,
}

impl<T: Real> PumaParams<T> {
    /// PUMA 560 link constants in metres.
    pub fn puma560() -> Self {
        PumaParams {
            d2: T::lit(0.149_09),
            d4: T::lit(0.433_07),
            d6: T::lit(0.056_25),
            a2: T::lit(0.431_8),
            a3: T::lit(-0.020_32),
        }
    }

    pub fn zero() -> Self {
        let z = T::zero();
        PumaParams {
            d2: z,
            d4: z,
            d6: z,
            a2: z,
            a3: z,
        }
    }
}

/// The DH table the arm equation is written for
/// (α = −90°, 0, 90°, −90°, 90°, 0).
pub fn puma_chain<T: Real>(theta: [T; 6], p: &PumaParams<T>) -> DhChain<T> {
    let z = T::zero();
    let h = T::FRAC_PI_2();
    DhChain::new(vec![
        DhJoint::rotary(theta[0], z, z, -h),
        DhJoint::rotary(theta[1], p.d2, p.a2, z),
        DhJoint::rotary(theta[2], z, p.a3, h),
        DhJoint::rotary(theta[3], p.d4, z, -h),
        DhJoint::rotary(theta[4], z, z, h),
        DhJoint::rotary(theta[5], p.d6, z, z),
    ])
}

/// Closed-form end-effector pose using the `C_i`, `S_i`, `C_23`, `S_23`
/// abbreviations.
pub fn puma_closed_form<T: Real>(theta: [T; 6], p: &PumaParams<T>) -> Hmat<T> {
    let (s1, c1) = theta[0].sin_cos();
    let (s2, c2) = theta[1].sin_cos();
    let (s23, c23) = (theta[1] + theta[2]).sin_cos();
    let (s4, c4) = theta[3].sin_cos();
    let (s5, c5) = theta[4].sin_cos();
    let (s6, c6) = theta[5].sin_cos();

    // terms shared by the x and y rows
    let n_arm = c23 * (c4 * c5 * c6 - s4 * s6) - s23 * s5 * c6;
    let n_wr = s4 * c5 * c6 + c4 * s6;
    let s_arm = -c23 * (c4 * c5 * s6 + s4 * c6) + s23 * s5 * s6;
    let s_wr = -s4 * c5 * s6 + c4 * c6;
    let a_arm = c23 * c4 * s5 + s23 * c5;
    let a_wr = s4 * s5;
    let p_arm = p.d6 * a_arm + s23 * p.d4 + p.a3 * c23 + p.a2 * c2;
    let p_wr = p.d6 * s4 * s5 + p.d2;

    Hmat::from_rows([
        [
            c1 * n_arm - s1 * n_wr,
            c1 * s_arm - s1 * s_wr,
            c1 * a_arm - s1 * a_wr,
            c1 * p_arm - s1 * p_wr,
        ],
        [
            s1 * n_arm + c1 * n_wr,
            s1 * s_arm + c1 * s_wr,
            s1 * a_arm + c1 * a_wr,
            s1 * p_arm + c1 * p_wr,
        ],
        [
            -s23 * (c4 * c5 * c6 - s4 * s6) - c23 * s5 * c6,
            s23 * (c4 * c5 * s6 + s4 * c6) + c23 * s5 * s6,
            c23 * c5 - s23 * c4 * s5,
            p.d6 * (c23 * c5 - s23 * c4 * s5) + c23 * p.d4 - p.a3 * s23 - p.a2 * s2,
        ],
    ])
}
