use std::sync::Arc;

use crate::cordic::{sincos_cordic, CordicConfig};
use crate::dh::Hmat;
use crate::error::{Error, Result};
use crate::fixedpoint::Fx;
use crate::lut::{lut_sincos_real, SinTable};
use crate::taylor::{taylor_sincos, TaylorConfig};
use crate::Real;

use super::program::{register_pressure, FkProgram, Op, OUTPUT_ENTRIES};
use super::UmdhParams;

pub const FULL_REGISTERS: usize = 32;
pub const DEFAULT_CLOCK_MHZ: f64 = 10.3;

/// What the cosine/sine unit is built from.
#[derive(Debug, Clone)]
pub enum SinCosUnit {
    Exact,
    Cordic(CordicConfig),
    Taylor(TaylorConfig),
    Lut(Arc<SinTable>),
}

impl SinCosUnit {
    fn eval(&self, x: f64) -> (f64, f64) {
        match self {
            SinCosUnit::Exact => {
                let (s, c) = x.sin_cos();
                (c, s)
            }
            SinCosUnit::Cordic(cfg) => {
                let (c, s) = sincos_cordic(Fx::from_real(x, cfg.fmt), cfg);
                (c.to_real(), s.to_real())
            }
            SinCosUnit::Taylor(cfg) => {
                // angle register is Q8.24 wide; the series runs on Q1.15
                let (c, s) = taylor_sincos(Fx::from_real(x, crate::QFormat::Q8_24), cfg);
                (c.to_real(), s.to_real())
            }
            SinCosUnit::Lut(t) => lut_sincos_real(x, t),
        }
    }
}

#[derive(Debug, Clone)]
pub struct VmConfig {
    pub half_sized: bool,
    /// Cycles one SINCOS dispatch occupies; every other op takes one.
    pub sincos_cycles: u32,
    pub unit: SinCosUnit,
}

impl Default for VmConfig {
    fn default() -> Self {
        VmConfig {
            half_sized: false,
            sincos_cycles: 1,
            unit: SinCosUnit::Cordic(CordicConfig::default()),
        }
    }
}

impl VmConfig {
    pub fn exact() -> Self {
        VmConfig {
            unit: SinCosUnit::Exact,
            ..Self::default()
        }
    }

    pub fn registers(&self) -> usize {
        if self.half_sized {
            FULL_REGISTERS / 2
        } else {
            FULL_REGISTERS
        }
    }
}

/// Run a program single-issue, one functional unit per cycle. Returns the
/// assembled pose and the cycle count.
pub fn vm_run<T: Real>(
    prog: &FkProgram,
    th: [T; 4],
    p: &UmdhParams<T>,
    hw: &VmConfig,
) -> Result<(Hmat<T>, u64)> {
    if hw.sincos_cycles == 0 {
        return Err(Error::Config("SINCOS needs at least one cycle".into()));
    }
    prog.validate()?;
    let available = hw.registers();
    let needed = register_pressure(prog).max(prog.registers_used());
    if needed > available {
        return Err(Error::Capacity { needed, available });
    }
    let mut bank = [T::zero(); 9];
    bank[..5].copy_from_slice(&p.bank());
    bank[5..].copy_from_slice(&th);
    let mut reg = vec![T::zero(); available];
    let mut out = [T::zero(); 12];
    let mut cycles = 0u64;
    for ins in &prog.instrs {
        let (d, a, b) = (ins.dst as usize, ins.src1 as usize, ins.src2 as usize);
        cycles += 1;
        match ins.op {
            Op::LoadK => reg[d] = bank[a],
            Op::SinCos => {
                cycles += hw.sincos_cycles as u64 - 1;
                let x = reg[a].to_f64().unwrap_or(f64::NAN);
                let (c, s) = match hw.unit {
                    SinCosUnit::Exact => {
                        let (s, c) = reg[a].sin_cos();
                        (c, s)
                    }
                    ref u => {
                        let (c, s) = u.eval(x);
                        (T::lit(c), T::lit(s))
                    }
                };
                reg[d] = c;
                reg[d + 1] = s;
            }
            Op::Add => reg[d] = reg[a] + reg[b],
            Op::Sub => reg[d] = reg[a] - reg[b],
            Op::Mul => reg[d] = reg[a] * reg[b],
            Op::Mov => reg[d] = reg[a],
            Op::Store => out[d] = reg[a],
        }
    }
    let mut rows = [[T::zero(); 4]; 3];
    for (k, &(r, c)) in OUTPUT_ENTRIES.iter().enumerate() {
        rows[r][c] = out[k];
    }
    Ok((Hmat::from_rows(rows), cycles))
}

/// Microseconds for `cycles` at `f_mhz`.
pub fn clock_time(cycles: u64, f_mhz: f64) -> f64 {
    cycles as f64 / f_mhz
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dh::chain_pose;
    use crate::lut::{build_table, Interp};
    use crate::umdh::{umdh_chain, umdh_program, umdh_t04_naive};
    use crate::QFormat;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn params() -> UmdhParams<f64> {
        UmdhParams::new(0.02, 0.03, 0.045, 0.035, 0.01)
    }

    #[test]
    fn zero_angles() {
        let p = params();
        let (t, cycles) = vm_run(&umdh_program(), [0.0; 4], &p, &VmConfig::exact()).unwrap();
        let want = Hmat::from_rows([
            [1.0, 0.0, 0.0, p.a0 + p.a1 + p.a2 + p.a3],
            [0.0, 0.0, -1.0, 0.0],
            [0.0, 1.0, 0.0, p.d1],
        ]);
        assert!(t.max_abs_diff(&want) < 1e-15);
        assert_eq!(cycles, 45);
    }

    #[test]
    fn three_way_agreement() {
        let p = params();
        let prog = umdh_program();
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..200 {
            let th = [(); 4].map(|_| rng.gen_range(-PI..PI));
            let (v, _) = vm_run(&prog, th, &p, &VmConfig::exact()).unwrap();
            let (n, _) = umdh_t04_naive(th, &p);
            let c = chain_pose(&umdh_chain(th, &p)).unwrap();
            assert!(v.max_abs_diff(&n) < 1e-12);
            assert!(v.max_abs_diff(&c) < 1e-12);
            assert!(v.has_affine_bottom_row());
        }
    }

    #[test]
    fn pluggable_units() {
        let p = params();
        let prog = umdh_program();
        let th = [0.3, -1.1, 0.7, 2.0];
        let (n, _) = umdh_t04_naive(th, &p);
        let lut = Arc::new(build_table(1024, QFormat::Q2_62, Interp::Linear).unwrap());
        for (unit, tol) in [
            (SinCosUnit::Cordic(CordicConfig::default()), 1e-5),
            (SinCosUnit::Taylor(TaylorConfig::default()), 1e-3),
            (SinCosUnit::Lut(lut), 1e-5),
        ] {
            let hw = VmConfig { unit, ..VmConfig::default() };
            let (v, _) = vm_run(&prog, th, &p, &hw).unwrap();
            assert!(v.max_abs_diff(&n) < tol);
        }
    }

    #[test]
    fn sincos_latency_adds_cycles() {
        let hw = VmConfig {
            sincos_cycles: 5,
            ..VmConfig::exact()
        };
        let (_, c) = vm_run(&umdh_program(), [0.1; 4], &params(), &hw).unwrap();
        assert_eq!(c, 45 + 4 * 4);
    }

    #[test]
    fn half_sized_file_overflows() {
        let hw = VmConfig {
            half_sized: true,
            ..VmConfig::exact()
        };
        match vm_run(&umdh_program(), [0.0; 4], &params(), &hw) {
            Err(Error::Capacity { needed, available }) => {
                assert_eq!(available, 16);
                assert!(needed > 16);
            }
            other => panic!("expected capacity error, got {other:?}"),
        }
    }

    #[test]
    fn f32_run() {
        let p = UmdhParams::new(0.02f32, 0.03, 0.045, 0.035, 0.01);
        let th = [0.3f32, -0.2, 0.5, 0.1];
        let (v, _) = vm_run(&umdh_program(), th, &p, &VmConfig::exact()).unwrap();
        let (n, _) = umdh_t04_naive(th, &p);
        assert!(v.max_abs_diff(&n) < 1e-6);
    }

    #[test]
    fn clock() {
        assert_eq!(clock_time(0, DEFAULT_CLOCK_MHZ), 0.0);
        assert!((clock_time(103, DEFAULT_CLOCK_MHZ) - 10.0).abs() < 1e-12);
    }
}
