use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

use super::vm::FULL_REGISTERS;

/// Entries of the top three rows in row-major order; output slot `o{k}`
/// holds entry `OUTPUT_ENTRIES[k]`.
pub const OUTPUT_ENTRIES: [(usize, usize); 12] = [
    (0, 0),
    (0, 1),
    (0, 2),
    (0, 3),
    (1, 0),
    (1, 1),
    (1, 2),
    (1, 3),
    (2, 0),
    (2, 1),
    (2, 2),
    (2, 3),
];

/// Constant bank slots: `k0..k4` hold `a0, a1, a2, a3, d1`, `k5..k8` the
/// joint angles.
pub const BANK_SLOTS: u8 = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    LoadK,
    SinCos,
    Add,
    Sub,
    Mul,
    Mov,
    Store,
}

impl Op {
    pub fn mnemonic(self) -> &'static str {
        match self {
            Op::LoadK => "LOADK",
            Op::SinCos => "SINCOS",
            Op::Add => "ADD",
            Op::Sub => "SUB",
            Op::Mul => "MUL",
            Op::Mov => "MOV",
            Op::Store => "STORE",
        }
    }

    /// SINCOS, ADD, SUB and MUL count as arithmetic; the rest move data.
    pub fn is_arith(self) -> bool {
        matches!(self, Op::SinCos | Op::Add | Op::Sub | Op::Mul)
    }
}

/// One instruction. Operand meaning depends on `op`:
///
/// | op       | dst          | src1       | src2 |
/// |----------|--------------|------------|------|
/// | `LOADK`  | register     | bank slot  | -    |
/// | `SINCOS` | cos register, sin goes to `dst+1` | angle register | - |
/// | `ADD/SUB/MUL` | register | register | register |
/// | `MOV`    | register     | register   | -    |
/// | `STORE`  | output slot  | register   | -    |
///
/// Register 0 always reads as zero and is never written.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FkInstr {
    pub op: Op,
    pub dst: u8,
    pub src1: u8,
    pub src2: u8,
}

impl FkInstr {
    /// Registers written.
    pub fn writes(&self) -> Vec<u8> {
        match self.op {
            Op::SinCos => vec![self.dst, self.dst.wrapping_add(1)],
            Op::Store => vec![],
            _ => vec![self.dst],
        }
    }

    /// Registers read.
    pub fn reads(&self) -> Vec<u8> {
        match self.op {
            Op::LoadK => vec![],
            Op::Add | Op::Sub | Op::Mul => vec![self.src1, self.src2],
            Op::SinCos | Op::Mov | Op::Store => vec![self.src1],
        }
    }
}

impl fmt::Display for FkInstr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = self.op.mnemonic();
        match self.op {
            Op::LoadK => write!(f, "{m} r{} k{}", self.dst, self.src1),
            Op::Store => write!(f, "{m} o{} r{}", self.dst, self.src1),
            Op::SinCos | Op::Mov => write!(f, "{m} r{} r{}", self.dst, self.src1),
            _ => write!(f, "{m} r{} r{} r{}", self.dst, self.src1, self.src2),
        }
    }
}

/// Straight-line FK program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FkProgram {
    pub instrs: Vec<FkInstr>,
    /// Register stored to each output slot.
    pub outputs: [u8; 12],
}

impl FkProgram {
    pub fn from_instrs(instrs: Vec<FkInstr>) -> Result<Self> {
        let mut outputs = [None; 12];
        for ins in instrs.iter().filter(|i| i.op == Op::Store) {
            let slot = outputs
                .get_mut(ins.dst as usize)
                .ok_or_else(|| Error::Program(format!("output slot o{} out of range", ins.dst)))?;
            if slot.replace(ins.src1).is_some() {
                return Err(Error::Program(format!("output o{} stored twice", ins.dst)));
            }
        }
        let mut out = [0u8; 12];
        for (k, o) in outputs.iter().enumerate() {
            out[k] = o.ok_or_else(|| Error::Program(format!("output o{k} never stored")))?;
        }
        let p = FkProgram {
            instrs,
            outputs: out,
        };
        p.validate()?;
        Ok(p)
    }

    /// Checks dataflow and operand ranges against the full register file.
    pub fn validate(&self) -> Result<()> {
        let mut written = [false; 256];
        written[0] = true;
        for (pc, ins) in self.instrs.iter().enumerate() {
            let err = |m: String| Err(Error::Program(format!("instruction {pc} ({ins}): {m}")));
            if ins.op == Op::LoadK && ins.src1 >= BANK_SLOTS {
                return err(format!("bank slot k{} out of range", ins.src1));
            }
            for r in ins.reads() {
                if !written[r as usize] {
                    return err(format!("reads r{r} before it is written"));
                }
            }
            for r in ins.writes() {
                if r == 0 {
                    return err("writes the zero register".into());
                }
                if r as usize >= FULL_REGISTERS {
                    return err(format!("r{r} beyond the {FULL_REGISTERS}-entry register file"));
                }
                written[r as usize] = true;
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.instrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instrs.is_empty()
    }

    pub fn arith_ops(&self) -> usize {
        self.instrs.iter().filter(|i| i.op.is_arith()).count()
    }

    /// Highest register id referenced, plus one.
    pub fn registers_used(&self) -> usize {
        self.instrs
            .iter()
            .flat_map(|i| i.reads().into_iter().chain(i.writes()))
            .map(|r| r as usize + 1)
            .max()
            .unwrap_or(1)
    }
}

impl fmt::Display for FkProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "# {} instructions, {} arithmetic",
            self.instrs.len(),
            self.arith_ops()
        )?;
        for ins in &self.instrs {
            writeln!(f, "{ins}")?;
        }
        Ok(())
    }
}

fn operand(tok: &str, prefix: char, line: usize, column: usize) -> Result<u8> {
    tok.strip_prefix(prefix)
        .and_then(|n| n.parse::<u8>().ok())
        .ok_or_else(|| Error::Parse {
            line,
            column,
            message: format!("expected {prefix}<n>, got `{tok}`"),
        })
}

impl FromStr for FkProgram {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut instrs = Vec::new();
        for (ln, raw) in s.lines().enumerate() {
            let line = ln + 1;
            let body = raw.split('#').next().unwrap_or("");
            // (column, token) pairs, columns 1-based
            let toks: Vec<(usize, &str)> = body
                .split_whitespace()
                .map(|t| (t.as_ptr() as usize - raw.as_ptr() as usize + 1, t))
                .collect();
            let Some(&(col, mn)) = toks.first() else {
                continue;
            };
            let op = match mn {
                "LOADK" => Op::LoadK,
                "SINCOS" => Op::SinCos,
                "ADD" => Op::Add,
                "SUB" => Op::Sub,
                "MUL" => Op::Mul,
                "MOV" => Op::Mov,
                "STORE" => Op::Store,
                _ => {
                    return Err(Error::Parse {
                        line,
                        column: col,
                        message: format!("unknown opcode `{mn}`"),
                    })
                }
            };
            let shape: &[char] = match op {
                Op::LoadK => &['r', 'k'],
                Op::Store => &['o', 'r'],
                Op::SinCos | Op::Mov => &['r', 'r'],
                _ => &['r', 'r', 'r'],
            };
            if toks.len() != shape.len() + 1 {
                return Err(Error::Parse {
                    line,
                    column: col,
                    message: format!("{mn} takes {} operands, got {}", shape.len(), toks.len() - 1),
                });
            }
            let mut v = [0u8; 3];
            for (k, (&(c, t), &p)) in toks[1..].iter().zip(shape).enumerate() {
                v[k] = operand(t, p, line, c)?;
            }
            instrs.push(FkInstr {
                op,
                dst: v[0],
                src1: v[1],
                src2: v[2],
            });
        }
        FkProgram::from_instrs(instrs)
    }
}

/// Most registers simultaneously holding a value that is still to be read,
/// counting the zero register.
pub fn register_pressure(p: &FkProgram) -> usize {
    // (definition, last read) per value; registers are reused across values
    let n = p.instrs.len();
    let mut intervals: Vec<(usize, usize)> = Vec::new();
    let mut open: [Option<usize>; 256] = [None; 256];
    for (pc, ins) in p.instrs.iter().enumerate() {
        for r in ins.reads() {
            if let Some(iv) = open[r as usize] {
                intervals[iv].1 = pc;
            }
        }
        for r in ins.writes() {
            open[r as usize] = Some(intervals.len());
            intervals.push((pc, pc));
        }
    }
    let live = (0..n)
        .map(|pc| {
            intervals
                .iter()
                .filter(|&&(d, u)| d <= pc && (pc < u || d == pc))
                .count()
        })
        .max()
        .unwrap_or(0);
    live + 1
}

/// SSA form before register allocation.
#[derive(Clone, Copy)]
enum Val {
    Zero,
    V(usize),
}

struct Pre {
    op: Op,
    defs: Vec<usize>,
    uses: Vec<Val>,
    slot: u8,
}

struct Builder {
    code: Vec<Pre>,
    next: usize,
}

impl Builder {
    fn fresh(&mut self) -> usize {
        self.next += 1;
        self.next - 1
    }

    fn loadk(&mut self, slot: u8) -> Val {
        let v = self.fresh();
        self.code.push(Pre {
            op: Op::LoadK,
            defs: vec![v],
            uses: vec![],
            slot,
        });
        Val::V(v)
    }

    fn bin(&mut self, op: Op, a: Val, b: Val) -> Val {
        let v = self.fresh();
        self.code.push(Pre {
            op,
            defs: vec![v],
            uses: vec![a, b],
            slot: 0,
        });
        Val::V(v)
    }

    fn sincos(&mut self, a: Val) -> (Val, Val) {
        let (c, s) = (self.fresh(), self.fresh());
        self.code.push(Pre {
            op: Op::SinCos,
            defs: vec![c, s],
            uses: vec![a],
            slot: 0,
        });
        (Val::V(c), Val::V(s))
    }

    fn store(&mut self, slot: u8, a: Val) {
        self.code.push(Pre {
            op: Op::Store,
            defs: vec![],
            uses: vec![a],
            slot,
        });
    }

    /// Linear scan, lowest free register first; a value's register is
    /// released at its last read, so the destination may reuse it.
    fn allocate(self) -> Result<Vec<FkInstr>> {
        let mut last = vec![usize::MAX; self.next];
        for (pc, ins) in self.code.iter().enumerate() {
            for u in &ins.uses {
                if let Val::V(v) = u {
                    last[*v] = pc;
                }
            }
        }
        let mut reg_of = vec![0u8; self.next];
        let mut busy = [false; FULL_REGISTERS];
        busy[0] = true;
        let mut out = Vec::with_capacity(self.code.len());
        for (pc, ins) in self.code.iter().enumerate() {
            let src: Vec<u8> = ins
                .uses
                .iter()
                .map(|u| match u {
                    Val::Zero => 0,
                    Val::V(v) => reg_of[*v],
                })
                .collect();
            for u in &ins.uses {
                if let Val::V(v) = u {
                    if last[*v] == pc {
                        busy[reg_of[*v] as usize] = false;
                    }
                }
            }
            let width = ins.defs.len();
            let dst = if width == 0 {
                ins.slot
            } else {
                let base = (1..=FULL_REGISTERS - width)
                    .find(|&r| (r..r + width).all(|k| !busy[k]))
                    .ok_or(Error::Capacity {
                        needed: FULL_REGISTERS + 1,
                        available: FULL_REGISTERS,
                    })?;
                for (k, d) in ins.defs.iter().enumerate() {
                    busy[base + k] = true;
                    reg_of[*d] = (base + k) as u8;
                }
                base as u8
            };
            let (src1, src2) = match ins.op {
                Op::LoadK => (ins.slot, 0),
                _ => (src.first().copied().unwrap_or(0), src.get(1).copied().unwrap_or(0)),
            };
            out.push(FkInstr {
                op: ins.op,
                dst,
                src1,
                src2,
            });
        }
        Ok(out)
    }
}

/// Reduced schedule for the thumb pose: angle sums `θ23`, `θ234` formed
/// once, four SINCOS, shared products, and the two in-plane reach terms
/// reused by the x and y rows. Constants and angles come from the bank.
pub fn umdh_program() -> FkProgram {
    use Op::*;
    let mut b = Builder {
        code: Vec::new(),
        next: 0,
    };
    let [a0, a1, a2, a3, d1] = [0, 1, 2, 3, 4].map(|k| b.loadk(k));
    let [t1, t2, t3, t4] = [5, 6, 7, 8].map(|k| b.loadk(k));
    let t23 = b.bin(Add, t2, t3);
    let t234 = b.bin(Add, t23, t4);
    let (c1, s1) = b.sincos(t1);
    let (c2, s2) = b.sincos(t2);
    let (c23, s23) = b.sincos(t23);
    let (c234, s234) = b.sincos(t234);

    let r11 = b.bin(Mul, c1, c234);
    let m = b.bin(Mul, c1, s234);
    let r12 = b.bin(Sub, Val::Zero, m);
    let r21 = b.bin(Mul, s1, c234);
    let m = b.bin(Mul, s1, s234);
    let r22 = b.bin(Sub, Val::Zero, m);
    let r23 = b.bin(Sub, Val::Zero, c1);

    // in-plane reach a1 + a2·C2 + a3·C23
    let u = b.bin(Mul, a2, c2);
    let v = b.bin(Mul, a3, c23);
    let w = b.bin(Add, u, v);
    let reach = b.bin(Add, a1, w);
    let m = b.bin(Mul, c1, reach);
    let r14 = b.bin(Add, a0, m);
    let r24 = b.bin(Mul, s1, reach);

    let u = b.bin(Mul, a2, s2);
    let v = b.bin(Mul, a3, s23);
    let w = b.bin(Add, u, v);
    let r34 = b.bin(Add, w, d1);

    let outs = [
        r11,
        r12,
        s1,
        r14,
        r21,
        r22,
        r23,
        r24,
        s234,
        c234,
        Val::Zero,
        r34,
    ];
    for (k, v) in outs.into_iter().enumerate() {
        b.store(k as u8, v);
    }
    let instrs = b.allocate().expect("schedule fits the full register file");
    FkProgram::from_instrs(instrs).expect("generated program is well formed")
}
