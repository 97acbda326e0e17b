//! `fkproc` command line: chain files in, poses, benchmarks and timing
//! tables out.
//!
//! Chain files are line oriented:
//!
//! ```text
//! # comment
//! name puma560
//! joint R theta d a alpha     # R rotary, P prismatic; radians and metres
//! point x y z                 # optional
//! ```

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::backend::{Backend, BackendKind, BackendParams};
use crate::ccm::LatencyReport;
use crate::dh::{chain_pose, DhChain, DhJoint, Hmat, JointKind, Vec4};
use crate::error::{Error, Result};
use crate::fixedpoint::QFormat;
use crate::lut::{build_table, dump_table, load_table, Interp};
use crate::umdh::{
    clock_time, register_pressure, umdh_program, vm_run, SinCosUnit, UmdhParams, VmConfig,
    DEFAULT_CLOCK_MHZ,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_CAPACITY: i32 = 4;

pub const CSV_HEADER: &str = "backend,max_err,rms_err,ops_per_pose,model_latency_us";

/// Parsed chain file.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainFile {
    pub name: String,
    pub chain: DhChain<f64>,
    pub point: Option<Vec4<f64>>,
}

fn perr(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// `want` finite numbers from `args`, which follow keyword `key` at `col`.
fn numbers(line: usize, col: usize, key: &str, args: &[(usize, &str)], want: usize) -> Result<Vec<f64>> {
    if args.len() != want {
        return Err(perr(line, col, format!("`{key}` takes {want} values, got {}", args.len())));
    }
    args.iter()
        .map(|&(c, t)| {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| perr(line, c, format!("expected a finite number, got `{t}`")))
        })
        .collect()
}

pub fn parse_chain(text: &str) -> Result<ChainFile> {
    let mut name = None;
    let mut joints = Vec::new();
    let mut point = None;
    let mut last_line = 0;
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        last_line = line;
        let body = raw.split('#').next().unwrap_or("");
        let toks: Vec<(usize, &str)> = body
            .split_whitespace()
            .map(|t| (t.as_ptr() as usize - raw.as_ptr() as usize + 1, t))
            .collect();
        let Some(&(col, key)) = toks.first() else {
            continue;
        };
        let args = &toks[1..];
        match key {
            "name" => {
                if name.is_some() {
                    return Err(perr(line, col, "duplicate `name`"));
                }
                let &(c, _) = args.first().ok_or_else(|| perr(line, col, "`name` needs a value"))?;
                name = Some(body[c - 1..].trim().to_string());
            }
            "joint" => {
                let &(kc, kind) = args.first().ok_or_else(|| perr(line, col, "`joint` needs a kind"))?;
                let kind = match kind {
                    "R" => JointKind::Rotary,
                    "P" => JointKind::Prismatic,
                    _ => return Err(perr(line, kc, format!("joint kind must be R or P, got `{kind}`"))),
                };
                let v = numbers(line, col, "joint", &args[1..], 4)?;
                joints.push(match kind {
                    JointKind::Rotary => DhJoint::rotary(v[0], v[1], v[2], v[3]),
                    JointKind::Prismatic => DhJoint::prismatic(v[0], v[1], v[2], v[3]),
                });
            }
            "point" => {
                if point.is_some() {
                    return Err(perr(line, col, "duplicate `point`"));
                }
                let v = numbers(line, col, key, args, 3)?;
                point = Some(Vec4::point(v[0], v[1], v[2]));
            }
            _ => return Err(perr(line, col, format!("unknown keyword `{key}`"))),
        }
    }
    if joints.is_empty() {
        return Err(perr(last_line.max(1), 1, "chain has no joints"));
    }
    Ok(ChainFile {
        name: name.unwrap_or_else(|| "chain".into()),
        chain: DhChain::new(joints),
        point,
    })
}

pub fn read_chain(path: &Path) -> Result<ChainFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_chain(&text)
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. }
        | Error::EmptyChain
        | Error::Config(_)
        | Error::InvalidFormat(_)
        | Error::TableSize(_)
        | Error::Program(_) => EXIT_PARSE,
        Error::Domain(_) | Error::FormatMismatch { .. } | Error::ShiftOutOfRange { .. } => EXIT_DOMAIN,
        Error::Capacity { .. } => EXIT_CAPACITY,
        Error::Io(_) => EXIT_IO,
    }
}

#[derive(Debug, Parser)]
#[command(name = "fkproc", version, about = "Forward kinematics on emulated hardware datapaths")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one pose and compare it with the double-precision matrix chain
    Solve(SolveArgs),
    /// Seeded accuracy and cost sweep across backends, as CSV
    Bench(BenchArgs),
    /// CCM pipeline latency and processor count per link count
    Pipeline(PipelineArgs),
    /// Run the thumb FK program on the FK-processor VM
    Vm(VmArgs),
    /// Write a sine table in the FKLUT1 binary format
    Table(TableArgs),
}

fn parse_backend(s: &str) -> std::result::Result<BackendKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_format(s: &str) -> std::result::Result<QFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_interp(s: &str) -> std::result::Result<Interp, String> {
    match s {
        "nearest" => Ok(Interp::Nearest),
        "linear" => Ok(Interp::Linear),
        _ => Err(format!("expected nearest or linear, got `{s}`")),
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub chain_file: PathBuf,
    #[arg(long, env = "FK_DEFAULT_BACKEND", default_value = "cordic", value_parser = parse_backend)]
    pub backend: BackendKind,
    /// CORDIC/CFR iterations or Taylor terms
    #[arg(long)]
    pub iters: Option<u32>,
    #[arg(long)]
    pub table_size: Option<usize>,
    /// Datapath or table format, e.g. Q8.24
    #[arg(long, value_parser = parse_format)]
    pub format: Option<QFormat>,
    #[arg(long, value_parser = parse_interp)]
    pub interp: Option<Interp>,
    /// Load the LUT from an FKLUT1 file instead of building it
    #[arg(long)]
    pub table_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    pub chain_file: PathBuf,
    #[arg(long, value_delimiter = ',', value_parser = parse_backend,
          default_value = "matrix,cordic,taylor,lut,cfr")]
    pub backends: Vec<BackendKind>,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[arg(long, default_value_t = 6)]
    pub links: usize,
}

#[derive(Debug, Args)]
pub struct VmArgs {
    /// θ1,θ2,θ3,θ4 in radians
    #[arg(long, value_delimiter = ',', num_args = 1, allow_negative_numbers = true)]
    pub angles: Vec<f64>,
    /// a0,a1,a2,a3,d1
    #[arg(long, value_delimiter = ',', num_args = 1, allow_negative_numbers = true)]
    pub params: Vec<f64>,
    #[arg(long)]
    pub half_sized: bool,
    /// exact, cordic, taylor or lut
    #[arg(long, default_value = "cordic")]
    pub sincos: String,
    #[arg(long, default_value_t = 1)]
    pub sincos_cycles: u32,
    /// Print the program listing
    #[arg(long)]
    pub listing: bool,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long, default_value_t = crate::backend::DEFAULT_TABLE_SIZE)]
    pub size: usize,
    #[arg(long, value_parser = parse_format, default_value = "Q2.14")]
    pub format: QFormat,
    #[arg(long, value_parser = parse_interp, default_value = "linear")]
    pub interp: Interp,
    #[arg(long, short)]
    pub out: PathBuf,
}

fn fmt_matrix(m: &Hmat<f64>) -> String {
    let mut s = String::new();
    for row in m.rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{:>13.6}", v + 0.0)).collect();
        let _ = writeln!(s, "{}", cells.join(""));
    }
    s
}

pub fn cmd_solve(a: &SolveArgs) -> Result<String> {
    let cf = read_chain(&a.chain_file)?;
    let table = match &a.table_file {
        Some(p) => {
            let f = fs::File::open(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
            Some(Arc::new(load_table(std::io::BufReader::new(f))?))
        }
        None => None,
    };
    let params = BackendParams {
        iters: a.iters,
        table_size: a.table_size,
        format: a.format,
        interp: a.interp,
        table,
    };
    let b = Backend::build(a.backend, &params)?;
    let pose = b.pose(&cf.chain)?;
    let mut s = String::new();
    let _ = writeln!(s, "chain {} ({} joints)", cf.name, cf.chain.len());
    let _ = writeln!(s, "backend {} ({})", b.kind(), b.describe());
    s.push_str(&fmt_matrix(&pose));
    if let Some(p) = cf.point {
        let q = pose.apply(p);
        let _ = writeln!(s, "point {:.6} {:.6} {:.6}", q.x, q.y, q.z);
    }
    if b.kind() != BackendKind::Matrix {
        let dev = pose.max_abs_diff(&chain_pose(&cf.chain)?);
        let _ = writeln!(s, "max deviation from matrix {dev:.6e}");
    }
    Ok(s)
}

/// One CSV row of [`cmd_bench`].
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub backend: BackendKind,
    pub max_err: f64,
    pub rms_err: f64,
    pub ops_per_pose: usize,
    pub model_latency_us: f64,
}

impl BenchRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{:.6e},{:.6e},{},{:.6e}",
            self.backend, self.max_err, self.rms_err, self.ops_per_pose, self.model_latency_us
        )
    }
}

/// Seeded joint-variable sweep: rotary angles uniform on `[−π, π)`,
/// prismatic offsets uniform on `[0, 1)`.
pub fn sweep(c: &DhChain<f64>, trials: usize, seed: u64) -> Vec<DhChain<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials)
        .map(|_| {
            let q: Vec<f64> = c
                .joints
                .iter()
                .map(|j| match j.kind {
                    JointKind::Rotary => rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
                    JointKind::Prismatic => rng.gen_range(0.0..1.0),
                })
                .collect();
            c.with_variables(&q).expect("one variable per joint")
        })
        .collect()
}

pub fn bench_rows(c: &DhChain<f64>, kinds: &[BackendKind], trials: usize, seed: u64) -> Result<Vec<BenchRow>> {
    if trials == 0 {
        return Err(Error::Config("bench needs at least one trial".into()));
    }
    let configs = sweep(c, trials, seed);
    let oracles = configs.iter().map(chain_pose).collect::<Result<Vec<_>>>()?;
    kinds
        .par_iter()
        .map(|&k| {
            let b = Backend::build(k, &BackendParams::default())?;
            let (mut max, mut sq) = (0.0f64, 0.0f64);
            for (cfg, o) in configs.iter().zip(&oracles) {
                let p = b.pose(cfg)?;
                for (pr, orow) in p.rows().iter().zip(o.rows()).take(3) {
                    for (x, y) in pr.iter().zip(orow) {
                        let e = (x - y).abs();
                        max = max.max(e);
                        sq += e * e;
                    }
                }
            }
            Ok(BenchRow {
                backend: k,
                max_err: max,
                rms_err: (sq / (12 * trials) as f64).sqrt(),
                ops_per_pose: b.ops_per_pose(c.len()),
                model_latency_us: b.model_latency_us(c.len()),
            })
        })
        .collect()
}

pub fn cmd_bench(a: &BenchArgs) -> Result<String> {
    let cf = read_chain(&a.chain_file)?;
    let rows = bench_rows(&cf.chain, &a.backends, a.trials, a.seed)?;
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.csv());
        s.push('\n');
    }
    Ok(s)
}

pub fn cmd_pipeline(a: &PipelineArgs) -> Result<String> {
    if a.links == 0 {
        return Err(Error::Config("--links must be at least 1".into()));
    }
    let mut s = String::from("links processors latency_us\n");
    for n in 1..=a.links {
        let r = LatencyReport::for_links(n)?;
        let _ = writeln!(s, "{:>5} {:>10} {:>10}", r.n_links, r.processors, r.latency_us);
    }
    Ok(s)
}

pub fn cmd_vm(a: &VmArgs) -> Result<String> {
    let th: [f64; 4] = a
        .angles
        .as_slice()
        .try_into()
        .map_err(|_| Error::Config(format!("--angles needs 4 values, got {}", a.angles.len())))?;
    let k: [f64; 5] = a
        .params
        .as_slice()
        .try_into()
        .map_err(|_| Error::Config(format!("--params needs 5 values (a0,a1,a2,a3,d1), got {}", a.params.len())))?;
    let unit = match a.sincos.as_str() {
        "exact" => SinCosUnit::Exact,
        "cordic" => SinCosUnit::Cordic(Default::default()),
        "taylor" => SinCosUnit::Taylor(Default::default()),
        "lut" => SinCosUnit::Lut(Arc::new(build_table(
            crate::backend::DEFAULT_TABLE_SIZE,
            crate::backend::DEFAULT_TABLE_FORMAT,
            crate::backend::DEFAULT_INTERP,
        )?)),
        other => return Err(Error::Config(format!("unknown sincos unit `{other}`"))),
    };
    let hw = VmConfig {
        half_sized: a.half_sized,
        sincos_cycles: a.sincos_cycles,
        unit,
    };
    let prog = umdh_program();
    let p = UmdhParams::new(k[0], k[1], k[2], k[3], k[4]);
    let (pose, cycles) = vm_run(&prog, th, &p, &hw)?;
    let mut s = String::new();
    if a.listing {
        s.push_str(&prog.to_string());
    }
    s.push_str(&fmt_matrix(&pose));
    let _ = writeln!(s, "instructions {}", prog.len());
    let _ = writeln!(s, "arithmetic ops {}", prog.arith_ops());
    let _ = writeln!(s, "register pressure {}", register_pressure(&prog));
    let _ = writeln!(s, "cycles {cycles}");
    let _ = writeln!(s, "time_us {:.6} at {DEFAULT_CLOCK_MHZ} MHz", clock_time(cycles, DEFAULT_CLOCK_MHZ));
    Ok(s)
}

pub fn cmd_table(a: &TableArgs) -> Result<String> {
    let t = build_table(a.size, a.format, a.interp)?;
    let f = fs::File::create(&a.out).map_err(|e| Error::Io(format!("{}: {e}", a.out.display())))?;
    let mut w = std::io::BufWriter::new(f);
    dump_table(&t, &mut w)?;
    w.flush()?;
    Ok(format!("wrote {} entries ({}) to {}\n", t.n_entries(), t.fmt(), a.out.display()))
}

pub fn execute(cmd: &Command) -> Result<String> {
    match cmd {
        Command::Solve(a) => cmd_solve(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Pipeline(a) => cmd_pipeline(a),
        Command::Vm(a) => cmd_vm(a),
        Command::Table(a) => cmd_table(a),
    }
}

/// Parse `args`, run, and return the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let target: &mut dyn Write = if code == 0 { out } else { err };
            let _ = write!(target, "{e}");
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(s) => {
            let _ = out.write_all(s.as_bytes());
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if let Error::Capacity { needed, available } = e {
                let _ = writeln!(
                    err,
                    "register pressure {needed} exceeds the {available}-entry register file"
                );
            }
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_minimal() {
        let cf = parse_chain("# demo\nname two link\njoint R 0.5 0 1 0\njoint P 0 0.2 0 1.5\npoint 1 2 3\n").unwrap();
        assert_eq!(cf.name, "two link");
        assert_eq!(cf.chain.len(), 2);
        assert_eq!(cf.chain.joints[1].kind, JointKind::Prismatic);
        assert_eq!(cf.point, Some(Vec4::point(1.0, 2.0, 3.0)));
    }

    #[test]
    fn parse_errors_have_positions() {
        let cases = [
            ("joint R 0 0 0\n", 1, 1),
            ("joint X 0 0 0 0\n", 1, 7),
            ("\n  joint R 0 zero 0 0\n", 2, 13),
            ("frame 1\n", 1, 1),
            ("# nothing\n", 1, 1),
            ("joint R 0 0 0 inf\n", 1, 15),
        ];
        for (text, line, column) in cases {
            match parse_chain(text) {
                Err(Error::Parse { line: l, column: c, .. }) => {
                    assert_eq!((l, c), (line, column), "{text:?}")
                }
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&perr(1, 1, "x")), EXIT_PARSE);
        assert_eq!(exit_code(&Error::Domain("x".into())), EXIT_DOMAIN);
        assert_eq!(exit_code(&Error::Capacity { needed: 20, available: 16 }), EXIT_CAPACITY);
    }

    #[test]
    fn bench_is_deterministic() {
        let cf = parse_chain("joint R 0 0 1 0\njoint R 0 0 1 0\n").unwrap();
        let kinds = BackendKind::ALL;
        let a = bench_rows(&cf.chain, &kinds, 20, 7).unwrap();
        let b = bench_rows(&cf.chain, &kinds, 20, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iter().map(|r| r.backend).collect::<Vec<_>>(), kinds);
        assert_eq!(a[0].max_err, 0.0);
    }

    #[test]
    fn pipeline_table() {
        let s = cmd_pipeline(&PipelineArgs { links: 10 }).unwrap();
        let rows: Vec<&str> = s.lines().collect();
        assert_eq!(rows.len(), 11);
        assert!(rows[1].split_whitespace().eq(["1", "4", "200"]));
        assert!(rows[6].split_whitespace().eq(["6", "24", "600"]));
        assert!(rows[10].split_whitespace().eq(["10", "40", "920"]));
    }
}
