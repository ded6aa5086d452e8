//! The `nystrom-dlp` command line front end.
//!
//! Exit codes: 0 on success, 2 for usage errors (bad flags, out-of-range
//! values, unwritable outputs), 3 for numerical failures. Every command that
//! writes files also writes a `<stem>.manifest.json` naming them.

use std::ffi::OsString;
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::contour::Contour;
use crate::dlp::Rhs;
use crate::error::{Error, Result};
use crate::localop::{sigma_min_study, write_sigma_min_csv};
use crate::mellin::{fredholm_profile, fredholm_scan, mellin_transform_check, DEFAULT_Z_MAX, DEFAULT_Z_STEPS};
use crate::nystrom::{
    assemble, condition_of, convergence_study, solve_system, write_convergence_csv, ConditionMethod, Discretization,
};
use crate::quadrature::QuadratureRule;
use crate::sweep::{run_sweep, write_samples_csv, Curve, SweepConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// An angle flag: `0.3pi` (multiples of π) or plain radians.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Angle {
    pub text: String,
    pub radians: f64,
}

impl FromStr for Angle {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let t = s.trim();
        let radians = match t.strip_suffix("pi") {
            Some("") => std::f64::consts::PI,
            Some(m) => m.trim().parse::<f64>().map_err(|e| format!("bad angle {s:?}: {e}"))? * std::f64::consts::PI,
            None => t.parse::<f64>().map_err(|e| format!("bad angle {s:?}: {e}"))?,
        };
        if !radians.is_finite() {
            return Err(format!("angle {s:?} is not finite"));
        }
        Ok(Self { text: t.to_string(), radians })
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

fn parse_list<T: FromStr>(s: &str) -> std::result::Result<Vec<T>, String>
where
    T::Err: fmt::Display,
{
    s.split(',').map(|p| p.trim().parse::<T>().map_err(|e| format!("bad list entry {p:?}: {e}"))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveArg {
    L1,
    L2,
    Ellipse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Svd,
    Lanczos,
}

impl From<MethodArg> for ConditionMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Svd => ConditionMethod::Svd,
            MethodArg::Lanczos => ConditionMethod::Lanczos,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "nystrom-dlp", version, about = "Nyström solver and stability analysis for the double layer potential equation")]
pub struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "NYSTROM_DLP_WORKERS")]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CurveFlags {
    #[arg(long, value_enum)]
    pub curve: CurveArg,
    /// Corner opening angle, e.g. `0.3pi` or `0.94`.
    #[arg(long)]
    pub omega: Option<Angle>,
    /// Ellipse semi-axes.
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
}

impl CurveFlags {
    fn build(&self) -> Result<Contour> {
        let omega = || {
            self.omega
                .as_ref()
                .map(|a| a.radians)
                .ok_or_else(|| Error::InvalidArgument("--omega is required for l1 and l2".into()))
        };
        match self.curve {
            CurveArg::L1 => Contour::curve_l1(omega()?),
            CurveArg::L2 => Contour::curve_l2(omega()?),
            CurveArg::Ellipse => Contour::curve_ellipse(self.a, self.b),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve (I + V)x = f and write `s,Re_x,Im_x`.
    Solve(SolveArgs),
    /// Convergence table `n,E_n`.
    Converge(ConvergeArgs),
    /// Spectral condition number of the Nyström matrix.
    Cond(CondArgs),
    /// Condition-number sweep over the opening angle.
    Sweep(SweepArgs),
    /// Minimum of |det| of the Mellin symbol along the L² line.
    Fredholm(FredholmArgs),
    /// Finite sections of the local wedge operator.
    LocalOp(LocalOpArgs),
    /// Numerical Mellin transform of k_ω against the closed-form symbol.
    MellinCheck(MellinCheckArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SolveArgs {
    #[command(flatten)]
    pub curve: CurveFlags,
    #[arg(long, default_value = "f1")]
    pub rhs: String,
    #[arg(long, default_value_t = 128)]
    pub n: usize,
    #[arg(long, default_value_t = 16)]
    pub d: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub curve: CurveFlags,
    #[arg(long, default_value = "f1")]
    pub rhs: String,
    #[arg(long, default_value_t = 16)]
    pub d: usize,
    #[arg(long = "n-list", default_value = "32,96,256")]
    pub n_list: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CondArgs {
    #[command(flatten)]
    pub curve: CurveFlags,
    #[arg(long, default_value_t = 128)]
    pub n: usize,
    #[arg(long, default_value_t = 16)]
    pub d: usize,
    #[arg(long, value_enum, default_value = "svd")]
    pub method: MethodArg,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long)]
    pub curve: String,
    #[arg(long = "omega-lo", default_value = "0.1pi")]
    pub omega_lo: Angle,
    #[arg(long = "omega-hi", default_value = "1.9pi")]
    pub omega_hi: Angle,
    /// Grid step; `--desk` switches the default to 0.005pi.
    #[arg(long)]
    pub step: Option<Angle>,
    #[arg(long)]
    pub desk: bool,
    #[arg(long, default_value_t = 128)]
    pub n: usize,
    #[arg(long, default_value_t = 16)]
    pub d: usize,
    #[arg(long = "kappa-star", default_value_t = 1e16)]
    pub kappa_star: f64,
    #[arg(long = "width-floor", default_value = "0.000001pi")]
    pub width_floor: Angle,
    #[arg(long = "max-rounds", default_value_t = 40)]
    pub max_rounds: usize,
    #[arg(long, value_enum, default_value = "lanczos")]
    pub method: MethodArg,
    /// Samples CSV; the JSON report goes next to it as `<stem>.report.json`.
    #[arg(long)]
    pub out: PathBuf,
}

impl SweepArgs {
    pub fn config(&self) -> Result<SweepConfig> {
        let curve: Curve = self.curve.parse()?;
        let base = if self.desk { SweepConfig::desk(curve) } else { SweepConfig::new(curve) };
        let config = SweepConfig {
            omega_lo: self.omega_lo.radians,
            omega_hi: self.omega_hi.radians,
            step: self.step.as_ref().map_or(base.step, |s| s.radians),
            n: self.n,
            d: self.d,
            kappa_star: self.kappa_star,
            width_floor: self.width_floor.radians,
            max_rounds: self.max_rounds,
            method: self.method.into(),
            ..base
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FredholmArgs {
    #[arg(long)]
    pub omega: Angle,
    #[arg(long = "z-max", default_value_t = DEFAULT_Z_MAX)]
    pub z_max: f64,
    #[arg(long = "z-steps", default_value_t = DEFAULT_Z_STEPS)]
    pub z_steps: usize,
    /// Optional `z,absdet` profile CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LocalOpArgs {
    #[arg(long)]
    pub omega: Angle,
    #[arg(long, default_value_t = 16)]
    pub d: usize,
    #[arg(long = "N", default_value = "16,32,64")]
    pub panels: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MellinCheckArgs {
    #[arg(long)]
    pub omega: Angle,
    #[arg(long, default_value = "-2,-1,0,1,2", allow_hyphen_values = true)]
    pub z: String,
}

/// Run record written next to every set of output files.
#[derive(Debug, Serialize)]
pub struct RunManifest<'a, C: Serialize> {
    pub command: &'a str,
    pub config: &'a C,
    pub version: &'a str,
    pub workers: Option<usize>,
    pub wall_time_s: f64,
    pub outputs: Vec<String>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Numerical(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Usage(format!("cannot write {}: {e}", path.display()))
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Sibling of `path` with the extension replaced by `suffix`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> std::result::Result<(), CliError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).map_err(io_err(path))
}

struct Context {
    workers: Option<usize>,
    start: Instant,
}

impl Context {
    fn manifest<C: Serialize>(&self, command: &str, config: &C, primary: &Path, outputs: &[&Path]) -> std::result::Result<(), CliError> {
        let manifest_path = sibling(primary, "manifest.json");
        let manifest = RunManifest {
            command,
            config,
            version: env!("CARGO_PKG_VERSION"),
            workers: self.workers,
            wall_time_s: self.start.elapsed().as_secs_f64(),
            outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
        };
        write_file(&manifest_path, |w| {
            serde_json::to_writer_pretty(&mut *w, &manifest).map_err(std::io::Error::other)?;
            writeln!(w)
        })
    }
}

/// Human-facing number: 6 significant digits.
fn h(x: f64) -> String {
    format!("{x:.5e}")
}

fn parse_rhs(s: &str) -> std::result::Result<Rhs, CliError> {
    Ok(s.parse::<Rhs>()?)
}

fn cmd_solve(ctx: &Context, args: &SolveArgs) -> std::result::Result<(), CliError> {
    let rhs = parse_rhs(&args.rhs)?;
    let disc = Discretization::gauss(args.curve.build()?, args.d, args.n)?;
    let solution = solve_system(&assemble(&disc, rhs)?)?;
    write_file(&args.out, |w| {
        writeln!(w, "s,Re_x,Im_x")?;
        for (i, v) in solution.values.iter().enumerate() {
            writeln!(w, "{:.16e},{:.16e},{:.16e}", disc.target_param(i), v.re, v.im)?;
        }
        Ok(())
    })?;
    println!("{}: {} unknowns written to {}", disc.contour().label(), disc.size(), args.out.display());
    ctx.manifest("solve", args, &args.out, &[&args.out])
}

fn cmd_converge(ctx: &Context, args: &ConvergeArgs) -> std::result::Result<(), CliError> {
    let rhs = parse_rhs(&args.rhs)?;
    let n_list: Vec<usize> = parse_list(&args.n_list).map_err(usage)?;
    let rows = convergence_study(&args.curve.build()?, rhs, args.d, &n_list)?;
    println!("n\tE_n");
    for r in &rows {
        println!("{}\t{}", r.n, h(r.error));
    }
    if let Some(out) = &args.out {
        write_file(out, |w| write_convergence_csv(&rows, w))?;
        ctx.manifest("converge", args, out, &[out])?;
    }
    Ok(())
}

fn cmd_cond(args: &CondArgs) -> std::result::Result<(), CliError> {
    let kappa = condition_of(&args.curve.build()?, args.n, args.d, args.method.into())?;
    println!("kappa = {}", h(kappa));
    Ok(())
}

fn cmd_sweep(ctx: &Context, args: &SweepArgs) -> std::result::Result<(), CliError> {
    let config = args.config()?;
    let report = run_sweep(&config)?;
    let report_path = sibling(&args.out, "report.json");
    write_file(&args.out, |w| write_samples_csv(&report.samples, w))?;
    write_file(&report_path, |w| {
        serde_json::to_writer_pretty(&mut *w, &report).map_err(std::io::Error::other)?;
        writeln!(w)
    })?;
    println!("{} samples, {} peaks", report.samples.len(), report.peaks.len());
    for p in &report.peaks {
        println!("  omega = {} pi  kappa = {}  {:?}", h(p.omega_over_pi), h(p.kappa_peak), p.status);
    }
    ctx.manifest("sweep", &config, &args.out, &[&args.out, &report_path])
}

fn cmd_fredholm(ctx: &Context, args: &FredholmArgs) -> std::result::Result<(), CliError> {
    let scan = fredholm_scan(args.omega.radians, args.z_max, args.z_steps)?;
    println!("min |det| = {} at z = {}", h(scan.min_abs_det), h(scan.argmin_z));
    if let Some(out) = &args.out {
        let profile = fredholm_profile(args.omega.radians, args.z_max, args.z_steps)?;
        write_file(out, |w| {
            writeln!(w, "z,absdet")?;
            for (z, v) in &profile {
                writeln!(w, "{z:.16e},{v:.16e}")?;
            }
            Ok(())
        })?;
        ctx.manifest("fredholm", args, out, &[out])?;
    }
    Ok(())
}

fn cmd_local_op(ctx: &Context, args: &LocalOpArgs) -> std::result::Result<(), CliError> {
    let panels: Vec<usize> = parse_list(&args.panels).map_err(usage)?;
    let rule = QuadratureRule::gauss_legendre(args.d)?;
    let study = sigma_min_study(args.omega.radians, &rule, &panels)?;
    println!("N\tsigma_min\tcond\tstabilized");
    for r in &study.rows {
        let flag = r.stabilized.map(|b| b.to_string()).unwrap_or_else(|| "-".into());
        println!("{}\t{}\t{}\t{}", r.panels, h(r.sigma_min), h(r.cond), flag);
    }
    if let Some(out) = &args.out {
        write_file(out, |w| write_sigma_min_csv(&study, w))?;
        ctx.manifest("local-op", args, out, &[out])?;
    }
    Ok(())
}

fn cmd_mellin_check(args: &MellinCheckArgs) -> std::result::Result<(), CliError> {
    let zs: Vec<f64> = parse_list(&args.z).map_err(usage)?;
    let dev = mellin_transform_check(args.omega.radians, &zs)?;
    println!("max deviation = {}", h(dev));
    Ok(())
}

fn dispatch(ctx: &Context, command: &Command) -> std::result::Result<(), CliError> {
    match command {
        Command::Solve(a) => cmd_solve(ctx, a),
        Command::Converge(a) => cmd_converge(ctx, a),
        Command::Cond(a) => cmd_cond(a),
        Command::Sweep(a) => cmd_sweep(ctx, a),
        Command::Fredholm(a) => cmd_fredholm(ctx, a),
        Command::LocalOp(a) => cmd_local_op(ctx, a),
        Command::MellinCheck(a) => cmd_mellin_check(a),
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if cli.workers == Some(0) {
        eprintln!("error: --workers must be at least 1");
        return EXIT_USAGE;
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cli.workers {
        builder = builder.num_threads(w);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return EXIT_NUMERICAL;
        }
    };
    let ctx = Context { workers: cli.workers, start: Instant::now() };
    match pool.install(|| dispatch(&ctx, &cli.command)) {
        Ok(()) => EXIT_OK,
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            EXIT_USAGE
        }
        Err(CliError::Numerical(m)) => {
            eprintln!("error: {m}");
            EXIT_NUMERICAL
        }
    }
}
