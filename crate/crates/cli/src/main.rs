//! `aim`: command-line front end for tau-functions of almost intertwining
//! matrix triples.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aim_core::baker::{check_polynomiality, default_nodes, psi, soliton_conditions_for_triple};
use aim_core::eigenflow::{flow_state, integrate_rs, qdot, track_eigenvalues, Trajectory};
use aim_core::io::{
    comparison_csv, grid_csv, read_spectral, read_triple, trajectory_csv, triple_to_json, OutputFormat, RunConfig,
    VerificationReport,
};
use aim_core::matrix_kernel::singular_values;
use aim_core::registry::{CheckConfig, Registry};
use aim_core::rng::SeededRng;
use aim_core::suite::run_suite;
use aim_core::tau_engine::{rational_polynomial_check, soliton_sum_tau, tau, tau_hat, u_field, TimeVector};
use aim_core::triples::{rational_example, soliton_triple, Triple};
use aim_core::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;

#[derive(Parser)]
#[command(
    name = "aim",
    version,
    about = "KP tau-functions from almost intertwining matrix triples"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Seed for every random draw.
    #[arg(long, global = true, env = "AIM_SEED", default_value_t = 0)]
    seed: u64,
    /// Overrides the tolerance of the selected check.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Relative singular value cutoff for kappa.
    #[arg(long, global = true, default_value_t = aim_core::matrix_kernel::DEFAULT_RANK_TOL)]
    tol_rank: f64,
    /// Highest time index accepted in --times.
    #[arg(long, global = true, default_value_t = aim_core::time::DEFAULT_MAX_INDEX)]
    max_time_index: usize,
    /// Write the main output here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Report format; grids and trajectories are always CSV.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Print kappa and the singular values of XZ - YX.
    Rank(TripleArg),
    /// Evaluate det(X exp(g(Z)) + exp(g(Y))).
    Tau(TauArgs),
    /// Evaluate the gauge-reduced tau.
    TauHat(TauArgs),
    /// Hirota bilinear identity at seeded sample points.
    Hirota(SampledArgs),
    /// H(a, b, c) on a grid; --closed-form compares with the 2x2 formula.
    Hpoly(HpolyArgs),
    /// Build a soliton triple from spectral data and cross-check the oracle.
    Soliton(SolitonArgs),
    /// Emit the 3x3 rational example, or verify it with --verify.
    RationalExample(RationalArgs),
    /// N-KdV factorization of tau.
    KdvCheck(KdvArgs),
    /// Baker-Akhiezer function: tau quotient, polynomiality, soliton conditions.
    Ba(BaArgs),
    /// KP equation residual at seeded points.
    KpResidual(KpArgs),
    /// u = factor * (log tau)_xx on a grid, as CSV.
    UGrid(UGridArgs),
    /// Eigenvalue trajectories under the t_1 flow.
    Eigenflow(EigenflowArgs),
    /// Seeded random triple from a named generator.
    Gen(GenArgs),
    /// Run any registered check by name.
    Check(CheckArgs),
    /// List registered checks and generators.
    List,
    /// Run the full acceptance suite.
    Suite,
}

#[derive(Args)]
struct TripleArg {
    #[arg(long)]
    triple: PathBuf,
}

#[derive(Args)]
struct TauArgs {
    #[arg(long)]
    triple: PathBuf,
    /// Comma-separated t_1, t_2, ...; entries like 0.3 or 0.1+0.2i.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    times: Vec<C64>,
}

#[derive(Args)]
struct SampledArgs {
    #[arg(long)]
    triple: PathBuf,
    #[arg(long, default_value_t = 10)]
    samples: usize,
}

#[derive(Args)]
struct HpolyArgs {
    #[arg(long)]
    triple: PathBuf,
    #[arg(long)]
    closed_form: bool,
    #[arg(long, default_value_t = 20)]
    samples: usize,
}

#[derive(Args)]
struct SolitonArgs {
    #[arg(long)]
    spectral: PathBuf,
    /// Compare this triple against the oracle instead of the built one.
    #[arg(long)]
    triple: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    samples: usize,
    /// Also write the built triple.
    #[arg(long)]
    write_triple: Option<PathBuf>,
}

#[derive(Args)]
struct RationalArgs {
    #[arg(long, default_value = "2", allow_hyphen_values = true)]
    lambda: C64,
    #[arg(long)]
    verify: bool,
    #[arg(long, default_value_t = 20)]
    samples: usize,
}

#[derive(Args)]
struct KdvArgs {
    #[arg(long)]
    triple: PathBuf,
    #[arg(long, default_value_t = 2)]
    n_power: u32,
    #[arg(long, default_value_t = 10)]
    samples: usize,
}

#[derive(Args)]
struct BaArgs {
    #[arg(long)]
    triple: PathBuf,
    /// Spectral data whose soliton conditions the triple should satisfy.
    #[arg(long)]
    spectral: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    samples: usize,
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        default_value = "-1,0,0.5,2"
    )]
    xs: Vec<f64>,
    /// Write psi on the interpolation nodes as CSV.
    #[arg(long)]
    grid: Option<PathBuf>,
}

#[derive(Args)]
struct KpArgs {
    #[arg(long)]
    triple: PathBuf,
    #[arg(long, default_value_t = 20)]
    samples: usize,
    #[arg(long, default_value_t = 2.0)]
    factor: f64,
}

#[derive(Args)]
struct UGridArgs {
    #[arg(long)]
    triple: PathBuf,
    /// start:end:count
    #[arg(long, default_value = "-2:2:9", allow_hyphen_values = true)]
    xs: String,
    #[arg(long, default_value = "0:0:1", allow_hyphen_values = true)]
    ys: String,
    #[arg(long, default_value = "0:0:1", allow_hyphen_values = true)]
    ts: String,
    #[arg(long, default_value_t = 2.0)]
    factor: f64,
}

#[derive(Args)]
struct EigenflowArgs {
    #[arg(long)]
    triple: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    t_end: f64,
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    /// Integrate the RS system alongside and compare.
    #[arg(long, requires = "lambda")]
    compare_rs: bool,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<C64>,
}

#[derive(Args)]
struct GenArgs {
    /// Generator name; see `aim list`.
    #[arg(long, default_value = "soliton")]
    kind: String,
    #[arg(long, default_value_t = 3)]
    n: usize,
}

#[derive(Args)]
struct CheckArgs {
    /// Check name; see `aim list`.
    #[arg(long)]
    name: String,
    #[arg(long)]
    triple: PathBuf,
    #[arg(long, default_value_t = 10)]
    samples: usize,
}

/// Anything that ends the run early with exit code 2.
struct Fatal(String);

impl From<Error> for Fatal {
    fn from(e: Error) -> Self {
        Fatal(e.to_string())
    }
}

enum Outcome {
    Pass,
    Fail,
}

impl Outcome {
    fn of(pass: bool) -> Self {
        if pass {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }
}

struct Ctx {
    run: RunConfig,
    tol: Option<f64>,
    registry: Registry,
}

impl Ctx {
    fn check_config(&self, samples: usize) -> CheckConfig {
        CheckConfig {
            seed: self.run.seed,
            samples,
            tolerance: self.tol,
            ..CheckConfig::default()
        }
    }

    fn emit(&self, text: &str) -> Result<(), Fatal> {
        match &self.run.output_path {
            Some(p) => std::fs::write(p, text).map_err(|e| Fatal(format!("{}: {e}", p.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    fn emit_reports(&self, reports: &[VerificationReport]) -> Result<Outcome, Fatal> {
        for r in reports {
            eprintln!("{}", r.summary());
        }
        let text = match self.run.format {
            OutputFormat::Csv => {
                let mut out = String::from("check_name,instances,max_relative_residual,tolerance,failures,pass\n");
                for r in reports {
                    writeln!(
                        out,
                        "{},{},{:e},{:e},{},{}",
                        r.check_name,
                        r.instances,
                        r.max_relative_residual,
                        r.tolerance,
                        r.failures.len(),
                        r.pass
                    )
                    .expect("string write");
                }
                out
            }
            OutputFormat::Json if reports.len() == 1 => reports[0].to_json(),
            OutputFormat::Json => serde_json::to_string_pretty(reports).expect("reports serialize") + "\n",
        };
        self.emit(&text)?;
        Ok(Outcome::of(reports.iter().all(|r| r.pass)))
    }

    fn run_check(&self, name: &str, m: &Triple, cfg: &CheckConfig) -> Result<VerificationReport, Fatal> {
        let check = self.registry.check(name).ok_or_else(|| {
            Fatal(format!(
                "unknown check {name:?}; known: {}",
                self.registry.check_names().join(", ")
            ))
        })?;
        Ok(check.run(m, cfg)?)
    }
}

fn load(path: &Path) -> Result<Triple, Fatal> {
    read_triple(path).map_err(|e| Fatal(format!("{}: {e}", path.display())))
}

fn parse_range(text: &str) -> Result<Vec<f64>, Fatal> {
    let bad = || Fatal(format!("range {text:?}: expected start:end:count"));
    let parts: Vec<&str> = text.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(bad());
    };
    let (a, b): (f64, f64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
    let n: usize = n.parse().map_err(|_| bad())?;
    Ok(match n {
        0 => return Err(bad()),
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    })
}

fn fmt_c(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn times_vector(ctx: &Ctx, values: &[C64]) -> Result<TimeVector, Fatal> {
    if values.len() > ctx.run.max_time_index {
        return Err(Fatal(format!(
            "--times has {} entries, more than --max-time-index {}",
            values.len(),
            ctx.run.max_time_index
        )));
    }
    Ok(TimeVector::from_slice(values)?)
}

fn cmd_rank(ctx: &Ctx, a: &TripleArg) -> Result<Outcome, Fatal> {
    let m = load(&a.triple)?;
    let sv = singular_values(&m.defect());
    let kappa = m.kappa_with_tol(ctx.run.tol_rank);
    let out = serde_json::json!({ "n": m.n(), "kappa": kappa, "singular_values": sv });
    ctx.emit(&(serde_json::to_string_pretty(&out).expect("json") + "\n"))?;
    Ok(Outcome::Pass)
}

fn cmd_tau(ctx: &Ctx, a: &TauArgs, hat: bool) -> Result<Outcome, Fatal> {
    let m = load(&a.triple)?;
    let t = times_vector(ctx, &a.times)?;
    let v = if hat { tau_hat(&m, &t)? } else { tau(&m, &t)? };
    let key = if hat { "tau_hat" } else { "tau" };
    let out = serde_json::json!({ key: fmt_c(v) });
    ctx.emit(&(serde_json::to_string_pretty(&out).expect("json") + "\n"))?;
    Ok(Outcome::Pass)
}

fn cmd_soliton(ctx: &Ctx, a: &SolitonArgs) -> Result<Outcome, Fatal> {
    let data = read_spectral(&a.spectral).map_err(|e| Fatal(format!("{}: {e}", a.spectral.display())))?;
    let built = soliton_triple(&data)?;
    if let Some(p) = &a.write_triple {
        std::fs::write(p, triple_to_json(&built)).map_err(|e| Fatal(format!("{}: {e}", p.display())))?;
    }
    let m = match &a.triple {
        Some(p) => load(p)?,
        None => built,
    };
    if m.n() != data.n() {
        return Err(Fatal(format!(
            "triple has n = {}, spectral data has n = {}",
            m.n(),
            data.n()
        )));
    }
    let mut rng = SeededRng::with_stream(ctx.run.seed, 20);
    let mut report = VerificationReport::new("soliton-oracle", ctx.tol.unwrap_or(1e-9));
    for k in 0..a.samples {
        let mut t = TimeVector::zero();
        for i in [1, 2, 3, 5] {
            t.set(i, rng.disk(1.0))?;
        }
        let (x, y) = (tau_hat(&m, &t)?, soliton_sum_tau(&data, &t)?);
        let scale = x.norm().max(y.norm());
        report.record(
            format!("sample {k}"),
            if scale == 0.0 { 0.0 } else { (x - y).norm() / scale },
        );
    }
    ctx.emit_reports(&[report])
}

fn cmd_rational(ctx: &Ctx, a: &RationalArgs) -> Result<Outcome, Fatal> {
    let m = rational_example(a.lambda);
    if !a.verify {
        ctx.emit(&triple_to_json(&m))?;
        return Ok(Outcome::Pass);
    }
    let mut kappa = VerificationReport::new("rational-kappa", 0.0);
    kappa.record(format!("kappa = {}", m.kappa()), if m.kappa() <= 1 { 0.0 } else { 1.0 });
    let hirota = ctx.run_check("hirota", &m, &ctx.check_config(a.samples))?;
    let fit = rational_polynomial_check(a.lambda, ctx.run.seed)?;
    let mut poly = VerificationReport::new("rational-polynomial-fit", ctx.tol.unwrap_or(1e-7));
    poly.record("degree-4 fit, holdout", fit.fit_deviation);
    poly.note("printed_polynomial_deviation", fit.printed_deviation);
    ctx.emit_reports(&[kappa, hirota, poly])
}

fn cmd_ba(ctx: &Ctx, a: &BaArgs) -> Result<Outcome, Fatal> {
    let m = load(&a.triple)?;
    let mut reports = vec![ctx.run_check("japanese-formula", &m, &ctx.check_config(a.samples))?];
    let nodes = default_nodes(&m);
    let mut poly = VerificationReport::new("polynomiality", ctx.tol.unwrap_or(1e-8));
    for &x in &a.xs {
        match check_polynomiality(&m, x, &nodes) {
            Ok(d) => poly.record(format!("x={x}"), d),
            Err(e @ Error::SingularTau { .. }) => poly.record_error(format!("x={x}"), &e),
            Err(e) => return Err(e.into()),
        }
    }
    reports.push(poly);
    if let Some(p) = &a.spectral {
        let data = read_spectral(p).map_err(|e| Fatal(format!("{}: {e}", p.display())))?;
        let mut cond = VerificationReport::new("soliton-conditions", ctx.tol.unwrap_or(1e-8));
        for &x in &a.xs {
            for (i, v) in soliton_conditions_for_triple(&m, &data, x)?.into_iter().enumerate() {
                cond.record(format!("x={x} i={i}"), v);
            }
        }
        reports.push(cond);
    }
    if let Some(p) = &a.grid {
        let mut csv = String::from("x,re_z,im_z,re_psi,im_psi\n");
        for &x in &a.xs {
            for &z in &nodes {
                let e = psi(&m, x, z)?;
                writeln!(csv, "{x},{},{},{},{}", z.re, z.im, e.psi.re, e.psi.im).expect("string write");
            }
        }
        std::fs::write(p, csv).map_err(|e| Fatal(format!("{}: {e}", p.display())))?;
    }
    ctx.emit_reports(&reports)
}

fn cmd_u_grid(ctx: &Ctx, a: &UGridArgs) -> Result<Outcome, Fatal> {
    let m = load(&a.triple)?;
    let (xs, ys, ts) = (parse_range(&a.xs)?, parse_range(&a.ys)?, parse_range(&a.ts)?);
    let grid = u_field(&m, &xs, &ys, &ts, a.factor)?;
    ctx.emit(&grid_csv(&grid))?;
    Ok(Outcome::Pass)
}

fn cmd_eigenflow(ctx: &Ctx, a: &EigenflowArgs) -> Result<Outcome, Fatal> {
    if !(a.step > 0.0 && a.t_end > 0.0) {
        return Err(Fatal("--step and --t-end must be positive".into()));
    }
    let m = load(&a.triple)?;
    let count = (a.t_end / a.step).round() as usize;
    let times: Vec<f64> = (0..=count).map(|k| k as f64 * a.step).collect();
    let direct = track_eigenvalues(&m, &times)?;
    report_collision(&direct);
    let Some(lambda) = a.lambda.filter(|_| a.compare_rs) else {
        ctx.emit(&trajectory_csv(&direct))?;
        return Ok(Outcome::of(direct.collision.is_none()));
    };
    let s0 = flow_state(&m, 0.0)?;
    let ode = integrate_rs(&s0.q, &qdot(&s0), lambda, times[count], a.step)?;
    report_collision(&ode);
    ctx.emit(&comparison_csv(&direct, &ode, "ode"))?;
    let tol = ctx.tol.unwrap_or(1e-6);
    let dev = if direct.len() == ode.len() {
        direct.max_deviation(&ode)
    } else {
        f64::INFINITY
    };
    eprintln!("max deviation {dev:.3e} (tolerance {tol:.1e})");
    Ok(Outcome::of(
        dev <= tol && direct.collision.is_none() && ode.collision.is_none(),
    ))
}

fn report_collision(traj: &Trajectory) {
    if let Some(c) = &traj.collision {
        eprintln!(
            "trajectory stopped at t = {}: {} (separation {:.3e})",
            c.time, c.reason, c.separation
        );
    }
}

fn cmd_gen(ctx: &Ctx, a: &GenArgs) -> Result<Outcome, Fatal> {
    let g = ctx.registry.generator(&a.kind).ok_or_else(|| {
        Fatal(format!(
            "unknown generator {:?}; known: {}",
            a.kind,
            ctx.registry.generator_names().join(", ")
        ))
    })?;
    let mut rng = SeededRng::new(ctx.run.seed);
    ctx.emit(&triple_to_json(&g.generate(a.n, &mut rng)?))?;
    Ok(Outcome::Pass)
}

fn cmd_list(ctx: &Ctx) -> Result<Outcome, Fatal> {
    let mut out = String::from("checks:\n");
    for name in ctx.registry.check_names() {
        let c = ctx.registry.check(name).expect("listed");
        writeln!(out, "  {name:<18} {}", c.description()).expect("string write");
    }
    out.push_str("generators:\n");
    for name in ctx.registry.generator_names() {
        let g = ctx.registry.generator(name).expect("listed");
        writeln!(out, "  {name:<18} {}", g.description()).expect("string write");
    }
    ctx.emit(&out)?;
    Ok(Outcome::Pass)
}

fn cmd_suite(ctx: &Ctx) -> Result<Outcome, Fatal> {
    let report = run_suite(ctx.run.seed)?;
    for c in &report.criteria {
        eprintln!(
            "criterion {} {}: {}",
            c.id,
            c.title,
            if c.pass { "PASS" } else { "FAIL" }
        );
    }
    ctx.emit(&report.to_json())?;
    Ok(Outcome::of(report.pass))
}

fn dispatch(ctx: &Ctx, command: &Command) -> Result<Outcome, Fatal> {
    match command {
        Command::Rank(a) => cmd_rank(ctx, a),
        Command::Tau(a) => cmd_tau(ctx, a, false),
        Command::TauHat(a) => cmd_tau(ctx, a, true),
        Command::Hirota(a) => {
            let r = ctx.run_check("hirota", &load(&a.triple)?, &ctx.check_config(a.samples))?;
            ctx.emit_reports(&[r])
        }
        Command::Hpoly(a) => {
            let name = if a.closed_form { "hpoly-2x2" } else { "hpoly" };
            let r = ctx.run_check(name, &load(&a.triple)?, &ctx.check_config(a.samples))?;
            ctx.emit_reports(&[r])
        }
        Command::Soliton(a) => cmd_soliton(ctx, a),
        Command::RationalExample(a) => cmd_rational(ctx, a),
        Command::KdvCheck(a) => {
            let cfg = CheckConfig {
                n_power: a.n_power,
                ..ctx.check_config(a.samples)
            };
            let r = ctx.run_check("kdv", &load(&a.triple)?, &cfg)?;
            ctx.emit_reports(&[r])
        }
        Command::Ba(a) => cmd_ba(ctx, a),
        Command::KpResidual(a) => {
            let cfg = CheckConfig {
                factor: a.factor,
                ..ctx.check_config(a.samples)
            };
            let r = ctx.run_check("kp", &load(&a.triple)?, &cfg)?;
            ctx.emit_reports(&[r])
        }
        Command::UGrid(a) => cmd_u_grid(ctx, a),
        Command::Eigenflow(a) => cmd_eigenflow(ctx, a),
        Command::Gen(a) => cmd_gen(ctx, a),
        Command::Check(a) => {
            let r = ctx.run_check(&a.name, &load(&a.triple)?, &ctx.check_config(a.samples))?;
            ctx.emit_reports(&[r])
        }
        Command::List => cmd_list(ctx),
        Command::Suite => cmd_suite(ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = &cli.global;
    let run = RunConfig {
        seed: g.seed,
        tol_rank: g.tol_rank,
        tol_identity: g.tol.unwrap_or(RunConfig::default().tol_identity),
        max_time_index: g.max_time_index,
        output_path: g.output.clone(),
        format: match g.format {
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
        },
    };
    if let Err(e) = run.validate() {
        eprintln!("aim: {e}");
        return ExitCode::from(2);
    }
    if g.tol.is_some_and(|t| t.is_nan() || t <= 0.0) {
        eprintln!("aim: --tol must be positive");
        return ExitCode::from(2);
    }
    let ctx = Ctx {
        run,
        tol: g.tol,
        registry: Registry::standard(),
    };
    match dispatch(&ctx, &cli.command) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(Fatal(msg)) => {
            eprintln!("aim: {msg}");
            ExitCode::from(2)
        }
    }
}
