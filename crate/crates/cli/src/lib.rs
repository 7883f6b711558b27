//! The `volterra` command-line tool.
//!
//! Machine-readable results go to standard output (JSON summaries or CSV),
//! diagnostics to standard error. Exit status: 0 on success, 1 when a contract
//! is violated, 2 on bad usage.

pub mod io;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use volterra_core::catalog::{catalog, CatalogKind};
use volterra_core::dsl::{build, parse};
use volterra_core::eval::{eval_freq, eval_time, oracle_eval};
use volterra_core::morphism::{check_naturality, image_series, validate};
use volterra_core::random::{random_series, random_series_without_constant, rng};
use volterra_core::tfd::{
    analytic_signal, check_lambda_constraints, chirp, cohen, howvd, interference_terms, pwvd, pwvd_lambdas, wvd,
    HowvdOptions, LambdaSet, ParameterFunction, PolynomialPhase,
};
use volterra_core::{elementary_series, Complex64, Elementary, SampledSignal, VolterraError, DEFAULT_ORDER_CAP};

use io::{Matrix, Part};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONTRACT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "volterra", version, about = "Volterra series toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a series on a signal.
    Eval(EvalArgs),
    /// Build a series from an interconnection expression.
    Compose(ComposeArgs),
    /// Validate a morphism, apply it, or check naturality.
    Morph(MorphArgs),
    /// Write a catalog morphism and its target series.
    Catalog(CatalogArgs),
    /// Time-frequency distribution of a signal.
    Tfd(TfdArgs),
    /// Lag scalings of the polynomial WVD and their constraint residuals.
    Lambdas(LambdaArgs),
    /// Summary of a series file.
    Info(InfoArgs),
    /// Write an elementary series.
    Elementary(ElementaryArgs),
    /// Write a random series.
    Random(RandomArgs),
    /// Write a polynomial-phase signal.
    Chirp(ChirpArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EvalMethod {
    Time,
    Freq,
    Oracle,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    series: PathBuf,
    #[arg(long)]
    signal: PathBuf,
    #[arg(long, value_enum, default_value = "time")]
    method: EvalMethod,
    /// Output CSV; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ComposeArgs {
    #[arg(long)]
    expr: String,
    /// `NAME=path.vk`, repeatable.
    #[arg(long = "bind")]
    binds: Vec<String>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_ORDER_CAP)]
    cap: usize,
}

#[derive(Args, Debug)]
struct MorphArgs {
    #[arg(long)]
    morphism: PathBuf,
    #[arg(long)]
    source: PathBuf,
    #[arg(long)]
    target: PathBuf,
    #[arg(long)]
    check_naturality: bool,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Write the image series (the pulled-back kernels) here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CatalogChoice {
    Trivial,
    Autoconvolution,
    Identity,
    Translation,
    Sampling,
    Smoothing,
}

#[derive(Args, Debug)]
struct CatalogArgs {
    #[arg(long, value_enum)]
    kind: CatalogChoice,
    #[arg(long)]
    source: PathBuf,
    /// Grid length `L`.
    #[arg(long)]
    length: usize,
    /// Translation: delay applied on every axis.
    #[arg(long, default_value_t = 1)]
    offset: usize,
    /// Sampling: comb spacing for every order.
    #[arg(long, default_value_t = 2)]
    spacing: usize,
    /// Smoothing: precision `c` of `C = c I`.
    #[arg(long, default_value_t = 0.5)]
    precision: f64,
    #[arg(long)]
    morphism_out: PathBuf,
    #[arg(long)]
    target_out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TfdMethod {
    Wvd,
    Cohen,
    Pwvd,
    Howvd,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PhiChoice {
    Wvd,
    Rihaczek,
    Spectrogram,
}

#[derive(Args, Debug)]
struct TfdArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum)]
    method: TfdMethod,
    /// Replace the input by the analytic signal of its real part.
    #[arg(long)]
    analytic: bool,
    /// Cohen parameter function.
    #[arg(long, value_enum, default_value = "wvd")]
    phi: PhiChoice,
    /// Spectrogram: Gaussian window width in samples.
    #[arg(long, default_value_t = 4.0)]
    sigma: f64,
    /// Order of pwvd or howvd.
    #[arg(long, default_value_t = 4)]
    k: usize,
    /// pwvd with k = 6.
    #[arg(long)]
    lambda3: Option<f64>,
    /// howvd lag step in samples.
    #[arg(long)]
    lag_step: Option<usize>,
    /// Grid CSV; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    pgm: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "re")]
    part: Part,
}

#[derive(Args, Debug)]
struct LambdaArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    lambda3: Option<f64>,
    /// Highest phase degree to check odd moments for.
    #[arg(long, default_value_t = 4)]
    p: u32,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
}

#[derive(Args, Debug)]
struct InfoArgs {
    #[arg(long)]
    series: PathBuf,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ElementaryChoice {
    Delay,
    Differencer,
    Polynomial,
    Identity,
}

#[derive(Args, Debug)]
struct ElementaryArgs {
    #[arg(long, value_enum)]
    kind: ElementaryChoice,
    /// Delay in samples, or number of differences.
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Polynomial coefficients `a_0,a_1,..`.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    coeffs: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    memory: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct RandomArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    max_order: usize,
    #[arg(long, default_value_t = 3)]
    memory: usize,
    /// Leave out the order-0 term, as composition inputs require.
    #[arg(long)]
    no_constant: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ChirpArgs {
    /// Phase coefficients `a_0,a_1,..` in radians, `t` in samples.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    coeffs: Vec<f64>,
    #[arg(long)]
    length: usize,
    #[arg(long, default_value_t = 1.0)]
    amplitude: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Core(VolterraError),
    /// Ran to completion but a checked property failed.
    Check(String),
}

impl From<VolterraError> for Failure {
    fn from(e: VolterraError) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Core(e.into())
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// Run the tool on `argv` (including the program name).
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Eval(a) => cmd_eval(a, out),
        Command::Compose(a) => cmd_compose(a, out),
        Command::Morph(a) => cmd_morph(a, out),
        Command::Catalog(a) => cmd_catalog(a, out),
        Command::Tfd(a) => cmd_tfd(a, out),
        Command::Lambdas(a) => cmd_lambdas(a, out),
        Command::Info(a) => cmd_info(a, out),
        Command::Elementary(a) => cmd_elementary(a),
        Command::Random(a) => cmd_random(a),
        Command::Chirp(a) => cmd_chirp(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Core(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_CONTRACT
        }
        Err(Failure::Check(m)) => {
            let _ = writeln!(err, "check failed: {m}");
            EXIT_CONTRACT
        }
    }
}

fn print_json(out: &mut dyn Write, v: serde_json::Value) -> CmdResult {
    writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("json"))?;
    Ok(())
}

fn create(path: &Path) -> std::result::Result<BufWriter<File>, Failure> {
    Ok(BufWriter::new(File::create(path)?))
}

fn cmd_eval(a: EvalArgs, out: &mut dyn Write) -> CmdResult {
    let series = io::read_series(&a.series)?;
    let s = io::read_signal(&a.signal)?;
    let y = match a.method {
        EvalMethod::Time => eval_time(&series, &s)?,
        EvalMethod::Oracle => oracle_eval(&series, &s)?,
        EvalMethod::Freq => eval_freq(&series, &s.dft())?.idft(),
    };
    match a.out {
        Some(p) => io::signal_to_csv(&y, create(&p)?)?,
        None => io::signal_to_csv(&y, out)?,
    }
    Ok(())
}

fn parse_binding(b: &str) -> std::result::Result<(String, PathBuf), Failure> {
    match b.split_once('=') {
        Some((n, p)) if !n.trim().is_empty() && !p.is_empty() => Ok((n.trim().to_string(), PathBuf::from(p))),
        _ => Err(Failure::Usage(format!("--bind expects NAME=path, got `{b}`"))),
    }
}

fn cmd_compose(a: ComposeArgs, out: &mut dyn Write) -> CmdResult {
    let expr = parse(&a.expr)?;
    let mut bindings = BTreeMap::new();
    for b in &a.binds {
        let (name, path) = parse_binding(b)?;
        bindings.insert(name, io::read_series(&path)?);
    }
    let built = build(&expr, &bindings, a.cap)?;
    io::write_series(&a.out, &built.series)?;
    let truncations: Vec<_> = built
        .truncations
        .iter()
        .map(|t| json!({"operation": t.operation, "cap": t.cap, "dropped_orders": t.dropped_orders}))
        .collect();
    print_json(
        out,
        json!({
            "expression": expr.to_string(),
            "out": a.out,
            "memory": built.series.memory(),
            "orders": built.series.orders(),
            "truncations": truncations,
        }),
    )
}

fn cmd_morph(a: MorphArgs, out: &mut dyn Write) -> CmdResult {
    let m = io::read_morphism(&a.morphism)?;
    let source = io::read_series(&a.source)?;
    let target = io::read_series(&a.target)?;
    let report = validate(&m, &source, &target);
    let mut summary = json!({"valid": report.is_valid(), "violations": report.violations});
    if !report.is_valid() {
        print_json(out, summary)?;
        return Err(Failure::Check("morphism is not valid for these series".into()));
    }
    let mut failed = None;
    if a.check_naturality {
        let r = check_naturality(&m, &source, &target, a.trials, a.seed)?;
        summary["naturality_residual"] = json!(r);
        summary["trials"] = json!(a.trials);
        summary["tolerance"] = json!(a.tol);
        if r.is_nan() || r > a.tol {
            failed = Some(format!("naturality residual {r:e} exceeds {:e}", a.tol));
        }
    }
    if let Some(p) = &a.out {
        io::write_series(p, &image_series(&m, &source, &target)?)?;
        summary["image"] = json!(p);
    }
    print_json(out, summary)?;
    match failed {
        Some(msg) => Err(Failure::Check(msg)),
        None => Ok(()),
    }
}

fn cmd_catalog(a: CatalogArgs, out: &mut dyn Write) -> CmdResult {
    let source = io::read_series(&a.source)?;
    let top = source.max_order();
    let kind = match a.kind {
        CatalogChoice::Trivial => CatalogKind::Trivial,
        CatalogChoice::Autoconvolution => CatalogKind::Autoconvolution,
        CatalogChoice::Identity => CatalogKind::Identity,
        CatalogChoice::Translation => {
            CatalogKind::Translation { offsets: (0..=top).map(|j| vec![a.offset; j]).collect() }
        }
        CatalogChoice::Sampling => CatalogKind::Sampling { spacings: vec![a.spacing; top + 1] },
        CatalogChoice::Smoothing => CatalogKind::Smoothing {
            precisions: (0..=top)
                .map(|j| (0..j).map(|r| (0..j).map(|c| if r == c { a.precision } else { 0.0 }).collect()).collect())
                .collect(),
        },
    };
    let (target, m) = catalog(&kind, &source, a.length)?;
    io::write_series(&a.target_out, &target)?;
    io::write_morphism(&a.morphism_out, &m)?;
    print_json(out, json!({"morphism": a.morphism_out, "target": a.target_out, "length": a.length}))
}

fn gaussian_window(length: usize, sigma: f64) -> std::result::Result<SampledSignal, Failure> {
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(Failure::Usage("--sigma must be positive".into()));
    }
    let re: Vec<f64> = (0..length)
        .map(|a| {
            let s = volterra_core::tensor::signed_mod(a, length) as f64;
            (-s * s / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    Ok(SampledSignal::from_real(&re)?)
}

fn cmd_tfd(a: TfdArgs, out: &mut dyn Write) -> CmdResult {
    let mut x = io::read_signal(&a.input)?;
    if a.analytic {
        let re: Vec<f64> = x.samples().iter().map(|v| v.re).collect();
        x = analytic_signal(&SampledSignal::from_real(&re)?)?;
    }
    let l = x.len();
    let write = |m: Matrix<'_>, out: &mut dyn Write| -> CmdResult {
        if let Some(p) = &a.pgm {
            io::grid_to_pgm(&m, create(p)?)?;
        }
        match &a.out {
            Some(p) => {
                io::grid_to_csv(&m, a.part, create(p)?)?;
                let max = m.values.iter().fold(0.0f64, |acc, v| acc.max(v.norm()));
                print_json(
                    out,
                    json!({"times": m.rows, "columns": m.cols, "bin_width": 1.0 / l as f64, "max_abs": max, "out": p, "pgm": a.pgm}),
                )
            }
            None => io::grid_to_csv(&m, a.part, out).map_err(Failure::from),
        }
    };
    match a.method {
        TfdMethod::Howvd => {
            let g = howvd(&x, a.k, HowvdOptions { lag_step: a.lag_step, ..Default::default() })?;
            write(Matrix::from(&g), out)
        }
        method => {
            let g = match method {
                TfdMethod::Wvd => wvd(&x)?,
                TfdMethod::Cohen => {
                    let phi = match a.phi {
                        PhiChoice::Wvd => ParameterFunction::wvd(l)?,
                        PhiChoice::Rihaczek => ParameterFunction::rihaczek(l)?,
                        PhiChoice::Spectrogram => ParameterFunction::spectrogram(&gaussian_window(l, a.sigma)?)?,
                    };
                    cohen(&x, &phi)?
                }
                _ => pwvd(&x, &pwvd_lambdas(a.k, a.lambda3)?)?,
            };
            write(Matrix::from(&g), out)
        }
    }
}

fn lambda_json(ls: &LambdaSet, p: u32, tol: f64) -> serde_json::Value {
    let rep = check_lambda_constraints(ls, p);
    json!({
        "k": ls.order(),
        "lambdas": ls.positive(),
        "partners": ls.negative(),
        "antisymmetry": rep.antisymmetry,
        "half_sum": rep.half_sum,
        "odd_moments": rep.odd_moments,
        "one_sided_moments": rep.one_sided_moments,
        "tolerance": tol,
        "passes": rep.passes(tol),
        "concentrates": rep.concentrates(tol),
    })
}

fn cmd_lambdas(a: LambdaArgs, out: &mut dyn Write) -> CmdResult {
    let ls = pwvd_lambdas(a.k, a.lambda3)?;
    let mut v = lambda_json(&ls, a.p, a.tol);
    v["interference_terms"] = json!(interference_terms(a.k as u32)?);
    print_json(out, v)
}

fn cmd_info(a: InfoArgs, out: &mut dyn Write) -> CmdResult {
    let s = io::read_series(&a.series)?;
    let terms: Vec<_> = s
        .terms()
        .iter()
        .map(|t| {
            json!({
                "index": t.index.0,
                "order": t.kernel.order(),
                "symmetric": t.kernel.is_symmetric(a.tol),
                "asymmetry": t.kernel.asymmetry(),
                "max_abs": t.kernel.max_abs(),
            })
        })
        .collect();
    let c = s.constant();
    print_json(
        out,
        json!({
            "memory": s.memory(),
            "max_order": s.max_order(),
            "orders": s.orders(),
            "canonical": s.is_canonical(),
            "constant": [c.re, c.im],
            "terms": terms,
        }),
    )
}

fn cmd_elementary(a: ElementaryArgs) -> CmdResult {
    let kind = match a.kind {
        ElementaryChoice::Delay => Elementary::Delay(a.n),
        ElementaryChoice::Differencer => Elementary::Differencer(a.n),
        ElementaryChoice::Identity => Elementary::Identity,
        ElementaryChoice::Polynomial => {
            if a.coeffs.is_empty() {
                return Err(Failure::Usage("--coeffs is required for a polynomial".into()));
            }
            Elementary::Polynomial(a.coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
        }
    };
    io::write_series(&a.out, &elementary_series(&kind, a.memory)?)?;
    Ok(())
}

fn cmd_random(a: RandomArgs) -> CmdResult {
    if a.memory == 0 {
        return Err(Failure::Usage("--memory must be at least 1".into()));
    }
    let mut r = rng(a.seed);
    let s = if a.no_constant {
        random_series_without_constant(&mut r, a.max_order, a.memory)
    } else {
        random_series(&mut r, a.max_order, a.memory)
    };
    io::write_series(&a.out, &s)?;
    Ok(())
}

fn cmd_chirp(a: ChirpArgs, out: &mut dyn Write) -> CmdResult {
    let x = chirp(&PolynomialPhase::new(a.coeffs), a.amplitude, a.length)?;
    match a.out {
        Some(p) => io::signal_to_csv(&x, create(&p)?)?,
        None => io::signal_to_csv(&x, out)?,
    }
    Ok(())
}
