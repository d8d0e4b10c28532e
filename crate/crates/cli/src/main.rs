//! `differint`: tables of differintegrals, transforms and fractional solves.

mod commands;
mod table;

use std::fs::File;
use std::io::{self, Write};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use differint_core::{LowerBound, QuadratureSpec};
use serde_json::json;

use table::Format;

#[derive(Parser, Debug)]
#[command(name = "differint", version, about = "Differintegrals of arbitrary order, as tables")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format for tables and errors.
    #[arg(long, value_enum, global = true, default_value = "csv")]
    format: Format,

    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form differintegral of an expression.
    Diff(DiffArgs),
    /// Differintegral values at sample points.
    Eval(EvalArgs),
    /// S^s of the Bose kernel at 0 against ζ(s).
    ZetaDemo(ZetaArgs),
    /// ∫ e^τ (−τ)^{α−1} dτ over τ < 0 against Γ(α).
    GammaDemo(GammaArgs),
    /// Fractional Laplace or differintegral Fourier transform.
    Transform(TransformArgs),
    /// March a fractional equation in Volterra form.
    Solve(SolveArgs),
    /// Partial sums of Σ S^{jα} f.
    Series(SeriesArgs),
    /// Complimentary-function coefficients for a finite lower bound.
    Complimentary(ComplimentaryArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineChoice {
    Symbolic,
    Numeric,
    Both,
}

/// Quadrature overrides shared by the numeric subcommands.
#[derive(Args, Debug, Clone)]
pub struct QuadArgs {
    /// Lower bound: a number or `-inf`.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    lower: String,
    /// Truncation window for an infinite lower bound.
    #[arg(long, default_value_t = 60.0)]
    window: f64,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Starting nodes per panel.
    #[arg(long, default_value_t = 64)]
    nodes: usize,
}

impl QuadArgs {
    pub fn spec(&self) -> Result<QuadratureSpec> {
        let lower_bound = match self.lower.trim() {
            "-inf" | "-infinity" => LowerBound::MinusInfinity,
            s => LowerBound::Finite(s.parse().with_context(|| format!("bad --lower value `{s}`"))?),
        };
        let spec = QuadratureSpec {
            node_count: self.nodes,
            tolerance: self.tol,
            lower_bound,
            truncation_window: self.window,
            lift_order: None,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Sample points as a list or an `a:b:step` range.
#[derive(Args, Debug, Clone)]
pub struct Points {
    /// Comma-separated points.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x: Vec<f64>,
    /// Points `a:b:step`, inclusive of `b` up to rounding.
    #[arg(long, allow_hyphen_values = true)]
    x_range: Option<String>,
}

pub fn parse_range(src: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = src.split(':').collect();
    if parts.len() != 3 {
        bail!("range `{src}` is not a:b:step");
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().with_context(|| format!("bad number `{p}` in range `{src}`")))
        .collect::<Result<_>>()?;
    let (a, b, step) = (nums[0], nums[1], nums[2]);
    if !(step > 0.0) || !a.is_finite() || !b.is_finite() {
        bail!("range `{src}` needs finite ends and step > 0");
    }
    if b < a {
        bail!("range `{src}` is empty");
    }
    let n = ((b - a) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| a + k as f64 * step).collect())
}

impl Points {
    pub fn resolve(&self, default: &[f64]) -> Result<Vec<f64>> {
        let mut pts = self.x.clone();
        if let Some(r) = &self.x_range {
            pts.extend(parse_range(r)?);
        }
        if pts.is_empty() {
            pts.extend_from_slice(default);
        }
        Ok(pts)
    }
}

#[derive(Args, Debug)]
pub struct DiffArgs {
    expr: String,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    alpha: f64,
    /// Imaginary part of the order.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    alpha_im: f64,
    /// Also tabulate the result at the sample points.
    #[arg(long)]
    table: bool,
    #[command(flatten)]
    points: Points,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    expr: String,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// Sweep the order over `a:b:step`.
    #[arg(long, allow_hyphen_values = true)]
    alpha_range: Option<String>,
    #[arg(long, value_enum, default_value = "numeric")]
    engine: EngineChoice,
    #[command(flatten)]
    points: Points,
    #[command(flatten)]
    quad: QuadArgs,
}

#[derive(Args, Debug)]
pub struct ZetaArgs {
    /// Comma-separated orders s, Re s > 1.
    #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
    s: Vec<f64>,
    #[command(flatten)]
    quad: QuadArgs,
}

#[derive(Args, Debug)]
pub struct GammaArgs {
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    alpha: Vec<f64>,
    #[command(flatten)]
    quad: QuadArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TransformKind {
    Laplace,
    Fourier,
    /// `s^{−α}` times the classical Laplace transform.
    LaplaceOfDifferint,
}

#[derive(Args, Debug)]
pub struct TransformArgs {
    #[arg(value_enum)]
    kind: TransformKind,
    expr: String,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    alpha: f64,
    /// Comma-separated transform variables (s or ω).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "1")]
    s: Vec<f64>,
    #[arg(long, value_enum, default_value = "symbolic")]
    engine: EngineChoice,
    #[command(flatten)]
    quad: QuadArgs,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[arg(long)]
    alpha: f64,
    /// Right-hand side, linear in y, such as `-y` or `2*y + sin(x)`.
    #[arg(long, allow_hyphen_values = true)]
    rhs: String,
    /// Initial data `order:value`, repeatable.
    #[arg(long, allow_hyphen_values = true)]
    init: Vec<String>,
    /// Boundary data `order:x:value`, repeatable; replaces --init.
    #[arg(long, allow_hyphen_values = true)]
    boundary: Vec<String>,
    #[arg(long = "X", default_value_t = 1.0)]
    x_max: f64,
    #[arg(long, default_value_t = 1e-3)]
    h: f64,
    /// Lipschitz constant; defaults to |coefficient of y|.
    #[arg(long)]
    lipschitz: Option<f64>,
    /// Emit every n-th grid point.
    #[arg(long, default_value_t = 1)]
    every: usize,
}

#[derive(Args, Debug)]
pub struct SeriesArgs {
    expr: String,
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 25)]
    terms: usize,
    #[command(flatten)]
    points: Points,
}

#[derive(Args, Debug)]
pub struct ComplimentaryArgs {
    expr: String,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    x0: f64,
    #[arg(long, default_value_t = 10)]
    terms: usize,
}

/// What a subcommand produced.
pub enum Output {
    Table(table::Table),
    Text(String, Option<table::Table>),
    Json(serde_json::Value, usize),
}

fn run(cli: &Cli) -> Result<Output> {
    match &cli.command {
        Command::Diff(a) => commands::diff(a, cli.format),
        Command::Eval(a) => commands::eval(a),
        Command::ZetaDemo(a) => commands::zeta_demo(a),
        Command::GammaDemo(a) => commands::gamma_demo(a),
        Command::Transform(a) => commands::transform(a),
        Command::Solve(a) => commands::solve(a),
        Command::Series(a) => commands::series(a),
        Command::Complimentary(a) => commands::complimentary(a),
    }
}

fn emit(cli: &Cli, output: &Output, out: &mut dyn Write) -> Result<usize> {
    Ok(match output {
        Output::Table(t) => {
            t.write(cli.format, out)?;
            t.error_count()
        }
        Output::Text(text, table) => {
            writeln!(out, "{text}")?;
            if let Some(t) = table {
                t.write(Format::Csv, out)?;
                t.error_count()
            } else {
                0
            }
        }
        Output::Json(v, errors) => {
            serde_json::to_writer_pretty(&mut *out, v)?;
            writeln!(out)?;
            *errors
        }
    })
}

fn report_failure(cli: &Cli, err: &anyhow::Error) {
    let core = err.downcast_ref::<differint_core::Error>();
    if cli.format == Format::Json {
        let mut body = json!({ "error": { "message": format!("{err:#}") } });
        if let Some(differint_core::Error::Parse { column, message }) = core {
            body["error"]["kind"] = json!("parse");
            body["error"]["column"] = json!(column);
            body["error"]["detail"] = json!(message);
        }
        println!("{}", serde_json::to_string_pretty(&body).unwrap_or_default());
        return;
    }
    eprintln!("error: {err:#}");
    if let (Some(differint_core::Error::Parse { column, .. }), Some(src)) = (core, source_text(cli)) {
        eprintln!("  {src}");
        eprintln!("  {}^", " ".repeat(src.chars().take(*column).count()));
    }
}

fn source_text(cli: &Cli) -> Option<&str> {
    match &cli.command {
        Command::Diff(a) => Some(&a.expr),
        Command::Eval(a) => Some(&a.expr),
        Command::Transform(a) => Some(&a.expr),
        Command::Series(a) => Some(&a.expr),
        Command::Complimentary(a) => Some(&a.expr),
        Command::Solve(a) => Some(&a.rhs),
        Command::ZetaDemo(_) | Command::GammaDemo(_) => None,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let output = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            report_failure(&cli, &e);
            return ExitCode::FAILURE;
        }
    };
    let written = match &cli.out {
        Some(path) => File::create(path)
            .with_context(|| format!("cannot create {path}"))
            .and_then(|mut f| emit(&cli, &output, &mut f)),
        None => emit(&cli, &output, &mut io::stdout().lock()),
    };
    match written {
        Ok(0) => ExitCode::SUCCESS,
        Ok(n) => {
            eprintln!("{n} row(s) failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            report_failure(&cli, &e);
            ExitCode::FAILURE
        }
    }
}
