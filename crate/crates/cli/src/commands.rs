//! Subcommand bodies. Each returns a table or text; row-level failures are
//! kept in the table rather than aborting the run.

use anyhow::{bail, Context, Result};
use differint_core::expr::{parse, parse_rhs};
use differint_core::quadrature::{convolution_integral, differint_numeric_continued, LowerBound, QuadratureSpec};
use differint_core::rules::complimentary_coefficients;
use differint_core::special::{gamma, riemann_zeta};
use differint_core::transforms::{fourier_differint_at, laplace_frac_at, laplace_of_differint, Engine, TransformValue};
use differint_core::volterra::{picard_series, solve_boundary, solve_fde, BoundaryCondition, FdeProblem};
use differint_core::{differintegrate, Complex64, Expr};
use serde_json::json;

use crate::table::{complex_json, Cell, Column, Format, Row, Table};
use crate::{
    parse_range, ComplimentaryArgs, DiffArgs, EngineChoice, EvalArgs, GammaArgs, Output, SeriesArgs, SolveArgs,
    TransformArgs, TransformKind, ZetaArgs,
};

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn engine_name(e: Engine) -> &'static str {
    match e {
        Engine::Symbolic => "symbolic",
        Engine::Numeric => "numeric",
    }
}

fn engines(choice: EngineChoice) -> Vec<Engine> {
    match choice {
        EngineChoice::Symbolic => vec![Engine::Symbolic],
        EngineChoice::Numeric => vec![Engine::Numeric],
        EngineChoice::Both => vec![Engine::Symbolic, Engine::Numeric],
    }
}

fn failed_row(width: usize, leading: Vec<Cell>, err: impl std::fmt::Display) -> Row {
    let mut cells = leading;
    cells.resize(width, Cell::Empty);
    Row {
        cells,
        error: Some(err.to_string()),
    }
}

pub fn diff(a: &DiffArgs, format: Format) -> Result<Output> {
    let f = parse(&a.expr)?;
    let alpha = Complex64::new(a.alpha, a.alpha_im);
    let result = differintegrate(&f, alpha)?;
    let table = if a.table {
        let mut t = Table::new(vec![Column::Real("z"), Column::Complex("value", "re", "im")]);
        for z in a.points.resolve(&[1.0])? {
            match result.expr.evaluate(c(z)) {
                Ok(v) => t.push(Row::ok(vec![Cell::Real(z), Cell::Complex(v)])),
                Err(e) => t.push(failed_row(2, vec![Cell::Real(z)], e)),
            }
        }
        Some(t)
    } else {
        None
    };
    if format == Format::Json {
        let errors = table.as_ref().map_or(0, |t| t.error_count());
        let body = json!({
            "input": f.normalize().to_string(),
            "alpha": complex_json(alpha),
            "result": result.expr.to_string(),
            "rules": result.rule_applied.iter().map(|r| format!("{r:?}")).collect::<Vec<_>>(),
            "branch_notes": result.branch_notes,
            "table": table.as_ref().map(|t| t.to_json()),
        });
        return Ok(Output::Json(body, errors));
    }
    for note in &result.branch_notes {
        eprintln!("note: {note}");
    }
    Ok(Output::Text(result.expr.to_string(), table))
}

fn orders(single: Option<f64>, range: &Option<String>) -> Result<(Vec<f64>, bool)> {
    match (single, range) {
        (_, Some(r)) => Ok((parse_range(r)?, true)),
        (Some(a), None) => Ok((vec![a], false)),
        (None, None) => bail!("give --alpha or --alpha-range"),
    }
}

fn report_warnings(at: f64, warnings: &[String]) {
    for w in warnings {
        eprintln!("warning (x = {at}): {w}");
    }
}

pub fn eval(a: &EvalArgs) -> Result<Output> {
    let f = parse(&a.expr)?;
    let spec = a.quad.spec()?;
    let (alphas, sweep) = orders(a.alpha, &a.alpha_range)?;
    let xs = a.points.resolve(&[1.0])?;
    let both = a.engine == EngineChoice::Both;

    let mut columns = Vec::new();
    if sweep {
        columns.push(Column::Real("alpha"));
    }
    columns.extend([
        Column::Real("x"),
        Column::Complex("value", "re", "im"),
        Column::Text("engine"),
        Column::Real("est_error"),
    ]);
    if both {
        columns.push(Column::Real("abs_diff"));
    }
    let width = columns.len();
    let mut table = Table::new(columns);

    for alpha in alphas {
        let order = c(alpha);
        let symbolic = differintegrate(&f, order).map(|r| r.expr);
        for &x in &xs {
            let mut results: Vec<(Engine, differint_core::Result<(Complex64, f64)>)> = Vec::new();
            for engine in engines(a.engine) {
                let value = match engine {
                    Engine::Symbolic => match &symbolic {
                        Ok(e) => e.evaluate(c(x)).map(|v| (v, 0.0)),
                        Err(e) => Err(e.clone()),
                    },
                    Engine::Numeric => differint_numeric_continued(&f, order, x, &spec).map(|est| {
                        report_warnings(x, &est.warnings);
                        (est.value, est.est_error)
                    }),
                };
                results.push((engine, value));
            }
            let diff = match results.as_slice() {
                [(_, Ok((u, _))), (_, Ok((v, _)))] => Some((u - v).norm()),
                _ => None,
            };
            for (engine, value) in results {
                let mut lead = Vec::new();
                if sweep {
                    lead.push(Cell::Real(alpha));
                }
                lead.push(Cell::Real(x));
                match value {
                    Ok((v, err)) => {
                        lead.extend([
                            Cell::Complex(v),
                            Cell::Text(engine_name(engine).into()),
                            Cell::Real(err),
                        ]);
                        if both {
                            lead.push(diff.map_or(Cell::Empty, Cell::Real));
                        }
                        table.push(Row::ok(lead));
                    }
                    Err(e) => {
                        lead.extend([Cell::Empty, Cell::Text("error".into())]);
                        table.push(failed_row(width, lead, format!("{}: {e}", engine_name(engine))));
                    }
                }
            }
        }
    }
    Ok(Output::Table(table))
}

fn demo_table() -> Table {
    Table::new(vec![
        Column::Real("s"),
        Column::Complex("differint", "differint_re", "differint_im"),
        Column::Real("oracle"),
        Column::Real("abs_diff"),
    ])
}

fn demo_spec(q: &crate::QuadArgs) -> Result<QuadratureSpec> {
    Ok(QuadratureSpec {
        lower_bound: LowerBound::MinusInfinity,
        ..q.spec()?
    })
}

pub fn zeta_demo(a: &ZetaArgs) -> Result<Output> {
    let spec = demo_spec(&a.quad)?;
    let bose = parse("bose(z)")?;
    let mut table = demo_table();
    for &s in &a.s {
        let oracle = riemann_zeta(c(s)).map(|z| z.re);
        let mut value = differint_core::quadrature::differint_numeric(&bose, c(s), 0.0, &spec);
        if value.is_err() && s > 1.0 {
            // The kernel has a simple pole at 0; move it into the weight and
            // integrate the smooth u/(e^u - 1) at order s - 1 instead.
            eprintln!("note (s = {s}): direct quadrature failed, folding the pole into the weight");
            let smooth = |t: f64| c(if t == 0.0 { 1.0 } else { -t / (-t).exp_m1() });
            value = convolution_integral(&smooth, c(s - 1.0), 0.0, &spec).and_then(|est| {
                Ok(differint_core::quadrature::Estimate {
                    value: est.value / gamma(c(s))?,
                    ..est
                })
            });
        }
        table.push(demo_row(s, degraded(s, value.map(|e| e.value)), oracle));
    }
    Ok(Output::Table(table))
}

/// Keeps the last estimate when the panels stop short of the tolerance,
/// so the table shows the degraded accuracy instead of a gap.
fn degraded(s: f64, value: differint_core::Result<Complex64>) -> differint_core::Result<Complex64> {
    match value {
        Err(differint_core::Error::NonConvergence { last, previous, .. }) => {
            eprintln!(
                "warning (s = {s}): quadrature stopped short of the tolerance; last two estimates differ by {:e}",
                (last - previous).norm()
            );
            Ok(last)
        }
        other => other,
    }
}

fn demo_row(s: f64, value: differint_core::Result<Complex64>, oracle: differint_core::Result<f64>) -> Row {
    match (value, oracle) {
        (Ok(v), Ok(o)) => Row::ok(vec![
            Cell::Real(s),
            Cell::Complex(v),
            Cell::Real(o),
            Cell::Real((v - c(o)).norm()),
        ]),
        (Err(e), Ok(o)) => {
            let mut row = failed_row(4, vec![Cell::Real(s)], e);
            row.cells[2] = Cell::Real(o);
            row
        }
        (_, Err(e)) => failed_row(4, vec![Cell::Real(s)], e),
    }
}

pub fn gamma_demo(a: &GammaArgs) -> Result<Output> {
    let spec = demo_spec(&a.quad)?;
    let e = |t: f64| c(t.exp());
    let mut table = demo_table();
    for &alpha in &a.alpha {
        let value = convolution_integral(&e, c(alpha), 0.0, &spec).map(|est| est.value);
        let oracle = gamma(c(alpha)).map(|g| g.re);
        table.push(demo_row(alpha, value, oracle));
    }
    Ok(Output::Table(table))
}

pub fn transform(a: &TransformArgs) -> Result<Output> {
    let f = parse(&a.expr)?;
    let spec = a.quad.spec()?;
    let both = a.engine == EngineChoice::Both;
    let var = if a.kind == TransformKind::Fourier { "omega" } else { "s" };
    let mut columns = vec![
        Column::Real(var),
        Column::Complex("value", "re", "im"),
        Column::Text("engine"),
        Column::Real("est_error"),
    ];
    if both {
        columns.push(Column::Real("abs_diff"));
    }
    let width = columns.len();
    let mut table = Table::new(columns);
    for &s in &a.s {
        let results: Vec<differint_core::Result<TransformValue>> = match a.kind {
            TransformKind::LaplaceOfDifferint => vec![laplace_of_differint(&f, c(a.alpha), c(s), &spec).map(|v| {
                TransformValue {
                    at: c(s),
                    value: v,
                    engine: Engine::Symbolic,
                    est_error: 0.0,
                }
            })],
            TransformKind::Laplace => engines(a.engine)
                .into_iter()
                .map(|e| laplace_frac_at(&f, a.alpha, c(s), e, &spec))
                .collect(),
            TransformKind::Fourier => engines(a.engine)
                .into_iter()
                .map(|e| fourier_differint_at(&f, a.alpha, s, e, &spec))
                .collect(),
        };
        let diff = match results.as_slice() {
            [Ok(u), Ok(v)] => Some((u.value - v.value).norm()),
            _ => None,
        };
        for r in results {
            match r {
                Ok(v) => {
                    let mut cells = vec![
                        Cell::Real(s),
                        Cell::Complex(v.value),
                        Cell::Text(engine_name(v.engine).into()),
                        Cell::Real(v.est_error),
                    ];
                    if both {
                        cells.push(diff.map_or(Cell::Empty, Cell::Real));
                    }
                    table.push(Row::ok(cells));
                }
                Err(e) => table.push(failed_row(
                    width,
                    vec![Cell::Real(s), Cell::Empty, Cell::Text("error".into())],
                    e,
                )),
            }
        }
    }
    Ok(Output::Table(table))
}

fn numbers(src: &str, count: usize, what: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = src
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("bad {what} `{src}`"))?;
    if parts.len() != count {
        bail!("{what} `{src}` needs {count} colon-separated numbers");
    }
    Ok(parts)
}

pub fn solve(a: &SolveArgs) -> Result<Output> {
    let rhs = parse_rhs(&a.rhs)?;
    let mut problem = FdeProblem::linear(a.alpha, &rhs).on(a.x_max, a.h);
    if let Some(l) = a.lipschitz {
        problem.lipschitz = l;
    }
    let sampled = if a.boundary.is_empty() {
        for item in &a.init {
            let v = numbers(item, 2, "--init")?;
            problem = problem.with_initial(v[0], c(v[1]));
        }
        solve_fde(&problem)?
    } else {
        if !a.init.is_empty() {
            bail!("--init and --boundary are exclusive");
        }
        let conditions = a
            .boundary
            .iter()
            .map(|item| {
                numbers(item, 3, "--boundary").map(|v| BoundaryCondition {
                    order: v[0],
                    at: v[1],
                    value: c(v[2]),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let solved = solve_boundary(&problem, &conditions)?;
        for (k, ck) in solved.constants.iter().enumerate() {
            eprintln!("c_{} = {ck}", k + 1);
        }
        solved.solution
    };
    let every = a.every.max(1);
    let mut table = Table::new(vec![Column::Real("x"), Column::Complex("y", "re", "im")]);
    let last = sampled.x.len() - 1;
    for (i, (x, y)) in sampled.x.iter().zip(&sampled.y).enumerate() {
        if i % every == 0 || i == last {
            table.push(Row::ok(vec![Cell::Real(*x), Cell::Complex(*y)]));
        }
    }
    Ok(Output::Table(table))
}

pub fn series(a: &SeriesArgs) -> Result<Output> {
    let f = parse(&a.expr)?;
    let xs = a.points.resolve(&[1.0])?;
    let x_max = xs.iter().copied().fold(f64::MIN, f64::max).max(f64::MIN_POSITIVE);
    let s = picard_series(&f, a.alpha, a.terms, x_max)?;
    let mut table = Table::new(vec![
        Column::Real("x"),
        Column::Complex("value", "re", "im"),
        Column::Count("terms"),
        Column::Real("tail_estimate"),
    ]);
    for x in xs {
        match s.evaluate(c(x)) {
            Ok(v) => table.push(Row::ok(vec![
                Cell::Real(x),
                Cell::Complex(v),
                Cell::Count(s.truncation),
                Cell::Real(s.tail_estimate),
            ])),
            Err(e) => table.push(failed_row(4, vec![Cell::Real(x)], e)),
        }
    }
    Ok(Output::Table(table))
}

pub fn complimentary(a: &ComplimentaryArgs) -> Result<Output> {
    let f: Expr = parse(&a.expr)?;
    let series = complimentary_coefficients(&f, c(a.x0), a.terms)?;
    let mut table = Table::new(vec![Column::Count("k"), Column::Complex("c", "re", "im")]);
    for (k, ck) in series.coefficients.iter().enumerate() {
        table.push(Row::ok(vec![Cell::Count(k), Cell::Complex(*ck)]));
    }
    Ok(Output::Table(table))
}
