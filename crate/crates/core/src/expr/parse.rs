//! Recursive-descent parser for the expression syntax.
//!
//! ```text
//! 3*z^0 + 2*exp(1.5*z) - sin(2*z) + zero(0.5) + H(z) + ln(2*z) + bose(z)
//! ```
//!
//! Any single letter other than `i` (and `y` in right-hand sides) names the
//! variable; one expression may only use one. Columns in errors are 0-based.

use num_complex::Complex64;

use super::{check_monomial, Expr, Kernel, Term};
use crate::error::{Error, Result};
use crate::special::{clog, cpow};

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Imag(f64),
    Ident(String),
    Sym(char),
    End,
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        if ch.is_whitespace() {
            i += 1;
        } else if ch.is_ascii_digit() || (ch == '.' && chars.get(i + 1).map_or(false, |d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let value: f64 = text.parse().map_err(|_| Error::Parse {
                column: start,
                message: format!("malformed number '{text}'"),
            })?;
            let imaginary = i < chars.len()
                && chars[i] == 'i'
                && !chars.get(i + 1).map_or(false, |d| d.is_ascii_alphanumeric() || *d == '_');
            if imaginary {
                i += 1;
                out.push((Tok::Imag(value), start));
            } else {
                out.push((Tok::Num(value), start));
            }
        } else if ch.is_ascii_alphabetic() || ch == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), start));
        } else if "+-*/^(),".contains(ch) {
            out.push((Tok::Sym(ch), i));
            i += 1;
        } else {
            return Err(Error::Parse {
                column: i,
                message: format!("unexpected character '{ch}'"),
            });
        }
    }
    out.push((Tok::End, chars.len()));
    Ok(out)
}

/// One summand during parsing: `coeff · kernel(z − shift)`, `coeff` alone,
/// or `coeff · y`.
#[derive(Debug, Clone)]
struct Piece {
    coeff: Complex64,
    kernel: Option<Kernel>,
    shift: Complex64,
    unknown: bool,
}

impl Piece {
    fn constant(coeff: Complex64) -> Self {
        Self {
            coeff,
            kernel: None,
            shift: c(0.0),
            unknown: false,
        }
    }

    fn kernel(kernel: Kernel, shift: Complex64) -> Self {
        Self {
            coeff: c(1.0),
            kernel: Some(kernel),
            shift,
            unknown: false,
        }
    }
}

type Value = Vec<Piece>;

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    var: Option<String>,
    allow_unknown: bool,
}

fn err<T>(column: usize, message: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        column,
        message: message.into(),
    })
}

fn as_constant(v: &Value) -> Option<Complex64> {
    if v.iter().all(|p| p.kernel.is_none() && !p.unknown) {
        Some(v.iter().map(|p| p.coeff).sum())
    } else {
        None
    }
}

/// `a·z + b` for a value that is linear in the variable.
fn as_linear(v: &Value) -> Option<(Complex64, Complex64)> {
    let mut a = c(0.0);
    let mut b = c(0.0);
    for p in v {
        if p.unknown {
            return None;
        }
        match &p.kernel {
            None => b += p.coeff,
            Some(Kernel::Monomial { n }) if *n == c(1.0) => {
                a += p.coeff;
                b -= p.coeff * p.shift;
            }
            _ => return None,
        }
    }
    Some((a, b))
}

/// Product of two kernels at their shifts, as (scale, kernel, shift).
fn multiply_kernels(
    k1: &Kernel,
    s1: Complex64,
    k2: &Kernel,
    s2: Complex64,
) -> Option<(Complex64, Kernel, Complex64)> {
    use Kernel::*;
    if let Exponential { rate } = k2 {
        if s1 != s2 && !matches!(k1, Exponential { .. }) {
            // e^{λ(z−s2)} = e^{λ(s1−s2)} e^{λ(z−s1)}
            let scale = (*rate * (s1 - s2)).exp();
            return multiply_kernels(k1, s1, k2, s1).map(|(f, k, s)| (f * scale, k, s));
        }
    }
    if let Exponential { .. } = k1 {
        if !matches!(k2, Exponential { .. }) {
            return multiply_kernels(k2, s2, k1, s1);
        }
    }
    if let (Exponential { rate: r1 }, Exponential { rate: r2 }) = (k1, k2) {
        let scale = (*r2 * (s1 - s2)).exp();
        return Some((scale, Exponential { rate: *r1 + *r2 }, s1));
    }
    if s1 != s2 {
        return None;
    }
    let k = match (k1, k2) {
        (Monomial { n }, Monomial { n: m }) => Monomial { n: *n + *m },
        (Monomial { n }, Exponential { rate }) => MonomialExp { n: *n, rate: *rate },
        (MonomialExp { n, rate }, Monomial { n: m }) | (Monomial { n: m }, MonomialExp { n, rate }) => {
            MonomialExp { n: *n + *m, rate: *rate }
        }
        (MonomialExp { n, rate }, Exponential { rate: r }) => MonomialExp { n: *n, rate: *rate + *r },
        (Heaviside, Heaviside) => Heaviside,
        (Heaviside, other) | (other, Heaviside) => match other {
            Gated(inner) => Gated(inner.clone()),
            other => Gated(Box::new(other.clone())),
        },
        (Gated(inner), other) | (other, Gated(inner)) => {
            let (f, k, _) = multiply_kernels(inner, s1, other, s1)?;
            return Some((f, Gated(Box::new(k)), s1));
        }
        _ => return None,
    };
    Some((c(1.0), k, s1))
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn col(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, ch: char) -> Result<()> {
        if *self.peek() == Tok::Sym(ch) {
            self.bump();
            Ok(())
        } else {
            err(self.col(), format!("expected '{ch}'"))
        }
    }

    fn expr(&mut self) -> Result<Value> {
        let mut acc = self.signed_term()?;
        loop {
            match self.peek() {
                Tok::Sym('+') => {
                    self.bump();
                    acc.extend(self.signed_term()?);
                }
                Tok::Sym('-') => {
                    self.bump();
                    acc.extend(negate(self.signed_term()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn signed_term(&mut self) -> Result<Value> {
        match self.peek() {
            Tok::Sym('-') => {
                self.bump();
                Ok(negate(self.signed_term()?))
            }
            Tok::Sym('+') => {
                self.bump();
                self.signed_term()
            }
            _ => self.term(),
        }
    }

    fn term(&mut self) -> Result<Value> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Tok::Sym('*') => {
                    let col = self.col();
                    self.bump();
                    let rhs = self.power()?;
                    acc = multiply(&acc, &rhs, col)?;
                }
                Tok::Sym('/') => {
                    let col = self.col();
                    self.bump();
                    let rhs = self.power()?;
                    let Some(d) = as_constant(&rhs) else {
                        return err(col, "division is only supported by constants");
                    };
                    if d == c(0.0) {
                        return err(col, "division by zero");
                    }
                    acc = acc.into_iter().map(|mut p| {
                        p.coeff /= d;
                        p
                    }).collect();
                }
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> Result<Value> {
        let base = self.atom()?;
        if *self.peek() != Tok::Sym('^') {
            return Ok(base);
        }
        let col = self.col();
        self.bump();
        let negative = if *self.peek() == Tok::Sym('-') {
            self.bump();
            true
        } else {
            false
        };
        let exp_col = self.col();
        let e = self.atom()?;
        let Some(mut e) = as_constant(&e) else {
            return err(exp_col, "exponent must be a constant");
        };
        if negative {
            e = -e;
        }
        if let Some(b) = as_constant(&base) {
            return Ok(vec![Piece::constant(cpow(b, e))]);
        }
        if let [p] = base.as_slice() {
            if let Some(Kernel::Monomial { n }) = &p.kernel {
                return self.monomial_power(p.coeff, *n * e, e, p.shift, col);
            }
        }
        match as_linear(&base) {
            Some((a, b)) if a != c(0.0) => self.monomial_power(a, e, e, -b / a, col),
            _ => err(col, "only the variable or a linear form can be raised to a power"),
        }
    }

    fn monomial_power(
        &self,
        coeff: Complex64,
        n: Complex64,
        e: Complex64,
        shift: Complex64,
        col: usize,
    ) -> Result<Value> {
        if let Err(Error::NegativeIntegerMonomial { exponent, order }) = check_monomial(n) {
            return err(
                col,
                format!("z^{exponent} is not admissible; write zero({order}) for the zero function of that order"),
            );
        }
        let mut p = Piece::kernel(Kernel::Monomial { n }, shift);
        p.coeff = cpow(coeff, e);
        Ok(vec![p])
    }

    fn atom(&mut self) -> Result<Value> {
        let (tok, col) = self.bump();
        match tok {
            Tok::Num(x) => Ok(vec![Piece::constant(c(x))]),
            Tok::Imag(x) => Ok(vec![Piece::constant(Complex64::new(0.0, x))]),
            Tok::Sym('(') => {
                let v = self.expr()?;
                self.expect(')')?;
                Ok(v)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::Sym('(') {
                    self.bump();
                    let mut args = vec![(self.col(), self.expr()?)];
                    while *self.peek() == Tok::Sym(',') {
                        self.bump();
                        args.push((self.col(), self.expr()?));
                    }
                    self.expect(')')?;
                    return self.call(&name, args, col);
                }
                self.identifier(&name, col)
            }
            Tok::End => err(col, "unexpected end of input"),
            Tok::Sym(ch) => err(col, format!("unexpected '{ch}'")),
        }
    }

    fn identifier(&mut self, name: &str, col: usize) -> Result<Value> {
        match name {
            "i" => return Ok(vec![Piece::constant(Complex64::i())]),
            "pi" => return Ok(vec![Piece::constant(c(std::f64::consts::PI))]),
            "y" if self.allow_unknown => {
                let mut p = Piece::constant(c(1.0));
                p.unknown = true;
                return Ok(vec![p]);
            }
            _ => {}
        }
        if name.len() != 1 {
            return err(col, format!("unknown identifier '{name}'"));
        }
        match &self.var {
            Some(v) if v != name => err(col, format!("second variable '{name}'; the expression already uses '{v}'")),
            _ => {
                self.var = Some(name.to_string());
                Ok(vec![Piece::kernel(Kernel::Monomial { n: c(1.0) }, c(0.0))])
            }
        }
    }

    fn call(&mut self, name: &str, args: Vec<(usize, Value)>, col: usize) -> Result<Value> {
        let constant_arg = |i: usize| -> Result<Complex64> {
            let (acol, v) = &args[i];
            as_constant(v).map_or_else(|| err(*acol, "argument must be a constant"), Ok)
        };
        let arity = |lo: usize, hi: usize| -> Result<()> {
            if args.len() < lo || args.len() > hi {
                return err(col, format!("{name} takes {lo}..={hi} arguments, got {}", args.len()));
            }
            Ok(())
        };
        // Trailing optional argument for kernels with an implicit variable.
        let shift_arg = |i: usize| -> Result<Complex64> {
            if args.len() <= i {
                return Ok(c(0.0));
            }
            let (acol, v) = &args[i];
            match as_linear(v) {
                Some((a, b)) if a == c(1.0) => Ok(-b),
                _ => err(*acol, "expected an argument of the form z - a"),
            }
        };
        match name {
            "exp" | "sin" | "cos" | "sinh" | "cosh" | "ln" | "log" | "H" | "bose" => {
                arity(1, 1)?;
                let (acol, v) = &args[0];
                if let Some(x) = as_constant(v) {
                    let value = match name {
                        "exp" => x.exp(),
                        "sin" => x.sin(),
                        "cos" => x.cos(),
                        "sinh" => x.sinh(),
                        "cosh" => x.cosh(),
                        "ln" | "log" => clog(x),
                        "H" => c(if x.re >= 0.0 { 1.0 } else { 0.0 }),
                        _ => 1.0 / ((-x).exp() - 1.0),
                    };
                    return Ok(vec![Piece::constant(value)]);
                }
                let Some((a, b)) = as_linear(v) else {
                    return err(*acol, format!("argument of {name} must be linear in the variable"));
                };
                self.linear_call(name, a, b, *acol)
            }
            "zero" => {
                arity(1, 2)?;
                Ok(vec![Piece::kernel(Kernel::ZeroFn { order: constant_arg(0)? }, shift_arg(1)?)])
            }
            "delta" => {
                arity(1, 2)?;
                Ok(vec![Piece::kernel(Kernel::DeltaDeriv { order: constant_arg(0)? }, shift_arg(1)?)])
            }
            "li" => {
                arity(1, 2)?;
                Ok(vec![Piece::kernel(Kernel::PolylogExp { s: constant_arg(0)? }, shift_arg(1)?)])
            }
            "lnmono" => {
                arity(2, 3)?;
                let kernel = Kernel::LogMonomial {
                    order: constant_arg(0)?,
                    rate: constant_arg(1)?,
                };
                Ok(vec![Piece::kernel(kernel, shift_arg(2)?)])
            }
            "kummer" => {
                arity(3, 4)?;
                let kernel = Kernel::KummerPair {
                    n: constant_arg(0)?,
                    rate: constant_arg(1)?,
                    order: constant_arg(2)?,
                };
                Ok(vec![Piece::kernel(kernel, shift_arg(3)?)])
            }
            "gamma" => {
                arity(1, 1)?;
                let x = constant_arg(0)?;
                Ok(vec![Piece::constant(crate::special::gamma(x).map_err(|e| Error::Parse {
                    column: col,
                    message: e.to_string(),
                })?)])
            }
            _ => err(col, format!("unknown function '{name}'")),
        }
    }

    /// `name(a·z + b)` for a non-constant linear argument.
    fn linear_call(&self, name: &str, a: Complex64, b: Complex64, acol: usize) -> Result<Value> {
        let shift = -b / a;
        let exp = |rate: Complex64, scale: Complex64| {
            let mut p = Piece::kernel(Kernel::Exponential { rate }, c(0.0));
            p.coeff = scale * (b * rate / a).exp();
            p
        };
        match name {
            "exp" => Ok(vec![exp(a, c(1.0))]),
            "sinh" => Ok(vec![exp(a, c(0.5)), exp(-a, c(-0.5))]),
            "cosh" => Ok(vec![exp(a, c(0.5)), exp(-a, c(0.5))]),
            "sin" | "cos" => {
                if a.im == 0.0 && b.im == 0.0 {
                    let kernel = if name == "sin" {
                        Kernel::Sin { rate: a.re, phase: b }
                    } else {
                        Kernel::Cos { rate: a.re, phase: b }
                    };
                    return Ok(vec![Piece::kernel(kernel, c(0.0))]);
                }
                // Complex frequency: expand into exponentials.
                let i = Complex64::i();
                let plus = (i * b).exp();
                let minus = (-i * b).exp();
                let mut p1 = Piece::kernel(Kernel::Exponential { rate: i * a }, c(0.0));
                let mut p2 = Piece::kernel(Kernel::Exponential { rate: -i * a }, c(0.0));
                if name == "sin" {
                    p1.coeff = plus / (2.0 * i);
                    p2.coeff = -minus / (2.0 * i);
                } else {
                    p1.coeff = plus / 2.0;
                    p2.coeff = minus / 2.0;
                }
                Ok(vec![p1, p2])
            }
            "ln" | "log" => Ok(vec![Piece::kernel(Kernel::Log { rate: a }, shift)]),
            "H" => {
                if a.im != 0.0 || a.re <= 0.0 {
                    return err(acol, "H needs an argument of the form a*(z - b) with a > 0");
                }
                Ok(vec![Piece::kernel(Kernel::Heaviside, shift)])
            }
            _ => {
                if a != c(1.0) {
                    return err(acol, "bose needs an argument of the form z - b");
                }
                Ok(vec![Piece::kernel(Kernel::BoseKernel, shift)])
            }
        }
    }
}

fn negate(v: Value) -> Value {
    v.into_iter()
        .map(|mut p| {
            p.coeff = -p.coeff;
            p
        })
        .collect()
}

fn multiply(lhs: &Value, rhs: &Value, col: usize) -> Result<Value> {
    let mut out = Vec::with_capacity(lhs.len() * rhs.len());
    for a in lhs {
        for b in rhs {
            if a.unknown && b.unknown {
                return err(col, "the right-hand side must be linear in y");
            }
            if (a.unknown && b.kernel.is_some()) || (b.unknown && a.kernel.is_some()) {
                return err(col, "y may only be multiplied by constants");
            }
            let coeff = a.coeff * b.coeff;
            let unknown = a.unknown || b.unknown;
            let piece = match (&a.kernel, &b.kernel) {
                (None, None) => Piece {
                    coeff,
                    kernel: None,
                    shift: c(0.0),
                    unknown,
                },
                (Some(k), None) | (None, Some(k)) => Piece {
                    coeff,
                    kernel: Some(k.clone()),
                    shift: if a.kernel.is_some() { a.shift } else { b.shift },
                    unknown,
                },
                (Some(k1), Some(k2)) => {
                    let Some((scale, k, shift)) = multiply_kernels(k1, a.shift, k2, b.shift) else {
                        return err(
                            col,
                            format!("no product rule for {} times {}", k1.name(), k2.name()),
                        );
                    };
                    Piece {
                        coeff: coeff * scale,
                        kernel: Some(k),
                        shift,
                        unknown,
                    }
                }
            };
            out.push(piece);
        }
    }
    Ok(out)
}

fn run(src: &str, allow_unknown: bool) -> Result<Value> {
    let mut p = Parser {
        toks: tokenize(src)?,
        pos: 0,
        var: None,
        allow_unknown,
    };
    let v = p.expr()?;
    if *p.peek() != Tok::End {
        return err(p.col(), "unexpected trailing input");
    }
    Ok(v)
}

fn to_expr(pieces: impl IntoIterator<Item = Piece>) -> Expr {
    Expr::from_terms(
        pieces
            .into_iter()
            .map(|p| Term {
                coeff: p.coeff,
                shift: p.shift,
                kernel: p.kernel.unwrap_or(Kernel::Constant),
            })
            .collect(),
    )
    .normalize()
}

/// Parse an expression into normal form.
pub fn parse(src: &str) -> Result<Expr> {
    Ok(to_expr(run(src, false)?))
}

/// A right-hand side `k·y + g(z)` for the Volterra solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearRhs {
    pub y_coeff: Complex64,
    pub forcing: Expr,
}

/// Parse a right-hand side linear in `y`, such as `-y` or `2*y + sin(z)`.
pub fn parse_rhs(src: &str) -> Result<LinearRhs> {
    let pieces = run(src, true)?;
    let (unknown, known): (Vec<_>, Vec<_>) = pieces.into_iter().partition(|p| p.unknown);
    Ok(LinearRhs {
        y_coeff: unknown.iter().map(|p| p.coeff).sum(),
        forcing: to_expr(known),
    })
}
