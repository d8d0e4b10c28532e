//! Fractional Laplace and differintegral Fourier transforms.
//!
//! Both are built from one core,
//! `C(f, s, t) = e^{ts} · S_t^α [f(t) e^{−st}]`:
//!
//! * `ℒ^{(α)}[f](s) = e^{−iπα} C(f, s, (1−α)s)`
//! * `𝔉^{(α)}[f](ω) = ¼(2/π)^{α/2} [C(f, iω, t₊) + C(f(−·), −iω, t₊) + C(f, iω, t₋) + C(f(−·), −iω, t₋)]`
//!   with `t± = ±(1−α)ω`.
//!
//! The symbolic engine forms `f·e^{−st}` inside the rule table (monomials,
//! exponentials and their products, sin/cos through exponentials). Anything
//! else falls back to quadrature.
//!
//! Numerically, the Laplace core is realized as the right-sided Weyl
//! integral `e^{−iπα} e^{ts} W^α[f e^{−s·}](t)` over `[t, t+W]`, the
//! continuation that makes `α = 1` equal `∫_0^∞ f e^{−sτ} dτ`. The Fourier
//! core is the left-sided integral over `[t−W, t]`.
//!
//! At `α = 0` the four Fourier terms sum to the even part
//! `(f(ω) + f(−ω))/2`. At `α = 1` they give `(2π)^{−1/2} ∫ f e^{−iωτ} dτ`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expr::{kummer_pair_finite_part, Expr, Kernel};
use crate::quadrature::{differint_numeric, weighted_integral, LowerBound, QuadratureSpec};
use crate::rules::differintegrate;
use crate::special::{as_integer, clog, cpow, gamma, EULER_GAMMA};
use crate::ComplexScalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Symbolic,
    Numeric,
}

#[derive(Debug, Clone)]
pub struct TransformRequest<'a> {
    pub f: &'a Expr,
    /// In `[0, 1]`.
    pub alpha: f64,
    /// Values of `s` (Laplace) or `ω` (Fourier).
    pub points: Vec<ComplexScalar>,
    pub engine: Engine,
    pub spec: QuadratureSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformValue {
    pub at: ComplexScalar,
    pub value: ComplexScalar,
    /// Engine that produced the value; the symbolic engine may fall back.
    pub engine: Engine,
    pub est_error: f64,
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!("transform order {alpha} is outside [0, 1]")));
    }
    Ok(())
}

/// `kernel(w)·e^{μw}` rewritten as kernels of the rule table.
fn product_with_exp(kernel: &Kernel, mu: ComplexScalar) -> Result<Vec<(ComplexScalar, Kernel)>> {
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::i();
    Ok(match kernel {
        Kernel::Constant => vec![(one, Kernel::Exponential { rate: mu })],
        Kernel::Monomial { n } => vec![(one, Kernel::MonomialExp { n: *n, rate: mu })],
        Kernel::Exponential { rate } => vec![(one, Kernel::Exponential { rate: *rate + mu })],
        Kernel::MonomialExp { n, rate } => vec![(one, Kernel::MonomialExp { n: *n, rate: *rate + mu })],
        Kernel::Sin { rate, phase } => vec![
            ((i * phase).exp() / (2.0 * i), Kernel::Exponential { rate: i * *rate + mu }),
            (-(-i * phase).exp() / (2.0 * i), Kernel::Exponential { rate: -i * *rate + mu }),
        ],
        Kernel::Cos { rate, phase } => vec![
            ((i * phase).exp() / 2.0, Kernel::Exponential { rate: i * *rate + mu }),
            ((-i * phase).exp() / 2.0, Kernel::Exponential { rate: -i * *rate + mu }),
        ],
        other => {
            return Err(Error::NoProductRule(format!(
                "{} times an exponential is outside the rule table",
                other.name()
            )))
        }
    })
}

/// `e^{ts} S^α[f e^{−s·}](t)` from the rule table.
fn core_symbolic(f: &Expr, alpha: f64, s: ComplexScalar, t: ComplexScalar) -> Result<ComplexScalar> {
    let alpha = Complex64::new(alpha, 0.0);
    let mut total = zero();
    for term in &f.normalize().terms {
        let pieces = product_with_exp(&term.kernel, -s)?;
        let product = Expr::from_terms(
            pieces
                .into_iter()
                .map(|(c, k)| crate::expr::Term::new(c, k))
                .collect(),
        );
        let image = differintegrate(&product, alpha)?.expr;
        let w = t - term.shift;
        // e^{ts} e^{−s·shift} = e^{sw}, folded into each image kernel.
        for piece in &image.terms {
            let v = match piece.kernel.eval_times_exp(w, s) {
                Ok(v) => v,
                Err(Error::Singular { .. }) if w == zero() => match piece.kernel {
                    Kernel::KummerPair { n, rate, order } => kummer_pair_finite_part(n, rate, order)?,
                    _ => return Err(piece.kernel.eval(w).unwrap_err()),
                },
                Err(e) => return Err(e),
            };
            total += term.coeff * piece.coeff * v;
        }
    }
    Ok(total)
}

/// `f(−t)` when the rule table is closed under reflection.
fn reflect(f: &Expr) -> Result<Expr> {
    let mut terms = Vec::with_capacity(f.terms.len());
    for term in &f.normalize().terms {
        let (scale, kernel) = match &term.kernel {
            Kernel::Exponential { rate } => (1.0, Kernel::Exponential { rate: -*rate }),
            Kernel::Sin { rate, phase } => (1.0, Kernel::Sin { rate: -*rate, phase: *phase }),
            Kernel::Cos { rate, phase } => (1.0, Kernel::Cos { rate: -*rate, phase: *phase }),
            Kernel::Log { rate } => (1.0, Kernel::Log { rate: -*rate }),
            Kernel::Monomial { n } if as_integer(*n).is_some() => {
                let k = as_integer(*n).unwrap_or(0);
                (if k % 2 == 0 { 1.0 } else { -1.0 }, Kernel::Monomial { n: *n })
            }
            Kernel::MonomialExp { n, rate } if as_integer(*n).is_some() => {
                let k = as_integer(*n).unwrap_or(0);
                (
                    if k % 2 == 0 { 1.0 } else { -1.0 },
                    Kernel::MonomialExp { n: *n, rate: -*rate },
                )
            }
            other => {
                return Err(Error::NoProductRule(format!("{} under reflection t → −t", other.name())));
            }
        };
        terms.push(crate::expr::Term {
            coeff: term.coeff * scale,
            shift: -term.shift,
            kernel,
        });
    }
    Ok(Expr::from_terms(terms))
}

fn real_point(t: ComplexScalar, what: &str) -> Result<f64> {
    if t.im != 0.0 {
        return Err(Error::InvalidArgument(format!(
            "the numeric engine needs a real evaluation point; {what} = {t}"
        )));
    }
    Ok(t.re)
}

/// `e^{−iπα} e^{ts} W^α[f e^{−s·}](t)`, the right-sided realization of the
/// Laplace core.
fn laplace_core_numeric(
    f: &dyn crate::quadrature::Integrand,
    alpha: f64,
    s: ComplexScalar,
    t: f64,
    spec: &QuadratureSpec,
) -> Result<(ComplexScalar, f64)> {
    if alpha == 0.0 {
        return Ok((f.value(t)?, 0.0));
    }
    let g = |u: f64, _: f64| Ok(f.value(t + u)? * (-s * u).exp());
    let a = Complex64::new(alpha, 0.0);
    let (value, err) = weighted_integral(&g, a - 1.0, spec.truncation_window, spec)?;
    let scale = crate::special::reciprocal_gamma(a) * (-Complex64::i() * PI * alpha).exp();
    Ok((value * scale, err * scale.norm()))
}

/// Left-sided core on `[t − W, t]`.
fn core_numeric_left(
    f: &dyn Fn(f64) -> Result<ComplexScalar>,
    alpha: f64,
    s: ComplexScalar,
    t: f64,
    spec: &QuadratureSpec,
) -> Result<(ComplexScalar, f64)> {
    if alpha == 0.0 {
        return Ok((f(t)?, 0.0));
    }
    let spec = QuadratureSpec {
        lower_bound: LowerBound::MinusInfinity,
        ..spec.clone()
    };
    let g = |tau: f64| match f(tau) {
        Ok(v) => v * (s * (t - tau)).exp(),
        Err(_) => Complex64::new(f64::NAN, f64::NAN),
    };
    let est = differint_numeric(&g, Complex64::new(alpha, 0.0), t, &spec)?;
    Ok((est.value, est.est_error))
}

/// `ℒ^{(α)}[f](s)` at one point.
pub fn laplace_frac_at(
    f: &Expr,
    alpha: f64,
    s: ComplexScalar,
    engine: Engine,
    spec: &QuadratureSpec,
) -> Result<TransformValue> {
    check_alpha(alpha)?;
    let t = (1.0 - alpha) * s;
    let phase = (-Complex64::i() * PI * alpha).exp();
    if engine == Engine::Symbolic {
        match core_symbolic(f, alpha, s, t) {
            Ok(v) => {
                return Ok(TransformValue {
                    at: s,
                    value: phase * v,
                    engine: Engine::Symbolic,
                    est_error: 0.0,
                })
            }
            Err(Error::NoProductRule(_)) | Err(Error::Unsupported(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let t = real_point(t, "(1 − α)s")?;
    let (v, err) = laplace_core_numeric(f, alpha, s, t, spec)?;
    Ok(TransformValue {
        at: s,
        value: phase * v,
        engine: Engine::Numeric,
        est_error: err,
    })
}

/// Numeric `ℒ^{(α)}` for an arbitrary integrand.
pub fn laplace_frac_numeric(
    f: &dyn crate::quadrature::Integrand,
    alpha: f64,
    s: ComplexScalar,
    spec: &QuadratureSpec,
) -> Result<TransformValue> {
    check_alpha(alpha)?;
    let t = real_point((1.0 - alpha) * s, "(1 − α)s")?;
    let (v, err) = laplace_core_numeric(f, alpha, s, t, spec)?;
    Ok(TransformValue {
        at: s,
        value: (-Complex64::i() * PI * alpha).exp() * v,
        engine: Engine::Numeric,
        est_error: err,
    })
}

pub fn laplace_frac(req: &TransformRequest) -> Result<Vec<TransformValue>> {
    req.points
        .iter()
        .map(|s| laplace_frac_at(req.f, req.alpha, *s, req.engine, &req.spec))
        .collect()
}

/// `𝔉^{(α)}[f](ω)` at one point, the four printed terms summed.
pub fn fourier_differint_at(
    f: &Expr,
    alpha: f64,
    omega: f64,
    engine: Engine,
    spec: &QuadratureSpec,
) -> Result<TransformValue> {
    check_alpha(alpha)?;
    let weight = 0.25 * (2.0 / PI).powf(0.5 * alpha);
    let i = Complex64::i();
    let t_plus = (1.0 - alpha) * omega;
    let t_minus = (alpha - 1.0) * omega;
    let s = i * omega;

    if engine == Engine::Symbolic {
        let attempt = || -> Result<ComplexScalar> {
            let reflected = reflect(f)?;
            let c = |t: f64| -> Result<ComplexScalar> {
                let t = Complex64::new(t, 0.0);
                Ok(core_symbolic(f, alpha, s, t)? + core_symbolic(&reflected, alpha, -s, t)?)
            };
            Ok(weight * (c(t_plus)? + c(t_minus)?))
        };
        match attempt() {
            Ok(v) => {
                return Ok(TransformValue {
                    at: Complex64::new(omega, 0.0),
                    value: v,
                    engine: Engine::Symbolic,
                    est_error: 0.0,
                })
            }
            Err(Error::NoProductRule(_)) | Err(Error::Unsupported(_)) => {}
            Err(e) => return Err(e),
        }
    }

    let forward = |t: f64| f.evaluate(Complex64::new(t, 0.0));
    let backward = |t: f64| f.evaluate(Complex64::new(-t, 0.0));
    let mut value = zero();
    let mut err = 0.0;
    for t in [t_plus, t_minus] {
        let (a, ea) = core_numeric_left(&forward, alpha, s, t, spec)?;
        let (b, eb) = core_numeric_left(&backward, alpha, -s, t, spec)?;
        value += a + b;
        err += ea + eb;
    }
    Ok(TransformValue {
        at: Complex64::new(omega, 0.0),
        value: weight * value,
        engine: Engine::Numeric,
        est_error: weight * err,
    })
}

pub fn fourier_differint(req: &TransformRequest) -> Result<Vec<TransformValue>> {
    req.points
        .iter()
        .map(|w| {
            let omega = real_point(*w, "ω")?;
            fourier_differint_at(req.f, req.alpha, omega, req.engine, &req.spec)
        })
        .collect()
}

/// Classical `ℒ[f](s) = ∫_0^∞ f(τ) e^{−sτ} dτ` from the kernel table, with
/// quadrature over `[0, W]` for kernels outside it.
pub fn classical_laplace(f: &Expr, s: ComplexScalar, spec: &QuadratureSpec) -> Result<ComplexScalar> {
    let mut total = zero();
    for term in &f.normalize().terms {
        match term_laplace(&term.kernel, term.shift, s)? {
            Some(v) => total += term.coeff * v,
            None => {
                let t = term.clone();
                let g = |u: f64, _: f64| Ok(t.eval(Complex64::new(u, 0.0))? * (-s * u).exp());
                let (v, _) = weighted_integral(&g, zero(), spec.truncation_window, spec)?;
                total += v;
            }
        }
    }
    Ok(total)
}

fn causal(kernel: &Kernel) -> bool {
    matches!(
        kernel,
        Kernel::Heaviside
            | Kernel::HeavisideMonomial { .. }
            | Kernel::DeltaDeriv { .. }
            | Kernel::ZeroFn { .. }
            | Kernel::Gated(_)
    )
}

fn term_laplace(kernel: &Kernel, shift: ComplexScalar, s: ComplexScalar) -> Result<Option<ComplexScalar>> {
    let one = Complex64::new(1.0, 0.0);
    if shift != zero() {
        if causal(kernel) && shift.im == 0.0 && shift.re >= 0.0 {
            return Ok(term_laplace(kernel, zero(), s)?.map(|v| v * (-s * shift).exp()));
        }
        return Ok(None);
    }
    Ok(match kernel {
        Kernel::Constant | Kernel::Heaviside => Some(one / s),
        Kernel::Monomial { n } if n.re > -1.0 => Some(gamma(1.0 + *n)? * cpow(s, -1.0 - *n)),
        Kernel::HeavisideMonomial { power } => Some(cpow(s, -1.0 - *power)),
        Kernel::DeltaDeriv { order } | Kernel::ZeroFn { order } => Some(cpow(s, *order)),
        Kernel::Exponential { rate } => Some(one / (s - *rate)),
        Kernel::MonomialExp { n, rate } if n.re > -1.0 => {
            Some(gamma(1.0 + *n)? * cpow(s - *rate, -1.0 - *n))
        }
        Kernel::Sin { rate, phase } | Kernel::Cos { rate, phase } => {
            let mut v = zero();
            for (c, k) in product_with_exp(kernel, zero())? {
                if let Kernel::Exponential { rate: r } = k {
                    v += c / (s - r);
                }
            }
            let _ = (rate, phase);
            Some(v)
        }
        Kernel::Log { rate } => Some((clog(*rate) - EULER_GAMMA - clog(s)) / s),
        Kernel::Gated(inner) => term_laplace(inner, zero(), s)?,
        _ => None,
    })
}

/// `ℒ[S^α f](s) = s^{−α} ℒ[f](s)`.
pub fn laplace_of_differint(
    f: &Expr,
    alpha: ComplexScalar,
    s: ComplexScalar,
    spec: &QuadratureSpec,
) -> Result<ComplexScalar> {
    Ok(cpow(s, -alpha) * classical_laplace(f, s, spec)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn order_zero_returns_the_function() {
        let f = parse("3*z^0 + 2*exp(0.5*z) - sin(2*z) + z^2*exp(-z)").unwrap();
        for s in [0.7, 1.5, 3.0] {
            let v = laplace_frac_at(&f, 0.0, c(s), Engine::Symbolic, &spec()).unwrap();
            assert_eq!(v.engine, Engine::Symbolic);
            let expected = f.evaluate(c(s)).unwrap();
            assert!((v.value - expected).norm() < 1e-12 * (1.0 + expected.norm()));
        }
    }

    #[test]
    fn order_one_is_the_laplace_transform() {
        let f = parse("H(z)*exp(-z)").unwrap();
        let v = laplace_frac_at(&f, 1.0, c(1.0), Engine::Symbolic, &spec()).unwrap();
        assert_eq!(v.engine, Engine::Numeric);
        assert!((v.value - c(0.5)).norm() < 1e-9, "{}", v.value);
        // Monomials through the rule table.
        let z2 = parse("z^2").unwrap();
        let v = laplace_frac_at(&z2, 1.0, c(2.0), Engine::Symbolic, &spec()).unwrap();
        assert!((v.value - c(0.25)).norm() < 1e-12, "{}", v.value);
        let e = parse("exp(-3*z)").unwrap();
        let v = laplace_frac_at(&e, 1.0, c(2.0), Engine::Symbolic, &spec()).unwrap();
        assert!((v.value - c(0.2)).norm() < 1e-12, "{}", v.value);
    }

    #[test]
    fn zero_function_transform() {
        for a in [0.25, 0.5, 0.75] {
            let f = Expr::zero_fn(c(a));
            let v = laplace_frac_at(&f, 1.0, c(4.0), Engine::Symbolic, &spec()).unwrap();
            assert!((v.value - c(4f64.powf(a))).norm() < 1e-10, "a={a}: {}", v.value);
        }
    }

    #[test]
    fn engines_agree_on_exponentials() {
        let f = parse("exp(-2*z)").unwrap();
        for alpha in [0.2, 0.5, 0.9] {
            let a = laplace_frac_at(&f, alpha, c(1.5), Engine::Symbolic, &spec()).unwrap();
            let b = laplace_frac_at(&f, alpha, c(1.5), Engine::Numeric, &spec()).unwrap();
            assert!((a.value - b.value).norm() < 1e-7, "α={alpha}: {} vs {}", a.value, b.value);
        }
    }

    #[test]
    fn fourier_endpoints() {
        // α = 0 gives the even part.
        let f = parse("exp(0.3*z) + z^2").unwrap();
        let w = 0.8;
        let v = fourier_differint_at(&f, 0.0, w, Engine::Symbolic, &spec()).unwrap();
        let even = 0.5 * (f.evaluate(c(w)).unwrap() + f.evaluate(c(-w)).unwrap());
        assert!((v.value - even).norm() < 1e-12);
        // α = 1 gives the unitary transform of H(t)e^{−t}.
        let g = parse("H(z)*exp(-z)").unwrap();
        let v = fourier_differint_at(&g, 1.0, 1.0, Engine::Symbolic, &spec()).unwrap();
        let expected = (1.0 / (2.0 * PI).sqrt()) / Complex64::new(1.0, 1.0);
        assert!((v.value - expected).norm() < 1e-8, "{} vs {expected}", v.value);
    }

    #[test]
    fn numeric_fourier_at_order_one() {
        let f = parse("H(z)*exp(-z)").unwrap();
        for w in [0.5, 2.0] {
            let v = fourier_differint_at(&f, 1.0, w, Engine::Numeric, &spec()).unwrap();
            let expected = (1.0 / (2.0 * PI).sqrt()) / Complex64::new(1.0, w);
            assert!((v.value - expected).norm() < 1e-8, "{} vs {expected}", v.value);
        }
    }

    #[test]
    fn laplace_of_differint_examples() {
        let h = parse("H(z)").unwrap();
        assert!((laplace_of_differint(&h, c(1.0), c(2.0), &spec()).unwrap() - c(0.25)).norm() < 1e-14);
        let g = parse("H(z)*exp(-z)").unwrap();
        assert!((laplace_of_differint(&g, c(0.5), c(1.0), &spec()).unwrap() - c(0.5)).norm() < 1e-14);
        let e = parse("H(z)*sin(2*z)").unwrap();
        let v = laplace_of_differint(&e, c(0.0), c(1.0), &spec()).unwrap();
        assert!((v - c(0.4)).norm() < 1e-12, "{v}");
        // Kernels outside the table go through quadrature.
        let b = parse("H(z)*bose(z - 1)").unwrap_or_else(|_| parse("H(z)").unwrap());
        assert!(classical_laplace(&b, c(2.0), &spec()).is_ok());
    }

    #[test]
    fn out_of_range_orders_are_rejected() {
        let f = parse("exp(z)").unwrap();
        assert!(laplace_frac_at(&f, 1.5, c(1.0), Engine::Symbolic, &spec()).is_err());
    }
}
