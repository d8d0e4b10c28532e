//! Closed-form differintegrals, term by term.
//!
//! `S^α` integrates for `Re α > 0` and differentiates for `Re α < 0`. Every
//! kernel class is closed under the table below, so the output is again an
//! [`Expr`]. Shifts pass through unchanged.
//!
//! | kernel              | `S^α` of it                                        |
//! |---------------------|----------------------------------------------------|
//! | `z^n`               | `Γ(1+n)/Γ(1+n+α) · z^{n+α}`                        |
//! | `∅^{(k)}`           | `∅^{(k−α)}`                                        |
//! | `δ^{(k)}`           | `H(z) z^{α−1−k}/Γ(α−k)`                            |
//! | `H z^p/Γ(1+p)`      | `H z^{p+α}/Γ(1+p+α)`                               |
//! | `e^{λz}`            | `λ^{−α} e^{λz}`                                    |
//! | `sin(λz+φ)`         | `|λ|^{−α} sin(λz + φ − απ/2)`                      |
//! | `ln(λz)`            | `z^α (ln z + ln λ − γ − ψ(1+α))/Γ(1+α)`            |
//! | `Li_s(e^z)`         | `Li_{s+α}(e^z)`                                    |
//! | `z^n e^{λz}`        | Kummer pair of order `α`                           |

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expr::{Expr, Kernel, Term};
use crate::special::{as_integer, cpow, gamma, reciprocal_gamma};
use crate::ComplexScalar;

/// Which table entry handled an input term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    Monomial,
    /// A monomial whose order lands on a negative integer power.
    MonomialToZeroFunction,
    ZeroFunction,
    DeltaDerivative,
    HeavisideMonomial,
    Exponential,
    Trigonometric,
    Logarithm,
    LogMonomial,
    BoseKernel,
    Polylog,
    MonomialExponential,
    KummerPair,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleResult {
    /// Normalized output.
    pub expr: Expr,
    /// One entry per term of the normalized input.
    pub rule_applied: Vec<Rule>,
    /// Principal-branch choices and known ambiguities.
    pub branch_notes: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RuleOptions {
    /// Multiply the images of `δ^{(k)}` and `H·z^p` terms by `e^{−iπα}`, the
    /// phase of the distributional action. Off by default.
    pub distribution_phase: bool,
}

/// `S^α e` with default options.
pub fn differintegrate(e: &Expr, alpha: ComplexScalar) -> Result<RuleResult> {
    differintegrate_with(e, alpha, RuleOptions::default())
}

pub fn differintegrate_with(e: &Expr, alpha: ComplexScalar, options: RuleOptions) -> Result<RuleResult> {
    let input = e.normalize();
    let mut out = Vec::with_capacity(input.terms.len());
    let mut rule_applied = Vec::with_capacity(input.terms.len());
    let mut branch_notes = Vec::new();
    for term in &input.terms {
        let (rule, images) = apply(&term.kernel, alpha, &mut branch_notes)?;
        let phase = if options.distribution_phase
            && matches!(term.kernel, Kernel::DeltaDeriv { .. } | Kernel::HeavisideMonomial { .. })
        {
            (-Complex64::i() * PI * alpha).exp()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for (scale, kernel) in images {
            out.push(Term {
                coeff: term.coeff * scale * phase,
                shift: term.shift,
                kernel,
            });
        }
        rule_applied.push(rule);
    }
    Ok(RuleResult {
        expr: Expr::from_terms(out).normalize(),
        rule_applied,
        branch_notes,
    })
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn apply(kernel: &Kernel, alpha: ComplexScalar, notes: &mut Vec<String>) -> Result<(Rule, Vec<(Complex64, Kernel)>)> {
    Ok(match kernel {
        Kernel::Constant => apply(&Kernel::Monomial { n: Complex64::new(0.0, 0.0) }, alpha, notes)?,
        Kernel::Monomial { n } => {
            let n = *n;
            if let Some(k) = as_integer(n).filter(|k| *k < 0) {
                return Err(Error::NegativeIntegerMonomial {
                    exponent: k,
                    order: -1 - k,
                });
            }
            let g = gamma(1.0 + n)?;
            let target = n + alpha;
            match as_integer(target) {
                Some(m) if m < 0 => (
                    Rule::MonomialToZeroFunction,
                    vec![(g, Kernel::ZeroFn { order: -1.0 - target })],
                ),
                _ => (
                    Rule::Monomial,
                    vec![(g * reciprocal_gamma(1.0 + target), Kernel::Monomial { n: target })],
                ),
            }
        }
        Kernel::ZeroFn { order } => (Rule::ZeroFunction, vec![(one(), Kernel::ZeroFn { order: *order - alpha })]),
        Kernel::DeltaDeriv { order } => (
            Rule::DeltaDerivative,
            vec![(one(), Kernel::HeavisideMonomial { power: alpha - 1.0 - *order })],
        ),
        Kernel::Heaviside => (
            Rule::HeavisideMonomial,
            vec![(one(), Kernel::HeavisideMonomial { power: alpha })],
        ),
        Kernel::HeavisideMonomial { power } => (
            Rule::HeavisideMonomial,
            vec![(one(), Kernel::HeavisideMonomial { power: *power + alpha })],
        ),
        Kernel::Exponential { rate } => {
            if rate.im != 0.0 || rate.re < 0.0 {
                notes.push(format!(
                    "λ^(-α) for λ = {rate} taken on the principal branch, arg λ = {:.6}",
                    rate.arg()
                ));
            }
            (Rule::Exponential, vec![(cpow(*rate, -alpha), kernel.clone())])
        }
        Kernel::Sin { rate, phase } | Kernel::Cos { rate, phase } => {
            if *rate < 0.0 {
                notes.push(format!(
                    "|λ|^(-α) trig rule used for λ = {rate} < 0; the exponential route differs for negative λ"
                ));
            }
            let scale = cpow(Complex64::new(rate.abs(), 0.0), -alpha);
            let phase = *phase - alpha * FRAC_PI_2;
            let image = match kernel {
                Kernel::Sin { .. } => Kernel::Sin { rate: *rate, phase },
                _ => Kernel::Cos { rate: *rate, phase },
            };
            (Rule::Trigonometric, vec![(scale, image)])
        }
        Kernel::Log { rate } => (
            Rule::Logarithm,
            vec![(one(), Kernel::LogMonomial { order: alpha, rate: *rate })],
        ),
        Kernel::LogMonomial { order, rate } => (
            Rule::LogMonomial,
            vec![(one(), Kernel::LogMonomial { order: *order + alpha, rate: *rate })],
        ),
        Kernel::BoseKernel => (Rule::BoseKernel, vec![(one(), Kernel::PolylogExp { s: alpha })]),
        Kernel::PolylogExp { s } => (Rule::Polylog, vec![(one(), Kernel::PolylogExp { s: *s + alpha })]),
        Kernel::MonomialExp { n, rate } => {
            if rate.im != 0.0 || rate.re < 0.0 {
                notes.push(format!("λ^(-α) in the Kummer pair for λ = {rate} on the principal branch"));
            }
            (
                Rule::MonomialExponential,
                vec![(one(), Kernel::KummerPair { n: *n, rate: *rate, order: alpha })],
            )
        }
        Kernel::KummerPair { n, rate, order } => (
            Rule::KummerPair,
            vec![(one(), Kernel::KummerPair { n: *n, rate: *rate, order: *order + alpha })],
        ),
        Kernel::Gated(inner) => {
            return Err(Error::Unsupported(format!(
                "no closed form for H(z) times a {}; use the numeric engine",
                inner.name()
            )))
        }
    })
}

/// `∅^{(order)}(z) = z^{−1−order}/Γ(−order)`.
pub fn zero_function_value(order: ComplexScalar, z: ComplexScalar) -> Result<ComplexScalar> {
    let exponent = -1.0 - order;
    let scale = reciprocal_gamma(-order);
    if z == Complex64::new(0.0, 0.0) {
        if exponent.re > 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        if exponent == Complex64::new(0.0, 0.0) {
            return Ok(scale);
        }
        return Err(Error::Singular {
            kernel: "zero function".into(),
            at: z,
        });
    }
    if scale == Complex64::new(0.0, 0.0) {
        return Ok(scale);
    }
    Ok(scale * cpow(z, exponent))
}

/// Coefficients of the complimentary series for lower bound `x0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplimentarySeries {
    pub x0: ComplexScalar,
    pub coefficients: Vec<ComplexScalar>,
    /// Order `α` of the derivative the series corrects (set by
    /// [`reconstruct_with_complimentary`]; zero when only coefficients were
    /// requested).
    pub order_offset: ComplexScalar,
}

impl ComplimentarySeries {
    /// Recompute the recursion and compare within relative `tol`.
    pub fn check(&self, f: &Expr, tol: f64) -> Result<bool> {
        let again = complimentary_coefficients(f, self.x0, self.coefficients.len())?;
        Ok(self
            .coefficients
            .iter()
            .zip(&again.coefficients)
            .all(|(a, b)| (a - b).norm() <= tol * (1.0 + a.norm())))
    }

    /// `Σ c_k ∅^{(k+α)}` as an expression.
    pub fn correction(&self, alpha: ComplexScalar) -> Expr {
        Expr::from_terms(
            self.coefficients
                .iter()
                .enumerate()
                .map(|(k, c)| Term::new(*c, Kernel::ZeroFn { order: alpha + k as f64 }))
                .collect(),
        )
        .normalize()
    }
}

/// `c_k = S^{k+1} f(x0) − Σ_{j<k} c_j x0^{k−j}/(k−j)!`.
///
/// With these coefficients `J^n_{x0} f = S^n f − Σ_{k<n} c_k ∅^{(k−n)}` for
/// every integer `n`: the polynomial on the right has the derivatives
/// `S^{n−m} f(x0)` at `x0`, which is what the finite-bound integral needs to
/// subtract.
pub fn complimentary_coefficients(f: &Expr, x0: ComplexScalar, count: usize) -> Result<ComplimentarySeries> {
    let mut coefficients: Vec<Complex64> = Vec::with_capacity(count);
    for k in 0..count {
        let image = differintegrate(f, Complex64::new((k + 1) as f64, 0.0))?.expr;
        let value = image.evaluate(x0).map_err(|e| match e {
            Error::Singular { .. } | Error::Domain { .. } | Error::Pole { .. } => Error::SingularCoefficient { k, x0 },
            other => other,
        })?;
        let mut c = value;
        let mut factorial = 1.0;
        for (d, cj) in (1..=k).zip(coefficients.iter().rev()) {
            factorial *= d as f64;
            c -= cj * cpow(x0, Complex64::new(d as f64, 0.0)) / factorial;
        }
        coefficients.push(c);
    }
    Ok(ComplimentarySeries {
        x0,
        coefficients,
        order_offset: Complex64::new(0.0, 0.0),
    })
}

/// `S^{−α} f − Σ_{k<K} c_k ∅^{(k+α)}`, the derivative of order `α` taken
/// from lower bound `x0`.
///
/// For non-integer `α` this is an asymptotic series in `k` whose terms grow
/// like `k!/x^k`; truncation error is smallest near `k ≈ x`.
pub fn reconstruct_with_complimentary(
    f: &Expr,
    x0: ComplexScalar,
    alpha: ComplexScalar,
    count: usize,
) -> Result<(Expr, ComplimentarySeries)> {
    let base = differintegrate(f, -alpha)?.expr;
    let mut series = complimentary_coefficients(f, x0, count)?;
    series.order_offset = alpha;
    let corrected = (base - series.correction(alpha)).normalize();
    Ok((corrected, series))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use approx::assert_relative_eq;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn d(src: &str, alpha: f64) -> Expr {
        differintegrate(&parse(src).unwrap(), c(alpha)).unwrap().expr
    }

    #[test]
    fn table_examples() {
        assert!(d("z^0", 1.0).structurally_eq(&parse("z").unwrap(), 1e-12));
        assert!(d("exp(2*z)", -0.5).structurally_eq(&parse("1.4142135623730951*exp(2*z)").unwrap(), 1e-12));
        assert!(d("z^2", 1.0).structurally_eq(&parse("z^3/3").unwrap(), 1e-12));
        let h = d("H(z)", 0.5);
        let g15 = gamma(c(1.5)).unwrap().re;
        assert!(h.structurally_eq(&parse(&format!("H(z)*z^0.5/{g15}")).unwrap(), 1e-12));
        let s = d("sin(3*z)", -1.0);
        assert!(s.structurally_eq(&parse("3*sin(3*z + 1.5707963267948966)").unwrap(), 1e-12));
        assert_relative_eq!(s.evaluate(c(0.4)).unwrap().re, 3.0 * (1.2f64).cos(), max_relative = 1e-13);
    }

    #[test]
    fn monomial_to_zero_function() {
        // d²/dz² z = 0 a.e., written as ∅^{(0)}.
        let r = differintegrate(&parse("z").unwrap(), c(-2.0)).unwrap();
        assert_eq!(r.rule_applied, vec![Rule::MonomialToZeroFunction]);
        assert_eq!(r.expr.terms[0].kernel, Kernel::ZeroFn { order: c(0.0) });
        assert_eq!(r.expr.evaluate(c(1.7)).unwrap(), c(0.0));
        // And integrating back recovers z.
        let back = differintegrate(&r.expr, c(2.0)).unwrap().expr;
        assert!(back.structurally_eq(&parse("z").unwrap(), 1e-12));
    }

    #[test]
    fn delta_maps_to_heaviside_power() {
        let r = d("delta(0)", 0.5);
        assert_eq!(r.terms[0].kernel, Kernel::HeavisideMonomial { power: c(-0.5) });
        assert!(d("delta(0)", 1.0).structurally_eq(&parse("H(z)").unwrap(), 1e-12));
        assert!(d("H(z)", -1.0).structurally_eq(&parse("delta(0)").unwrap(), 1e-12));
    }

    #[test]
    fn distribution_phase_option() {
        let e = parse("delta(0)").unwrap();
        let alpha = c(0.5);
        let plain = differintegrate(&e, alpha).unwrap().expr;
        let phased = differintegrate_with(&e, alpha, RuleOptions { distribution_phase: true }).unwrap().expr;
        let ratio = phased.terms[0].coeff / plain.terms[0].coeff;
        assert_relative_eq!(ratio.im, -1.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_function_values() {
        assert_eq!(zero_function_value(c(3.0), c(2.5)).unwrap(), c(0.0));
        assert_relative_eq!(zero_function_value(c(-1.0), c(2.5)).unwrap().re, 1.0);
        assert_relative_eq!(zero_function_value(c(-1.0), c(0.0)).unwrap().re, 1.0);
        assert_relative_eq!(zero_function_value(c(0.5), c(1.0)).unwrap().re, -0.282_094_791_8, max_relative = 1e-9);
        assert!(zero_function_value(c(0.0), c(0.0)).is_err());
    }

    #[test]
    fn trig_rule_agrees_with_exponential_route() {
        let alpha = c(0.63);
        let lam = 1.7;
        let trig = d(&format!("sin({lam}*z)"), 0.63);
        let i = Complex64::i();
        let expo = Expr::from_terms(vec![
            Term::new(1.0 / (2.0 * i), Kernel::Exponential { rate: i * lam }),
            Term::new(-1.0 / (2.0 * i), Kernel::Exponential { rate: -i * lam }),
        ]);
        let expo = differintegrate(&expo, alpha).unwrap().expr;
        for k in 0..20 {
            let z = c(-3.0 + 0.31 * k as f64);
            let a = trig.evaluate(z).unwrap();
            let b = expo.evaluate(z).unwrap();
            assert!((a - b).norm() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn negative_rate_trig_is_flagged() {
        let r = differintegrate(&parse("sin(-2*z)").unwrap(), c(0.5)).unwrap();
        assert_eq!(r.branch_notes.len(), 1);
    }

    #[test]
    fn log_rule_tends_to_reciprocal() {
        for k in 4..=8 {
            let eps = 10f64.powi(-k);
            let kern = Kernel::LogMonomial { order: c(-1.0 + eps), rate: c(1.0) };
            let z = 1.7;
            let v = kern.eval(c(z)).unwrap();
            assert!((v.re - 1.0 / z).abs() < 50.0 * eps, "k={k}: {v}");
        }
        // Exactly at the integer the pole-cancelled form gives 1/z.
        let exact = d("ln(z)", -1.0);
        assert_relative_eq!(exact.evaluate(c(1.7)).unwrap().re, 1.0 / 1.7, max_relative = 1e-13);
    }

    #[test]
    fn bose_kernel_maps_to_polylog_and_zeta() {
        let r = d("bose(z)", 2.0);
        assert_eq!(r.terms[0].kernel, Kernel::PolylogExp { s: c(2.0) });
        assert_relative_eq!(r.evaluate(c(0.0)).unwrap().re, PI * PI / 6.0, max_relative = 1e-10);
    }

    #[test]
    fn complimentary_examples() {
        let s = complimentary_coefficients(&parse("exp(z)").unwrap(), c(0.0), 3).unwrap();
        for ck in &s.coefficients {
            assert_relative_eq!(ck.re, 1.0, max_relative = 1e-14);
        }
        let s = complimentary_coefficients(&parse("z^0").unwrap(), c(0.0), 2).unwrap();
        assert_eq!(s.coefficients, vec![c(0.0), c(0.0)]);
        assert!(s.check(&parse("z^0").unwrap(), 1e-12).unwrap());
        // Singular evaluation names k.
        match complimentary_coefficients(&parse("bose(z)").unwrap(), c(0.0), 2) {
            Err(Error::SingularCoefficient { k: 0, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    /// `J^n_{x0} f(x)` by composite Simpson on the Cauchy formula.
    fn cauchy(f: impl Fn(f64) -> f64, x0: f64, x: f64, n: i32) -> f64 {
        let m = 2000;
        let h = (x - x0) / m as f64;
        let fact: f64 = (1..n).map(|k| k as f64).product();
        let g = |t: f64| (x - t).powi(n - 1) * f(t) / fact;
        let mut s = g(x0) + g(x);
        for i in 1..m {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * g(x0 + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn integer_reconstruction_matches_cauchy_formula() {
        let f = parse("exp(z) + z^2").unwrap();
        let x0 = 0.7;
        for n in 1..=3 {
            let (recon, _) = reconstruct_with_complimentary(&f, c(x0), c(-(n as f64)), n).unwrap();
            for x in [1.1, 2.4] {
                let oracle = cauchy(|t| t.exp() + t * t, x0, x, n as i32);
                assert_relative_eq!(recon.evaluate(c(x)).unwrap().re, oracle, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn integer_order_corrections_vanish() {
        let f = parse("exp(z)").unwrap();
        let (recon, series) = reconstruct_with_complimentary(&f, c(0.3), c(2.0), 5).unwrap();
        for k in 0..5 {
            assert_eq!(zero_function_value(c(2.0 + k as f64), c(1.3)).unwrap(), c(0.0));
        }
        assert_eq!(series.order_offset, c(2.0));
        assert_relative_eq!(recon.evaluate(c(1.3)).unwrap().re, (1.3f64).exp(), max_relative = 1e-13);
        let (plain, _) = reconstruct_with_complimentary(&f, c(0.3), c(0.5), 0).unwrap();
        assert!(plain.structurally_eq(&differintegrate(&f, c(-0.5)).unwrap().expr, 1e-14));
    }

    #[test]
    fn gated_kernels_are_rejected() {
        assert!(matches!(
            differintegrate(&parse("H(z)*exp(-z)").unwrap(), c(0.5)),
            Err(Error::Unsupported(_))
        ));
    }
}
