//! Closed-form rules against direct quadrature of the defining integral.

use differint_core::expr::parse;
use differint_core::quadrature::{differint_numeric, differint_numeric_continued, LowerBound, QuadratureSpec};
use differint_core::special::{gamma, mittag_leffler};
use differint_core::transforms::{laplace_frac_at, laplace_of_differint, Engine};
use differint_core::{differintegrate, Complex64};
use proptest::prelude::*;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn minus_inf() -> QuadratureSpec {
    QuadratureSpec::with_lower_bound(LowerBound::MinusInfinity)
}

fn from_zero() -> QuadratureSpec {
    QuadratureSpec::with_lower_bound(LowerBound::Finite(0.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn exponentials_match_weyl_quadrature(rate in 0.3f64..2.5, alpha in -1.5f64..2.5, x in -1.0f64..1.5) {
        let f = parse(&format!("exp({rate}*z)")).unwrap();
        let sym = differintegrate(&f, c(alpha)).unwrap().expr.evaluate(c(x)).unwrap();
        let num = differint_numeric_continued(&f, c(alpha), x, &minus_inf()).unwrap().value;
        prop_assert!((sym - num).norm() < 1e-6 * (1.0 + sym.norm()), "{} vs {}", sym, num);
    }

    #[test]
    fn monomials_match_finite_bound_quadrature(n in 0.0f64..3.0, alpha in 0.05f64..2.5, x in 0.2f64..3.0) {
        let sym = differintegrate(&parse(&format!("z^{n}")).unwrap(), c(alpha)).unwrap().expr;
        let f = move |t: f64| c(if t > 0.0 { t.powf(n) } else { 0.0 });
        let num = differint_numeric(&f, c(alpha), x, &from_zero()).unwrap().value;
        let s = sym.evaluate(c(x)).unwrap();
        prop_assert!((s - num).norm() < 1e-8 * (1.0 + s.norm()), "{} vs {}", s, num);
    }

    #[test]
    fn numeric_operator_is_linear(a in -2.0f64..2.0, b in -2.0f64..2.0, alpha in 0.1f64..1.9) {
        let f = |t: f64| c(t.exp());
        let g = |t: f64| c((0.5 * t).exp());
        let fg = move |t: f64| a * f(t) + b * g(t);
        let x = 0.4;
        let lhs = differint_numeric(&fg, c(alpha), x, &minus_inf()).unwrap().value;
        let rhs = a * differint_numeric(&f, c(alpha), x, &minus_inf()).unwrap().value
            + b * differint_numeric(&g, c(alpha), x, &minus_inf()).unwrap().value;
        prop_assert!((lhs - rhs).norm() < 1e-9 * (1.0 + lhs.norm()));
    }

    #[test]
    fn laplace_engines_agree(rate in 0.2f64..2.0, alpha in 0.05f64..0.95, s in 0.5f64..3.0) {
        let f = parse(&format!("exp(-{rate}*z)")).unwrap();
        let spec = QuadratureSpec::default();
        let a = laplace_frac_at(&f, alpha, c(s), Engine::Symbolic, &spec).unwrap();
        let b = laplace_frac_at(&f, alpha, c(s), Engine::Numeric, &spec).unwrap();
        prop_assert_eq!(a.engine, Engine::Symbolic);
        prop_assert!((a.value - b.value).norm() < 1e-6 * (1.0 + a.value.norm()), "{} vs {}", a.value, b.value);
    }
}

#[test]
fn complex_orders_match() {
    let f = parse("exp(1.5*z)").unwrap();
    for alpha in [Complex64::new(0.5, 0.4), Complex64::new(-0.3, -0.8)] {
        let sym = differintegrate(&f, alpha).unwrap().expr.evaluate(c(0.2)).unwrap();
        let num = differint_numeric_continued(&f, alpha, 0.2, &minus_inf()).unwrap().value;
        assert!((sym - num).norm() < 1e-6, "α={alpha}: {sym} vs {num}");
    }
}

#[test]
fn kummer_rule_is_the_weyl_integral_of_the_principal_branch() {
    // For τ < 0 the principal τ^n is e^{iπn}|τ|^n, so the image is complex.
    // Points x < 0 keep the branch point out of the integration range.
    let f = parse("z^0.5*exp(z)").unwrap();
    let g = |t: f64| c(t).powc(c(0.5)) * t.exp();
    for alpha in [0.3, 1.2] {
        let sym = differintegrate(&f, c(alpha)).unwrap().expr;
        for x in [-0.4, -1.0, -2.5] {
            let num = differint_numeric(&g, c(alpha), x, &minus_inf()).unwrap().value;
            let s = sym.evaluate(c(x)).unwrap();
            assert!((s - num).norm() < 1e-7 * (1.0 + s.norm()), "α={alpha} x={x}: {s} vs {num}");
        }
    }
}

#[test]
fn laplace_of_differint_against_quadrature() {
    let spec = QuadratureSpec::default();
    let f = parse("H(z)*exp(-z)").unwrap();
    let closed = laplace_of_differint(&f, c(1.0), c(2.0), &spec).unwrap();
    assert!((closed - c(1.0 / 6.0)).norm() < 1e-14);
    // S^α[H t] = H t^{1+α}/Γ(2+α), transformed by quadrature over [0, 60].
    let s = 1.7;
    for alpha in [0.3, 0.8] {
        let scale = 1.0 / gamma(c(2.0 + alpha)).unwrap().re;
        let g = move |t: f64| c(if t > 0.0 { t.powf(1.0 + alpha) * scale * (-s * t).exp() } else { 0.0 });
        let num = differint_numeric(&g, c(1.0), 60.0, &from_zero()).unwrap().value;
        let closed = laplace_of_differint(&parse("H(z)*z").unwrap(), c(alpha), c(s), &spec).unwrap();
        assert!((closed - num).norm() < 1e-9, "α={alpha}: {closed} vs {num}");
    }
}

#[test]
fn mittag_leffler_relaxation_closed_form() {
    // S^{0.5} applied to t^{-1/2}/Γ(1/2) gives 1 on t > 0.
    let g = gamma(c(0.5)).unwrap();
    let f = move |t: f64| if t > 0.0 { c(1.0 / (t.sqrt() * g.re)) } else { c(0.0) };
    let v = differint_numeric(&f, c(0.5), 1.3, &from_zero()).unwrap().value;
    assert!((v - c(1.0)).norm() < 1e-9);
    assert!((mittag_leffler(1.0, c(0.7)).unwrap() - c(0.7f64.exp())).norm() < 1e-13);
}
