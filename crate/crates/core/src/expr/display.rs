//! Human-readable output in the same syntax [`super::parse`] accepts.

use std::fmt;

use num_complex::Complex64;

use super::{Expr, Kernel, Term};
use crate::special::reciprocal_gamma;

pub(crate) fn fmt_complex(c: Complex64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.re == 0.0 {
        format!("{}i", c.im)
    } else if c.im < 0.0 {
        format!("({}-{}i)", c.re, -c.im)
    } else {
        format!("({}+{}i)", c.re, c.im)
    }
}

fn fmt_real_factor(rate: Complex64, var: &str) -> String {
    if rate == Complex64::new(1.0, 0.0) {
        var.to_string()
    } else if rate == Complex64::new(-1.0, 0.0) {
        format!("-{var}")
    } else {
        format!("{}*{var}", fmt_complex(rate))
    }
}

fn fmt_power(var: &str, n: Complex64) -> String {
    if n == Complex64::new(1.0, 0.0) {
        var.to_string()
    } else if n.im == 0.0 && n.re >= 0.0 {
        format!("{var}^{}", n.re)
    } else {
        format!("{var}^({})", fmt_complex(n))
    }
}

fn variable(shift: Complex64) -> (String, String) {
    if shift == Complex64::new(0.0, 0.0) {
        ("z".into(), "z".into())
    } else {
        let inner = if shift.im == 0.0 && shift.re > 0.0 {
            format!("z-{}", shift.re)
        } else if shift.im == 0.0 {
            format!("z+{}", -shift.re)
        } else {
            format!("z-{}", fmt_complex(shift))
        };
        (format!("({inner})"), inner)
    }
}

/// The kernel body with the scale factor the body absorbs into the coefficient.
fn body(kernel: &Kernel, shift: Complex64) -> (Complex64, String) {
    let one = Complex64::new(1.0, 0.0);
    let (var, bare) = variable(shift);
    let arg_suffix = if shift == Complex64::new(0.0, 0.0) {
        String::new()
    } else {
        format!(", {bare}")
    };
    match kernel {
        Kernel::Constant => (one, String::new()),
        Kernel::Monomial { n } => (one, fmt_power(&var, *n)),
        Kernel::ZeroFn { order } => (one, format!("zero({}{arg_suffix})", fmt_complex(*order))),
        Kernel::Heaviside => (one, format!("H({bare})")),
        Kernel::DeltaDeriv { order } => (one, format!("delta({}{arg_suffix})", fmt_complex(*order))),
        Kernel::HeavisideMonomial { power } => {
            let scale = reciprocal_gamma(1.0 + *power);
            if *power == Complex64::new(0.0, 0.0) {
                (one, format!("H({bare})"))
            } else {
                (scale, format!("H({bare})*{}", fmt_power(&var, *power)))
            }
        }
        Kernel::Exponential { rate } => (one, format!("exp({})", fmt_real_factor(*rate, &var))),
        Kernel::Sin { rate, phase } | Kernel::Cos { rate, phase } => {
            let name = if matches!(kernel, Kernel::Sin { .. }) { "sin" } else { "cos" };
            let lin = fmt_real_factor(Complex64::new(*rate, 0.0), &var);
            if *phase == Complex64::new(0.0, 0.0) {
                (one, format!("{name}({lin})"))
            } else {
                (one, format!("{name}({lin} + {})", fmt_complex(*phase)))
            }
        }
        Kernel::Log { rate } => (one, format!("ln({})", fmt_real_factor(*rate, &var))),
        Kernel::LogMonomial { order, rate } => (
            one,
            format!("lnmono({}, {}{arg_suffix})", fmt_complex(*order), fmt_complex(*rate)),
        ),
        Kernel::BoseKernel => (one, format!("bose({bare})")),
        Kernel::PolylogExp { s } => (one, format!("li({}{arg_suffix})", fmt_complex(*s))),
        Kernel::MonomialExp { n, rate } => (
            one,
            format!("{}*exp({})", fmt_power(&var, *n), fmt_real_factor(*rate, &var)),
        ),
        Kernel::KummerPair { n, rate, order } => (
            one,
            format!(
                "kummer({}, {}, {}{arg_suffix})",
                fmt_complex(*n),
                fmt_complex(*rate),
                fmt_complex(*order)
            ),
        ),
        Kernel::Gated(inner) => {
            let (scale, b) = body(inner, shift);
            (scale, format!("H({bare})*{b}"))
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (scale, b) = body(&self.kernel, self.shift);
        let c = self.coeff * scale;
        if b.is_empty() {
            return write!(f, "{}", fmt_complex(c));
        }
        if c == Complex64::new(1.0, 0.0) {
            write!(f, "{b}")
        } else if c == Complex64::new(-1.0, 0.0) {
            write!(f, "-{b}")
        } else {
            write!(f, "{}*{b}", fmt_complex(c))
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            let s = t.to_string();
            if i == 0 {
                write!(f, "{s}")?;
            } else if let Some(rest) = s.strip_prefix('-') {
                write!(f, " - {rest}")?;
            } else {
                write!(f, " + {s}")?;
            }
        }
        Ok(())
    }
}
