//! Direct quadrature of `S^α f(x) = 1/Γ(α) ∫_c^x f(τ)(x−τ)^{α−1} dτ`.
//!
//! With `u = x − τ` the integrand is `u^{α−1} f(x−u)`. The interval is cut
//! into panels graded geometrically toward both ends. The panel touching
//! `u = 0` uses Gauss–Jacobi nodes for the weight `u^{Re α − 1}` (the factor
//! `u^{i Im α}` stays in the integrand); all others use Gauss–Legendre. Each
//! panel doubles its node count until two successive estimates agree.
//!
//! For `Re α ≤ 0` the integral is continued by integrating by parts `m`
//! times: `S^α f = S^{α+m} f^{(m)} + Σ_{j<m} f^{(j)}(c)(x−c)^{α+j}/Γ(1+α+j)`.

mod nodes;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expr::{Expr, Kernel};
use crate::rules::differintegrate;
use crate::special::{cpow, reciprocal_gamma};
use crate::ComplexScalar;

const MAX_NODES: usize = 4096;
const GRADING_LEVELS: i32 = 40;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LowerBound {
    Finite(f64),
    MinusInfinity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSpec {
    /// Starting nodes per panel.
    pub node_count: usize,
    pub tolerance: f64,
    pub lower_bound: LowerBound,
    /// For an infinite lower bound, integrate over `[x − W, x]`.
    pub truncation_window: f64,
    /// Integration-by-parts count for the continued form; chosen as the
    /// smallest `m` with `Re α + m > 0` when `None`.
    pub lift_order: Option<usize>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            node_count: 64,
            tolerance: 1e-8,
            lower_bound: LowerBound::Finite(0.0),
            truncation_window: 60.0,
            lift_order: None,
        }
    }
}

impl QuadratureSpec {
    pub fn with_lower_bound(lower_bound: LowerBound) -> Self {
        Self {
            lower_bound,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.node_count < 2 {
            return Err(Error::InvalidArgument("node_count must be at least 2".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidArgument("tolerance must be positive".into()));
        }
        if !(self.truncation_window > 0.0) {
            return Err(Error::InvalidArgument("truncation window must be positive".into()));
        }
        Ok(())
    }
}

/// A quadrature value with its error estimate and any contract warnings.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub value: ComplexScalar,
    pub est_error: f64,
    pub warnings: Vec<String>,
}

/// Something the quadrature can sample.
pub trait Integrand {
    fn value(&self, t: f64) -> Result<ComplexScalar>;

    /// Exact `m`-th derivative, when one is known.
    fn derivative(&self, _m: usize) -> Option<Box<dyn Integrand + '_>> {
        None
    }

    /// Reject integrals that cannot converge on `[lower, x]`.
    fn check_window(&self, _lower: LowerBound, _x: f64) -> Result<()> {
        Ok(())
    }
}

impl<F: Fn(f64) -> ComplexScalar> Integrand for F {
    fn value(&self, t: f64) -> Result<ComplexScalar> {
        Ok(self(t))
    }
}

impl Integrand for Expr {
    fn value(&self, t: f64) -> Result<ComplexScalar> {
        self.evaluate(Complex64::new(t, 0.0))
    }

    fn derivative(&self, m: usize) -> Option<Box<dyn Integrand + '_>> {
        differintegrate(self, Complex64::new(-(m as f64), 0.0))
            .ok()
            .map(|r| Box::new(r.expr) as Box<dyn Integrand>)
    }

    fn check_window(&self, lower: LowerBound, x: f64) -> Result<()> {
        let inside = |s: f64| match lower {
            LowerBound::Finite(c) => s > c && s <= x,
            LowerBound::MinusInfinity => s <= x,
        };
        for term in &self.terms {
            let s = term.shift.re;
            let point_supported = match &term.kernel {
                Kernel::DeltaDeriv { .. } | Kernel::ZeroFn { .. } => true,
                Kernel::HeavisideMonomial { power } => power.re <= -1.0,
                _ => false,
            };
            if point_supported && inside(s) {
                return Err(Error::Unsupported(format!(
                    "{} at {s} lies under the integral; the rules module resolves it symbolically",
                    term.kernel.name()
                )));
            }
            if lower == LowerBound::MinusInfinity && !decays_left(&term.kernel) {
                return Err(Error::Divergent(format!(
                    "{} does not decay as t → −∞, so the integral diverges; use the rules module's analytic continuation",
                    term.kernel.name()
                )));
            }
        }
        Ok(())
    }
}

fn decays_left(kernel: &Kernel) -> bool {
    match kernel {
        Kernel::Exponential { rate } | Kernel::MonomialExp { rate, .. } | Kernel::KummerPair { rate, .. } => {
            rate.re > 0.0
        }
        Kernel::BoseKernel | Kernel::PolylogExp { .. } => true,
        Kernel::Heaviside
        | Kernel::HeavisideMonomial { .. }
        | Kernel::DeltaDeriv { .. }
        | Kernel::ZeroFn { .. }
        | Kernel::Gated(_) => true,
        Kernel::Constant
        | Kernel::Monomial { .. }
        | Kernel::Sin { .. }
        | Kernel::Cos { .. }
        | Kernel::Log { .. }
        | Kernel::LogMonomial { .. } => false,
    }
}

fn sample(f: &dyn Integrand, t: f64) -> Result<ComplexScalar> {
    let v = f.value(t)?;
    if v.re.is_nan() || v.im.is_nan() {
        return Err(Error::NanIntegrand { at: t });
    }
    Ok(v)
}

/// Panel breakpoints on `[0, len]`, graded toward both ends.
fn breakpoints(len: f64) -> Vec<f64> {
    let mut pts = vec![0.0];
    for k in (1..=GRADING_LEVELS).rev() {
        pts.push(len * 2f64.powi(-k));
    }
    for k in 2..=GRADING_LEVELS {
        pts.push(len - len * 2f64.powi(-k));
    }
    pts.push(len);
    pts.dedup();
    pts
}

/// `∫_0^len u^exponent g(u, len − u) du` for `Re exponent > −1`. The second
/// argument is computed without cancellation near `u = len`.
pub(crate) fn weighted_integral(
    g: &dyn Fn(f64, f64) -> Result<ComplexScalar>,
    exponent: ComplexScalar,
    len: f64,
    spec: &QuadratureSpec,
) -> Result<(ComplexScalar, f64)> {
    let beta = exponent.re;
    if beta <= -1.0 {
        return Err(Error::InvalidArgument(format!(
            "weight exponent {exponent} is not integrable at 0"
        )));
    }
    if len == 0.0 {
        return Ok((Complex64::new(0.0, 0.0), 0.0));
    }
    let pts = breakpoints(len);
    let panels = pts.len() - 1;
    let floor = spec.tolerance / panels as f64;
    let osc = Complex64::new(0.0, exponent.im);

    let first = |n: usize| -> Result<(ComplexScalar, f64)> {
        let h = pts[1];
        if exponent.im != 0.0 {
            // u^{i Im} winds without bound on [0, h]; with g linear on this
            // short panel the moments are exact.
            let (u1, u2) = (0.25 * h, 0.75 * h);
            let (g1, g2) = (g(u1, len - u1)?, g(u2, len - u2)?);
            let slope = (g2 - g1) / (u2 - u1);
            let offset = g1 - slope * u1;
            let hc = Complex64::new(h, 0.0);
            let m0 = cpow(hc, exponent + 1.0) / (exponent + 1.0);
            let m1 = cpow(hc, exponent + 2.0) / (exponent + 2.0);
            let v = offset * m0 + slope * m1;
            return Ok((v, v.norm()));
        }
        let rule = nodes::gauss_jacobi(n, 0.0, beta);
        let scale = (0.5 * h).powf(beta + 1.0);
        let mut sum = Complex64::new(0.0, 0.0);
        let mut mag = 0.0;
        for (t, w) in rule.nodes.iter().zip(&rule.weights) {
            let u = 0.5 * h * (1.0 + t);
            let v = w * g(u, len - u)? * cpow(Complex64::new(u, 0.0), osc);
            sum += v;
            mag += v.norm();
        }
        Ok((sum * scale, mag * scale))
    };
    let plain = |n: usize, a: f64, b: f64| -> Result<(ComplexScalar, f64)> {
        let rule = nodes::gauss_legendre(n);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut sum = Complex64::new(0.0, 0.0);
        let mut mag = 0.0;
        for (t, w) in rule.nodes.iter().zip(&rule.weights) {
            let u = mid + half * t;
            let rest = (len - b) + half * (1.0 - t);
            let v = w * g(u, rest)? * cpow(Complex64::new(u, 0.0), exponent);
            sum += v;
            mag += v.norm();
        }
        Ok((sum * half, mag * half))
    };

    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for p in 0..panels {
        let eval = |n: usize| if p == 0 { first(n) } else { plain(n, pts[p], pts[p + 1]) };
        let mut n = spec.node_count;
        let (mut coarse, _) = eval(n)?;
        loop {
            let (fine, mag) = eval(2 * n)?;
            let diff = (fine - coarse).norm();
            if diff <= floor.max(1e-14 * mag) {
                total += fine;
                err += diff;
                break;
            }
            n *= 2;
            if 2 * n > MAX_NODES {
                return Err(Error::NonConvergence {
                    what: "panel quadrature",
                    last: fine,
                    previous: coarse,
                });
            }
            coarse = fine;
        }
    }
    Ok((total, err))
}

/// Integration length and window warnings for `x`.
fn window(spec: &QuadratureSpec, f: &dyn Integrand, x: f64, warnings: &mut Vec<String>) -> Result<f64> {
    match spec.lower_bound {
        LowerBound::Finite(c) => {
            if x < c {
                return Err(Error::InvalidArgument(format!("x = {x} lies below the lower bound {c}")));
            }
            Ok(x - c)
        }
        LowerBound::MinusInfinity => {
            let edge = x - spec.truncation_window;
            if let Ok(v) = f.value(edge) {
                if v.norm() > spec.tolerance {
                    warnings.push(format!(
                        "integrand is {:.3e} at the window edge t = {edge}; widen the window",
                        v.norm()
                    ));
                }
            }
            Ok(spec.truncation_window)
        }
    }
}

/// `∫ f(τ)(x−τ)^{α−1} dτ` over the window, for `Re α > 0`; this is
/// `Γ(α)·S^α f(x)`.
pub fn convolution_integral(
    f: &dyn Integrand,
    alpha: ComplexScalar,
    x: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    spec.validate()?;
    if alpha.re <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "order {alpha} needs Re α > 0; use differint_numeric_continued"
        )));
    }
    f.check_window(spec.lower_bound, x)?;
    let mut warnings = Vec::new();
    let len = window(spec, f, x, &mut warnings)?;
    let g = |u: f64, rest: f64| match spec.lower_bound {
        LowerBound::Finite(c) => sample(f, c + rest),
        LowerBound::MinusInfinity => sample(f, x - u),
    };
    let (value, est_error) = weighted_integral(&g, alpha - 1.0, len, spec)?;
    Ok(Estimate {
        value,
        est_error,
        warnings,
    })
}

/// `S^α f(x)` for `Re α > 0`.
pub fn differint_numeric(
    f: &dyn Integrand,
    alpha: ComplexScalar,
    x: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    let raw = convolution_integral(f, alpha, x, spec)?;
    let scale = reciprocal_gamma(alpha);
    Ok(Estimate {
        value: raw.value * scale,
        est_error: raw.est_error * scale.norm(),
        warnings: raw.warnings,
    })
}

fn lift_order(alpha: ComplexScalar, spec: &QuadratureSpec) -> Result<usize> {
    let auto = if alpha.re > 0.0 { 0 } else { (-alpha.re).floor() as usize + 1 };
    let m = spec.lift_order.unwrap_or(auto);
    if alpha.re + m as f64 <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "lift order {m} leaves Re(α + m) = {} ≤ 0",
            alpha.re + m as f64
        )));
    }
    Ok(m)
}

/// Finite-difference weights for the `m`-th derivative at `x0` from samples
/// at `xs` (Fornberg's recursion).
pub(crate) fn fd_weights(x0: f64, xs: &[f64], m: usize) -> Vec<f64> {
    let n = xs.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

/// Stencil offsets (in units of `h`) for an `m`-th derivative of fourth-order
/// accuracy: central where `floor` allows, one-sided otherwise.
fn stencil(t: f64, h: f64, m: usize, floor: Option<f64>) -> Vec<f64> {
    let half = (m + 4) / 2;
    let central = floor.map_or(true, |c| t - half as f64 * h >= c);
    if central {
        (-(half as i64)..=half as i64).map(|j| j as f64).collect()
    } else {
        (0..(m + 4) as i64).map(|j| j as f64).collect()
    }
}

fn fd_derivative(f: &dyn Integrand, m: usize, t: f64, h: f64, floor: Option<f64>) -> Result<ComplexScalar> {
    if m == 0 {
        return sample(f, t);
    }
    let offsets = stencil(t, h, m, floor);
    let xs: Vec<f64> = offsets.iter().map(|o| t + o * h).collect();
    let w = fd_weights(t, &xs, m);
    let mut acc = Complex64::new(0.0, 0.0);
    for (xi, wi) in xs.iter().zip(&w) {
        acc += *wi * sample(f, *xi)?;
    }
    Ok(acc)
}

/// `S^α f(x)` for any complex `α`, by the integer-lift continuation.
///
/// At a finite lower bound `c` the integration-by-parts terms
/// `f^{(j)}(c)(x−c)^{α+j}/Γ(1+α+j)` are added, so the result is the
/// Riemann–Liouville value; a warning is recorded when they are nonzero. If
/// `f` is singular at `c` the result is computed as `D^m S^{α+m} f` instead.
pub fn differint_numeric_continued(
    f: &dyn Integrand,
    alpha: ComplexScalar,
    x: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    spec.validate()?;
    let m = lift_order(alpha, spec)?;
    if m == 0 {
        return differint_numeric(f, alpha, x, spec);
    }
    let h = spec.tolerance.powf(1.0 / (m as f64 + 4.0));
    let floor = match spec.lower_bound {
        LowerBound::Finite(c) => Some(c),
        LowerBound::MinusInfinity => None,
    };

    let mut warnings = Vec::new();
    let mut boundary = Complex64::new(0.0, 0.0);
    if let LowerBound::Finite(c) = spec.lower_bound {
        for j in 0..m {
            let value = match f.derivative(j) {
                Some(d) if j > 0 => d.value(c),
                _ if j == 0 => f.value(c),
                _ => fd_derivative(f, j, c, h, Some(c)),
            };
            let value = match value {
                Ok(v) if v.re.is_finite() && v.im.is_finite() => v,
                _ => {
                    let mut est = differint_numeric_rl(f, alpha, x, spec)?;
                    est.warnings.push(format!(
                        "f^({j}) is singular at the lower bound {c}; differentiated S^(α+{m}) f instead"
                    ));
                    return Ok(est);
                }
            };
            if value.norm() > spec.tolerance {
                warnings.push(format!(
                    "f^({j})({c}) = {value} is nonzero; included its integration-by-parts term"
                ));
            }
            let order = alpha + j as f64;
            boundary += value * cpow(Complex64::new(x - c, 0.0), order) * reciprocal_gamma(1.0 + order);
        }
    }

    let lifted = alpha + m as f64;
    let mut est = match f.derivative(m) {
        Some(d) => differint_numeric(d.as_ref(), lifted, x, spec)?,
        None => {
            let g = |t: f64| fd_derivative(f, m, t, h, floor).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
            differint_numeric(&g, lifted, x, spec)?
        }
    };
    est.value += boundary;
    warnings.append(&mut est.warnings);
    est.warnings = warnings;
    Ok(est)
}

/// `D^m S^{α+m} f(x)`: the Riemann–Liouville route, differentiating the
/// result by finite differences.
pub fn differint_numeric_rl(
    f: &dyn Integrand,
    alpha: ComplexScalar,
    x: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    let m = lift_order(alpha, spec)?;
    let lifted = alpha + m as f64;
    if m == 0 {
        return differint_numeric(f, alpha, x, spec);
    }
    let inner = QuadratureSpec {
        tolerance: spec.tolerance * 1e-3,
        ..spec.clone()
    };
    let floor = match spec.lower_bound {
        LowerBound::Finite(c) => Some(c),
        LowerBound::MinusInfinity => None,
    };
    let mut h = spec.tolerance.powf(1.0 / (m as f64 + 4.0));
    if let Some(c) = floor {
        // S^{α+m} f is only as smooth as (x − c)^{α+m} near c.
        h = h.min((x - c) / 40.0);
    }
    let offsets = stencil(x, h, m, floor);
    let xs: Vec<f64> = offsets.iter().map(|o| x + o * h).collect();
    let w = fd_weights(x, &xs, m);
    let mut value = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut warnings = Vec::new();
    for (xi, wi) in xs.iter().zip(&w) {
        let e = differint_numeric(f, lifted, *xi, &inner)?;
        value += *wi * e.value;
        err += wi.abs() * e.est_error.max(inner.tolerance);
        for msg in e.warnings {
            if !warnings.contains(&msg) {
                warnings.push(msg);
            }
        }
    }
    Ok(Estimate {
        value,
        est_error: err,
        warnings,
    })
}

/// `∫_φ^z (z−ζ)^{α−1}(ζ−φ)^{β−1} dζ` by quadrature, with Gauss–Jacobi panels
/// at both singular ends.
pub fn dirichlet_kernel_check(
    alpha: ComplexScalar,
    beta: ComplexScalar,
    z: f64,
    phi: f64,
) -> Result<ComplexScalar> {
    if alpha.re <= 0.0 || beta.re <= 0.0 || z <= phi {
        return Err(Error::InvalidArgument("need Re α, Re β > 0 and z > φ".into()));
    }
    let spec = QuadratureSpec::default();
    let len = z - phi;
    let half = 0.5 * len;
    let left = |u: f64, _: f64| Ok(cpow(Complex64::new(len - u, 0.0), beta - 1.0));
    let right = |v: f64, _: f64| Ok(cpow(Complex64::new(len - v, 0.0), alpha - 1.0));
    let (a, _) = weighted_integral(&left, alpha - 1.0, half, &spec)?;
    let (b, _) = weighted_integral(&right, beta - 1.0, half, &spec)?;
    Ok(a + b)
}
