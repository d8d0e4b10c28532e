//! Normalized term-sum expressions over the admissible kernel classes.
//!
//! An [`Expr`] is a finite sum of [`Term`]s, each `coeff · kernel(z − shift)`.
//! Bare constants do not survive [`Expr::normalize`]: a constant `C` becomes
//! `C·z^0`, a function equal to `C` almost everywhere and undefined at the
//! origin.
//!
//! Normal form also picks one representative for each pair of kernels that
//! describe the same function:
//!
//! | input                         | normal form                            |
//! |-------------------------------|----------------------------------------|
//! | `zero(k)`, `k ∉ {0,1,2,…}`    | `rgamma(−k) · z^{−1−k}`                |
//! | `z^n`, `n ∈ {−1,−2,…}`        | kept (only reachable by hand)          |
//! | `H(z)`                        | `HeavisideMonomial{0}`                 |
//! | `delta(k)`, `k ∉ {0,1,2,…}`   | `HeavisideMonomial{−1−k}`              |
//! | `HeavisideMonomial{−1−k}`     | `delta(k)`                             |
//! | `exp(0·z)`                    | `z^0`                                  |
//! | `LogMonomial{0, λ}`           | `ln(λz)`                               |
//! | `li(0)`                       | `bose(z)`                              |
//! | `z^0·exp(λz)`                 | `exp(λz)`                              |
//! | `KummerPair{n, λ, 0}`         | `z^n exp(λz)`                          |

mod display;
mod parse;

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

pub use parse::{parse, parse_rhs, LinearRhs};

use crate::error::{Error, Result};
use crate::special::{
    self, as_integer, clog, cpow, gamma, kummer_1f1_regularized, polylog, reciprocal_gamma,
    riemann_zeta, EULER_GAMMA, INTEGER_SNAP,
};
use crate::ComplexScalar;

/// Relative tolerance used when merging like terms.
const MERGE_TOL: f64 = 1e-12;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// One kernel class. Parameters are complex unless the class is only
/// defined for real values.
#[derive(Debug, Clone, PartialEq)]
pub enum Kernel {
    /// A bare constant; only present in raw, un-normalized input.
    Constant,
    /// `z^n`, `n` not a negative integer.
    Monomial { n: ComplexScalar },
    /// `∅^{(order)}(z) = z^{−1−order}/Γ(−order)`.
    ZeroFn { order: ComplexScalar },
    /// `H(z)`, right-continuous.
    Heaviside,
    /// `δ^{(order)}(z)`.
    DeltaDeriv { order: ComplexScalar },
    /// `H(z)·z^power/Γ(1+power)`.
    HeavisideMonomial { power: ComplexScalar },
    /// `e^{λz}`.
    Exponential { rate: ComplexScalar },
    /// `sin(λz + phase)`, real `λ`.
    Sin { rate: f64, phase: ComplexScalar },
    /// `cos(λz + phase)`, real `λ`.
    Cos { rate: f64, phase: ComplexScalar },
    /// `ln(λz)`.
    Log { rate: ComplexScalar },
    /// `z^α (ln z + ln λ − γ − ψ(1+α))/Γ(1+α)`.
    LogMonomial {
        order: ComplexScalar,
        rate: ComplexScalar,
    },
    /// `1/(e^{−z} − 1)`.
    BoseKernel,
    /// `Li_s(e^z)`.
    PolylogExp { s: ComplexScalar },
    /// `z^n e^{λz}`.
    MonomialExp { n: ComplexScalar, rate: ComplexScalar },
    /// `S^order [z^n e^{λz}]`, a combination of two ₁F₁ functions.
    KummerPair {
        n: ComplexScalar,
        rate: ComplexScalar,
        order: ComplexScalar,
    },
    /// `H(z)·inner(z)`.
    Gated(Box<Kernel>),
}

impl Kernel {
    fn tag(&self) -> u8 {
        match self {
            Kernel::Constant => 0,
            Kernel::Monomial { .. } => 1,
            Kernel::ZeroFn { .. } => 2,
            Kernel::Heaviside => 3,
            Kernel::DeltaDeriv { .. } => 4,
            Kernel::HeavisideMonomial { .. } => 5,
            Kernel::Exponential { .. } => 6,
            Kernel::Sin { .. } => 7,
            Kernel::Cos { .. } => 8,
            Kernel::Log { .. } => 9,
            Kernel::LogMonomial { .. } => 10,
            Kernel::BoseKernel => 11,
            Kernel::PolylogExp { .. } => 12,
            Kernel::MonomialExp { .. } => 13,
            Kernel::KummerPair { .. } => 14,
            Kernel::Gated(_) => 15,
        }
    }

    /// Kernel parameters in canonical order, as (re, im) pairs.
    fn params(&self) -> Vec<Complex64> {
        match self {
            Kernel::Constant | Kernel::Heaviside | Kernel::BoseKernel => vec![],
            Kernel::Monomial { n } => vec![*n],
            Kernel::ZeroFn { order } | Kernel::DeltaDeriv { order } => vec![*order],
            Kernel::HeavisideMonomial { power } => vec![*power],
            Kernel::Exponential { rate } | Kernel::Log { rate } => vec![*rate],
            Kernel::Sin { rate, phase } | Kernel::Cos { rate, phase } => vec![real(*rate), *phase],
            Kernel::LogMonomial { order, rate } => vec![*order, *rate],
            Kernel::PolylogExp { s } => vec![*s],
            Kernel::MonomialExp { n, rate } => vec![*n, *rate],
            Kernel::KummerPair { n, rate, order } => vec![*n, *rate, *order],
            Kernel::Gated(inner) => {
                let mut p = vec![real(inner.tag() as f64)];
                p.extend(inner.params());
                p
            }
        }
    }

    fn is_periodic(&self) -> bool {
        matches!(self, Kernel::Sin { .. } | Kernel::Cos { .. })
    }

    /// Short name used in diagnostics.
    pub fn name(&self) -> &'static str {
        match self {
            Kernel::Constant => "constant",
            Kernel::Monomial { .. } => "monomial",
            Kernel::ZeroFn { .. } => "zero function",
            Kernel::Heaviside => "Heaviside",
            Kernel::DeltaDeriv { .. } => "delta derivative",
            Kernel::HeavisideMonomial { .. } => "Heaviside monomial",
            Kernel::Exponential { .. } => "exponential",
            Kernel::Sin { .. } => "sin",
            Kernel::Cos { .. } => "cos",
            Kernel::Log { .. } => "logarithm",
            Kernel::LogMonomial { .. } => "log-monomial",
            Kernel::BoseKernel => "Bose kernel",
            Kernel::PolylogExp { .. } => "polylogarithm",
            Kernel::MonomialExp { .. } => "monomial-exponential",
            Kernel::KummerPair { .. } => "Kummer pair",
            Kernel::Gated(_) => "gated kernel",
        }
    }

    fn singular(&self, at: ComplexScalar) -> Error {
        Error::Singular {
            kernel: self.name().to_string(),
            at,
        }
    }

    /// Value of the kernel at `w` (already translated).
    pub fn eval(&self, w: ComplexScalar) -> Result<ComplexScalar> {
        let at_origin = w == zero();
        match self {
            Kernel::Constant => Ok(real(1.0)),
            Kernel::Monomial { n } => power_at(w, *n).ok_or_else(|| self.singular(w)),
            Kernel::ZeroFn { order } => {
                let scale = reciprocal_gamma(-*order);
                if at_origin {
                    let exponent = -1.0 - *order;
                    if exponent.re > 0.0 {
                        return Ok(zero());
                    }
                    return Err(self.singular(w));
                }
                if scale == zero() {
                    return Ok(zero());
                }
                Ok(scale * cpow(w, -1.0 - *order))
            }
            Kernel::Heaviside => Ok(real(heaviside(w))),
            Kernel::HeavisideMonomial { power } => {
                if w.re < 0.0 {
                    return Ok(zero());
                }
                let scale = reciprocal_gamma(1.0 + *power);
                if at_origin {
                    if power.re > 0.0 || scale == zero() {
                        return Ok(zero());
                    }
                    if *power == zero() {
                        return Ok(real(1.0));
                    }
                    return Err(self.singular(w));
                }
                Ok(scale * cpow(w, *power))
            }
            Kernel::DeltaDeriv { order } => {
                if as_integer(*order).map_or(false, |k| k >= 0) {
                    if at_origin {
                        Err(self.singular(w))
                    } else {
                        Ok(zero())
                    }
                } else {
                    Kernel::HeavisideMonomial {
                        power: -1.0 - *order,
                    }
                    .eval(w)
                }
            }
            Kernel::Exponential { rate } => Ok((*rate * w).exp()),
            Kernel::Sin { rate, phase } => Ok((*rate * w + *phase).sin()),
            Kernel::Cos { rate, phase } => Ok((*rate * w + *phase).cos()),
            Kernel::Log { rate } => {
                if at_origin {
                    return Err(self.singular(w));
                }
                Ok(clog(*rate * w))
            }
            Kernel::LogMonomial { order, rate } => {
                if at_origin {
                    if order.re > 0.0 {
                        return Ok(zero());
                    }
                    return Err(self.singular(w));
                }
                let l = clog(w) + clog(*rate) - EULER_GAMMA;
                Ok(cpow(w, *order) * special::rgamma_times_log_minus_digamma(1.0 + *order, l))
            }
            Kernel::BoseKernel => {
                if at_origin {
                    return Err(self.singular(w));
                }
                Ok(1.0 / ((-w).exp() - 1.0))
            }
            Kernel::PolylogExp { s } => {
                if at_origin {
                    if s.re > 1.0 {
                        return riemann_zeta(*s);
                    }
                    return Err(self.singular(w));
                }
                if w.re > 0.0 {
                    return Err(Error::Domain {
                        function: "polylog",
                        detail: format!("Li_s(e^z) needs Re(z) <= 0, got z = {w}"),
                    });
                }
                polylog(*s, w.exp())
            }
            Kernel::MonomialExp { n, rate } => {
                let p = power_at(w, *n).ok_or_else(|| self.singular(w))?;
                Ok(p * (*rate * w).exp())
            }
            Kernel::KummerPair { n, rate, order } => kummer_pair(*n, *rate, *order, w, zero()),
            Kernel::Gated(inner) => {
                if w.re < 0.0 {
                    Ok(zero())
                } else {
                    inner.eval(w)
                }
            }
        }
    }

    /// `kernel(w)·e^{μw}`, folding the exponent into the kernel's own
    /// exponential factor where it has one.
    pub(crate) fn eval_times_exp(&self, w: ComplexScalar, mu: ComplexScalar) -> Result<ComplexScalar> {
        match self {
            Kernel::Exponential { rate } => Ok(((*rate + mu) * w).exp()),
            Kernel::MonomialExp { n, rate } => Kernel::MonomialExp {
                n: *n,
                rate: *rate + mu,
            }
            .eval(w),
            Kernel::KummerPair { n, rate, order } => kummer_pair(*n, *rate, *order, w, mu),
            Kernel::Gated(inner) => {
                if w.re < 0.0 {
                    Ok(zero())
                } else {
                    inner.eval_times_exp(w, mu)
                }
            }
            other => Ok(other.eval(w)? * (mu * w).exp()),
        }
    }
}

fn heaviside(w: ComplexScalar) -> f64 {
    if w.re >= 0.0 {
        1.0
    } else {
        0.0
    }
}

/// `w^n`, or `None` at the singular point.
fn power_at(w: ComplexScalar, n: ComplexScalar) -> Option<ComplexScalar> {
    if w == zero() {
        if n.re > 0.0 {
            return Some(zero());
        }
        return None;
    }
    Some(cpow(w, n))
}

/// `S^α[z^n e^{λz}]` evaluated at `w`, times `e^{μw}`.
///
/// For non-negative integer `n` only the second ₁F₁ survives and it
/// terminates: `e^{λw} λ^{−α} Σ_j C(n,j)(−1)^j (α)_j w^{n−j} λ^{−j}`.
/// Otherwise
/// `A·w^{n+α}·₁F₁(1+n; 1+n+α; λw) + B·λ^{−n−α}·₁F₁(1−α; 1−n−α; λw)` with
/// `A = Γ(1+n)/Γ(1+n+α)·(1 − e^{iπn} sin πα / sin π(n+α))`,
/// `B = e^{iπn} Γ(n+α)/Γ(α)`, valid for `w > 0`.
pub(crate) fn kummer_pair(
    n: ComplexScalar,
    rate: ComplexScalar,
    order: ComplexScalar,
    w: ComplexScalar,
    mu: ComplexScalar,
) -> Result<ComplexScalar> {
    if rate == zero() {
        return Err(Error::Domain {
            function: "kummer_pair",
            detail: "rate must be nonzero".into(),
        });
    }
    if let Some(k) = as_integer(n).filter(|k| *k >= 0) {
        let mut sum = zero();
        let mut binom = 1.0;
        let mut poch = real(1.0);
        let mut rate_pow = real(1.0);
        for j in 0..=k {
            if j > 0 {
                binom *= (k - j + 1) as f64 / j as f64;
                poch *= order + (j - 1) as f64;
                rate_pow /= rate;
            }
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let wp = power_at(w, real((k - j) as f64)).unwrap_or(real(1.0));
            sum += sign * binom * poch * wp * rate_pow;
        }
        return Ok(((rate + mu) * w).exp() * cpow(rate, -order) * sum);
    }
    if as_integer(n + order).is_some() {
        return Err(Error::Domain {
            function: "kummer_pair",
            detail: format!("n + order = {} is an integer; the two-term form degenerates", n + order),
        });
    }
    let phase = (Complex64::i() * PI * n).exp();
    let a_coeff = gamma(1.0 + n)?
        * (1.0 - phase * (PI * order).sin() / (PI * (n + order)).sin());
    let lw = rate * w;
    let first = if a_coeff.norm() == 0.0 {
        zero()
    } else {
        let p = power_at(w, n + order).ok_or_else(|| Error::Singular {
            kernel: "Kummer pair".into(),
            at: w,
        })?;
        a_coeff * p * kummer_1f1_regularized(1.0 + n, 1.0 + n + order, lw)?
    };
    let b_coeff = phase * gamma(n + order)? * reciprocal_gamma(order);
    let second = if b_coeff.norm() == 0.0 {
        zero()
    } else {
        b_coeff * cpow(rate, -n - order) * special::kummer_1f1(1.0 - order, 1.0 - n - order, lw)?
    };
    Ok((first + second) * (mu * w).exp())
}

/// Value of the Kummer pair at `w = 0` with the `w^{n+α}` branch dropped:
/// `e^{iπn} Γ(n+α)/Γ(α) λ^{−n−α}`. This is the ordinary value when
/// `Re(n+α) > 0` and its continuation in `n` otherwise.
pub(crate) fn kummer_pair_finite_part(
    n: ComplexScalar,
    rate: ComplexScalar,
    order: ComplexScalar,
) -> Result<ComplexScalar> {
    if as_integer(n).map_or(false, |k| k >= 0) || as_integer(n + order).is_some() {
        return kummer_pair(n, rate, order, zero(), zero());
    }
    let phase = (Complex64::i() * PI * n).exp();
    Ok(phase * gamma(n + order)? * reciprocal_gamma(order) * cpow(rate, -n - order))
}

/// `coeff · kernel(z − shift)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coeff: ComplexScalar,
    pub shift: ComplexScalar,
    pub kernel: Kernel,
}

impl Term {
    pub fn new(coeff: ComplexScalar, kernel: Kernel) -> Self {
        Self {
            coeff,
            shift: zero(),
            kernel,
        }
    }

    pub fn shifted(mut self, shift: ComplexScalar) -> Self {
        self.shift = shift;
        self
    }

    pub fn eval(&self, z: ComplexScalar) -> Result<ComplexScalar> {
        Ok(self.coeff * self.kernel.eval(z - self.shift)?)
    }

    fn sort_key(&self) -> Vec<f64> {
        let mut key = vec![self.kernel.tag() as f64];
        for p in self.kernel.params() {
            key.push(p.re);
            key.push(p.im);
        }
        key.push(self.shift.re);
        key.push(self.shift.im);
        key
    }
}

/// A sum of terms.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Expr {
    pub terms: Vec<Term>,
}

impl Expr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_terms(terms: Vec<Term>) -> Self {
        Self { terms }
    }

    pub fn term(coeff: ComplexScalar, kernel: Kernel) -> Self {
        Self {
            terms: vec![Term::new(coeff, kernel)],
        }
    }

    pub fn constant(c: ComplexScalar) -> Self {
        Self::term(c, Kernel::Constant)
    }

    /// `z^n`; negative integer exponents are rejected.
    pub fn monomial(n: ComplexScalar) -> Result<Self> {
        check_monomial(n)?;
        Ok(Self::term(real(1.0), Kernel::Monomial { n }))
    }

    pub fn exponential(rate: ComplexScalar) -> Self {
        Self::term(real(1.0), Kernel::Exponential { rate })
    }

    pub fn zero_fn(order: ComplexScalar) -> Self {
        Self::term(real(1.0), Kernel::ZeroFn { order })
    }

    pub fn heaviside() -> Self {
        Self::term(real(1.0), Kernel::Heaviside)
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Normal form: constants mapped to `C·z^0`, equivalent kernels collapsed
    /// to one representative, zero terms dropped, like terms merged and the
    /// list sorted by kernel tag and parameters.
    pub fn normalize(&self) -> Expr {
        let mut terms: Vec<Term> = self
            .terms
            .iter()
            .filter_map(|t| {
                let (scale, kernel) = canonical_kernel(&t.kernel);
                let coeff = snap_coeff(t.coeff * scale);
                if coeff == zero() || !coeff.re.is_finite() && !coeff.im.is_finite() {
                    return None;
                }
                Some(Term {
                    coeff,
                    shift: snap(t.shift),
                    kernel,
                })
            })
            .collect();
        terms.sort_by(|a, b| compare_keys(&a.sort_key(), &b.sort_key()));

        let mut merged: Vec<Term> = Vec::with_capacity(terms.len());
        for t in terms {
            if let Some(last) = merged.last_mut() {
                if kernels_match(&last.kernel, &t.kernel, MERGE_TOL) && close(last.shift, t.shift, MERGE_TOL) {
                    let sum = last.coeff + t.coeff;
                    let scale = last.coeff.norm().max(t.coeff.norm());
                    last.coeff = if sum.norm() <= 1e-14 * scale { zero() } else { sum };
                    continue;
                }
            }
            merged.push(t);
        }
        merged.retain(|t| t.coeff != zero());
        Expr { terms: merged }
    }

    /// Pointwise value at `z`.
    pub fn evaluate(&self, z: ComplexScalar) -> Result<ComplexScalar> {
        self.terms.iter().try_fold(zero(), |acc, t| Ok(acc + t.eval(z)?))
    }

    /// `f(z) ↦ f(z − z0)`.
    pub fn translate(&self, z0: ComplexScalar) -> Expr {
        Expr {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    shift: t.shift + z0,
                    ..t.clone()
                })
                .collect(),
        }
    }

    pub fn scale(&self, c: ComplexScalar) -> Expr {
        Expr {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coeff: t.coeff * c,
                    ..t.clone()
                })
                .collect(),
        }
    }

    /// Equality of normal forms, parameters and coefficients compared with
    /// relative tolerance `tol` (phases of sin/cos modulo 2π).
    pub fn structurally_eq(&self, other: &Expr, tol: f64) -> bool {
        let a = self.normalize();
        let b = other.normalize();
        if a.terms.len() != b.terms.len() {
            return false;
        }
        a.terms.iter().zip(&b.terms).all(|(x, y)| {
            kernels_match(&x.kernel, &y.kernel, tol) && close(x.shift, y.shift, tol) && close(x.coeff, y.coeff, tol)
        })
    }
}

pub(crate) fn check_monomial(n: ComplexScalar) -> Result<()> {
    if let Some(k) = as_integer(n) {
        if k < 0 {
            return Err(Error::NegativeIntegerMonomial {
                exponent: k,
                order: -1 - k,
            });
        }
    }
    Ok(())
}

fn close(a: ComplexScalar, b: ComplexScalar, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}

fn wrap_phase(p: ComplexScalar) -> ComplexScalar {
    let two_pi = 2.0 * PI;
    let mut re = p.re.rem_euclid(two_pi);
    if re > PI {
        re -= two_pi;
    }
    Complex64::new(re, p.im)
}

fn kernels_match(a: &Kernel, b: &Kernel, tol: f64) -> bool {
    if a.tag() != b.tag() {
        return false;
    }
    if let (Kernel::Gated(x), Kernel::Gated(y)) = (a, b) {
        return kernels_match(x, y, tol);
    }
    let pa = a.params();
    let pb = b.params();
    if a.is_periodic() {
        let dphase = wrap_phase(pa[1] - pb[1]);
        return close(pa[0], pb[0], tol) && dphase.norm() <= tol * (1.0 + pa[1].norm());
    }
    pa.iter().zip(&pb).all(|(x, y)| close(*x, *y, tol))
}

fn compare_keys(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Snap near-integers to integers and negligible imaginary parts to zero.
pub(crate) fn snap(z: ComplexScalar) -> ComplexScalar {
    let snap_part = |x: f64| {
        let r = x.round();
        if (x - r).abs() <= INTEGER_SNAP * (1.0 + r.abs()) {
            r
        } else {
            x
        }
    };
    let im = if z.im.abs() <= INTEGER_SNAP * (1.0 + z.re.abs()) { 0.0 } else { snap_part(z.im) };
    Complex64::new(snap_part(z.re), im)
}

fn snap_coeff(c: ComplexScalar) -> ComplexScalar {
    let im = if c.im.abs() <= 1e-15 * c.re.abs() { 0.0 } else { c.im };
    let re = if c.re.abs() <= 1e-15 * c.im.abs() { 0.0 } else { c.re };
    Complex64::new(re, im)
}

fn is_nonneg_integer(z: ComplexScalar) -> bool {
    matches!(as_integer(z), Some(k) if k >= 0)
}

/// Canonical representative and the scale factor it absorbs.
fn canonical_kernel(k: &Kernel) -> (ComplexScalar, Kernel) {
    let one = real(1.0);
    match k {
        Kernel::Constant => (one, Kernel::Monomial { n: zero() }),
        Kernel::Monomial { n } => (one, Kernel::Monomial { n: snap(*n) }),
        Kernel::ZeroFn { order } => {
            let order = snap(*order);
            if is_nonneg_integer(order) {
                (one, Kernel::ZeroFn { order })
            } else {
                (reciprocal_gamma(-order), Kernel::Monomial { n: snap(-1.0 - order) })
            }
        }
        Kernel::Heaviside => (one, Kernel::HeavisideMonomial { power: zero() }),
        Kernel::DeltaDeriv { order } => {
            let order = snap(*order);
            if is_nonneg_integer(order) {
                (one, Kernel::DeltaDeriv { order })
            } else {
                (one, Kernel::HeavisideMonomial { power: snap(-1.0 - order) })
            }
        }
        Kernel::HeavisideMonomial { power } => {
            let power = snap(*power);
            let order = snap(-1.0 - power);
            if is_nonneg_integer(order) {
                (one, Kernel::DeltaDeriv { order })
            } else {
                (one, Kernel::HeavisideMonomial { power })
            }
        }
        Kernel::Exponential { rate } => {
            let rate = snap(*rate);
            if rate == zero() {
                (one, Kernel::Monomial { n: zero() })
            } else {
                (one, Kernel::Exponential { rate })
            }
        }
        Kernel::Sin { rate, phase } => {
            let phase = wrap_phase(snap_phase(*phase));
            if *rate == 0.0 {
                (phase.sin(), Kernel::Monomial { n: zero() })
            } else {
                (one, Kernel::Sin { rate: *rate, phase })
            }
        }
        Kernel::Cos { rate, phase } => {
            let phase = wrap_phase(snap_phase(*phase));
            if *rate == 0.0 {
                (phase.cos(), Kernel::Monomial { n: zero() })
            } else {
                (one, Kernel::Cos { rate: *rate, phase })
            }
        }
        Kernel::Log { rate } => (one, Kernel::Log { rate: snap(*rate) }),
        Kernel::LogMonomial { order, rate } => {
            let order = snap(*order);
            if order == zero() {
                (one, Kernel::Log { rate: snap(*rate) })
            } else {
                (one, Kernel::LogMonomial { order, rate: snap(*rate) })
            }
        }
        Kernel::BoseKernel => (one, Kernel::BoseKernel),
        Kernel::PolylogExp { s } => {
            let s = snap(*s);
            if s == zero() {
                (one, Kernel::BoseKernel)
            } else {
                (one, Kernel::PolylogExp { s })
            }
        }
        Kernel::MonomialExp { n, rate } => {
            let (n, rate) = (snap(*n), snap(*rate));
            if rate == zero() {
                (one, Kernel::Monomial { n })
            } else if n == zero() {
                (one, Kernel::Exponential { rate })
            } else {
                (one, Kernel::MonomialExp { n, rate })
            }
        }
        Kernel::KummerPair { n, rate, order } => {
            let order = snap(*order);
            if order == zero() {
                canonical_kernel(&Kernel::MonomialExp { n: *n, rate: *rate })
            } else {
                (
                    one,
                    Kernel::KummerPair {
                        n: snap(*n),
                        rate: snap(*rate),
                        order,
                    },
                )
            }
        }
        Kernel::Gated(inner) => {
            let (scale, inner) = canonical_kernel(inner);
            match inner {
                Kernel::Monomial { n } if !as_integer(n).map_or(false, |k| k < 0) => {
                    // H·z^n = Γ(1+n)·HeavisideMonomial{n}
                    let g = gamma(1.0 + n).unwrap_or(real(f64::NAN));
                    let (s2, k2) = canonical_kernel(&Kernel::HeavisideMonomial { power: n });
                    (scale * g * s2, k2)
                }
                Kernel::HeavisideMonomial { .. } | Kernel::DeltaDeriv { .. } | Kernel::Gated(_) => (scale, inner),
                other => (scale, Kernel::Gated(Box::new(other))),
            }
        }
    }
}

fn snap_phase(p: ComplexScalar) -> ComplexScalar {
    let im = if p.im.abs() <= INTEGER_SNAP * (1.0 + p.re.abs()) { 0.0 } else { p.im };
    Complex64::new(p.re, im)
}

impl Add for Expr {
    type Output = Expr;
    fn add(mut self, rhs: Expr) -> Expr {
        self.terms.extend(rhs.terms);
        self
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        self + (-rhs)
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.scale(real(-1.0))
    }
}

impl Mul<ComplexScalar> for Expr {
    type Output = Expr;
    fn mul(self, rhs: ComplexScalar) -> Expr {
        self.scale(rhs)
    }
}

impl Mul<f64> for Expr {
    type Output = Expr;
    fn mul(self, rhs: f64) -> Expr {
        self.scale(real(rhs))
    }
}
