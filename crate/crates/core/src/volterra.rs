//! Fractional differintegral equations in Volterra form.
//!
//! An initial-value problem `S^{−α} y = f(x, y)` with data `y^{(α_k)}(0)` is
//! equivalent to
//!
//! `y(x) = Σ_k y^{(α_k)}(0) x^{α_k}/Γ(1+α_k) + S^α f(x, y(x))`,
//!
//! and a boundary problem replaces the first sum by `Σ_k c_k x^{α−k}` with
//! the constants fixed by the boundary data.
//!
//! [`solve_fde`] marches the initial-value form with product-rectangle
//! weights evaluated at the right end of each cell, so each step is a small
//! fixed-point problem `y = known + h^α/Γ(1+α) f(x, y)`. For `α = 1` this is
//! backward Euler.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expr::{Expr, LinearRhs};
use crate::rules::differintegrate;
use crate::special::{gamma, reciprocal_gamma};
use crate::ComplexScalar;

const STEP_TOLERANCE: f64 = 1e-10;
const MAX_STEP_ITERATIONS: usize = 500;
const MAX_OUTER_ITERATIONS: usize = 200;

/// Right-hand side `f(x, y)`.
pub type Rhs = Arc<dyn Fn(f64, ComplexScalar) -> Result<ComplexScalar> + Send + Sync>;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn real_gamma(x: f64) -> Result<f64> {
    Ok(gamma(c(x))?.re)
}

/// `S^{−α} y = f(x, y)` on `[0, x_max]`.
#[derive(Clone)]
pub struct FdeProblem {
    pub order: f64,
    pub rhs: Rhs,
    /// Caller-declared Lipschitz constant of `rhs` in `y`.
    pub lipschitz: f64,
    /// `(α_k, y^{(α_k)}(0))`.
    pub initial_data: Vec<(f64, ComplexScalar)>,
    pub x_max: f64,
    pub step: f64,
}

impl fmt::Debug for FdeProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FdeProblem")
            .field("order", &self.order)
            .field("lipschitz", &self.lipschitz)
            .field("initial_data", &self.initial_data)
            .field("x_max", &self.x_max)
            .field("step", &self.step)
            .finish_non_exhaustive()
    }
}

impl FdeProblem {
    pub fn new(order: f64, rhs: Rhs, lipschitz: f64) -> Self {
        FdeProblem {
            order,
            rhs,
            lipschitz,
            initial_data: Vec::new(),
            x_max: 1.0,
            step: 1e-3,
        }
    }

    /// `f(x, y) = a·y + g(x)`, with `L = |a|`.
    pub fn linear(order: f64, rhs: &LinearRhs) -> Self {
        let a = rhs.y_coeff;
        let g = rhs.forcing.clone();
        let f: Rhs = Arc::new(move |x, y| Ok(a * y + g.evaluate(c(x))?));
        FdeProblem::new(order, f, a.norm())
    }

    pub fn with_initial(mut self, order: f64, value: ComplexScalar) -> Self {
        self.initial_data.push((order, value));
        self
    }

    pub fn on(mut self, x_max: f64, step: f64) -> Self {
        self.x_max = x_max;
        self.step = step;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.order.is_finite() && self.order > 0.0) {
            return Err(Error::InvalidArgument(format!("order must be positive, got {}", self.order)));
        }
        if !(self.step > 0.0 && self.x_max > 0.0 && self.step.is_finite() && self.x_max.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "need h > 0 and X > 0, got h = {}, X = {}",
                self.step, self.x_max
            )));
        }
        if !(self.lipschitz >= 0.0) {
            return Err(Error::InvalidArgument("Lipschitz constant must be non-negative".into()));
        }
        for (i, (a, _)) in self.initial_data.iter().enumerate() {
            if !(*a >= 0.0) {
                return Err(Error::InvalidArgument(format!("initial-data order {a} is negative")));
            }
            if self.initial_data[..i].iter().any(|(b, _)| b == a) {
                return Err(Error::InvalidArgument(format!("initial-data order {a} repeated")));
            }
        }
        Ok(())
    }

    fn grid(&self) -> (usize, f64) {
        let n = ((self.x_max / self.step).round() as usize).max(1);
        (n, self.x_max / n as f64)
    }

    fn check_step(&self, h: f64) -> Result<f64> {
        let factor = self.lipschitz * h.powf(self.order) / real_gamma(1.0 + self.order)?;
        if factor >= 1.0 {
            return Err(Error::StepContraction { factor });
        }
        Ok(factor)
    }
}

/// The Volterra form with a `y`-independent right-hand side left open.
#[derive(Debug, Clone, PartialEq)]
pub struct VolterraForm {
    pub order: f64,
    /// `Σ y^{(α_k)}(0) x^{α_k}/Γ(1+α_k)`.
    pub initial: Expr,
}

impl VolterraForm {
    /// `initial + S^α f`.
    pub fn apply(&self, f: &Expr) -> Result<Expr> {
        let integral = differintegrate(f, c(self.order))?.expr;
        Ok((self.initial.clone() + integral).normalize())
    }
}

pub fn volterra_form(p: &FdeProblem) -> Result<VolterraForm> {
    p.validate()?;
    let mut initial = Expr::zero();
    for (a, value) in &p.initial_data {
        initial = initial + Expr::monomial(c(*a))? * (*value * reciprocal_gamma(c(1.0 + a)));
    }
    Ok(VolterraForm {
        order: p.order,
        initial: initial.normalize(),
    })
}

/// Truncated `Σ_j S^{jα} f`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSolution {
    pub terms: Vec<Expr>,
    pub truncation: usize,
    /// Largest `|terms[J−1]|` on the sample points.
    pub tail_estimate: f64,
}

impl SeriesSolution {
    pub fn evaluate(&self, z: ComplexScalar) -> Result<ComplexScalar> {
        self.terms.iter().map(|t| t.evaluate(z)).sum()
    }

    pub fn to_expr(&self) -> Expr {
        self.terms.iter().cloned().fold(Expr::zero(), |a, b| a + b).normalize()
    }
}

/// `terms[j] = S^{jα} f` for `j < count`, with the tail measured on
/// 32 points of `(0, x_max]`.
pub fn picard_series(f: &Expr, alpha: f64, count: usize, x_max: f64) -> Result<SeriesSolution> {
    if count == 0 {
        return Err(Error::InvalidArgument("series needs at least one term".into()));
    }
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument(format!("series order must be positive, got {alpha}")));
    }
    let base = f.normalize();
    let mut terms = Vec::with_capacity(count);
    for j in 0..count {
        let term = if j == 0 {
            base.clone()
        } else {
            differintegrate(&base, c(j as f64 * alpha))?.expr
        };
        terms.push(term);
    }
    let last = &terms[count - 1];
    let mut tail = 0.0f64;
    for k in 1..=32 {
        let z = c(x_max * k as f64 / 32.0);
        tail = tail.max(last.evaluate(z)?.norm());
    }
    Ok(SeriesSolution {
        terms,
        truncation: count,
        tail_estimate: tail,
    })
}

/// Samples `(x_i, y_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sampled {
    pub x: Vec<f64>,
    pub y: Vec<ComplexScalar>,
}

impl Sampled {
    /// Linear interpolation, clamped to the grid.
    pub fn value_at(&self, x: f64) -> ComplexScalar {
        let n = self.x.len();
        if x <= self.x[0] {
            return self.y[0];
        }
        if x >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let i = self.x.partition_point(|v| *v <= x).saturating_sub(1);
        let t = (x - self.x[i]) / (self.x[i + 1] - self.x[i]);
        self.y[i] * (1.0 - t) + self.y[i + 1] * t
    }
}

/// `(m+1)^α − m^α` for the cell `m` steps back.
fn cell_weights(n: usize, alpha: f64) -> Vec<f64> {
    (0..n).map(|m| (m as f64 + 1.0).powf(alpha) - (m as f64).powf(alpha)).collect()
}

/// Marches `y_i = g(x_i) + h^α/Γ(1+α) Σ_{j≤i} b_{i−j} f(x_j, y_j)`, `i ≥ 1`.
fn march(
    p: &FdeProblem,
    n: usize,
    h: f64,
    g: &dyn Fn(f64) -> Result<ComplexScalar>,
) -> Result<(Vec<f64>, Vec<ComplexScalar>, Vec<ComplexScalar>)> {
    let alpha = p.order;
    let scale = h.powf(alpha) / real_gamma(1.0 + alpha)?;
    let b = cell_weights(n, alpha);
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    let mut fs: Vec<ComplexScalar> = Vec::with_capacity(n);
    for i in 1..=n {
        let x = i as f64 * h;
        let mut history = Complex64::new(0.0, 0.0);
        for (j, fj) in fs.iter().enumerate() {
            history += b[i - 1 - j] * *fj;
        }
        let known = g(x)? + scale * history;
        let mut y = ys.last().copied().unwrap_or(known);
        let mut converged = false;
        let mut previous = y;
        for _ in 0..MAX_STEP_ITERATIONS {
            let next = known + scale * (p.rhs)(x, y)?;
            previous = y;
            let delta = (next - y).norm();
            y = next;
            if delta <= STEP_TOLERANCE * (1.0 + y.norm()) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NonConvergence {
                what: "implicit step",
                last: y,
                previous,
            });
        }
        fs.push((p.rhs)(x, y)?);
        xs.push(x);
        ys.push(y);
    }
    Ok((xs, ys, fs))
}

/// `Σ y^{(α_k)}(0) 0^{α_k}/Γ(1+α_k)`, with `0^0 = 1`.
fn initial_at_origin(p: &FdeProblem) -> ComplexScalar {
    p.initial_data
        .iter()
        .filter(|(a, _)| *a == 0.0)
        .map(|(_, v)| *v)
        .sum()
}

/// Product-rectangle marching of the initial-value Volterra form.
pub fn solve_fde(p: &FdeProblem) -> Result<Sampled> {
    p.validate()?;
    let (n, h) = p.grid();
    p.check_step(h)?;
    let form = volterra_form(p)?;
    let g = |x: f64| form.initial.evaluate(c(x));
    let (mut xs, mut ys, _) = march(p, n, h, &g)?;
    xs.insert(0, 0.0);
    ys.insert(0, initial_at_origin(p));
    Ok(Sampled { x: xs, y: ys })
}

/// `y^{(α_k)}(x_k) = value`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryCondition {
    pub order: f64,
    pub at: f64,
    pub value: ComplexScalar,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySolution {
    /// `c_1, …, c_n` of the basis `x^{α−k}`.
    pub constants: Vec<ComplexScalar>,
    /// Starts at the first grid point after 0 when the basis is singular there.
    pub solution: Sampled,
    pub outer_iterations: usize,
}

/// `S^{β}` of the marched samples at `x`, with `F` constant on each cell.
fn sampled_differint(fs: &[ComplexScalar], h: f64, beta: f64, x: f64) -> Result<ComplexScalar> {
    if beta == 0.0 {
        let k = (x / h).round() as usize;
        return Ok(fs[k.clamp(1, fs.len()) - 1]);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, fj) in fs.iter().enumerate() {
        let left = j as f64 * h;
        if left >= x {
            break;
        }
        let right = ((j + 1) as f64 * h).min(x);
        acc += ((x - left).powf(beta) - (x - right).powf(beta)) * *fj;
    }
    Ok(acc / real_gamma(1.0 + beta)?)
}

/// Solves `y = Σ c_k x^{α−k} + S^α f(x, y)` with the constants fixed by
/// `conditions`, iterating on the constants when `f` depends on `y`.
pub fn solve_boundary(p: &FdeProblem, conditions: &[BoundaryCondition]) -> Result<BoundarySolution> {
    p.validate()?;
    let (n, h) = p.grid();
    p.check_step(h)?;
    let count = conditions.len();
    if count == 0 {
        return Err(Error::InvalidArgument("no boundary conditions".into()));
    }
    let alpha = p.order;
    for bc in conditions {
        if !(bc.order >= 0.0 && bc.order <= alpha) {
            return Err(Error::InvalidArgument(format!(
                "boundary derivative order {} must lie in [0, {alpha}]",
                bc.order
            )));
        }
        if !(bc.at > 0.0 && bc.at <= p.x_max + 0.5 * h) {
            return Err(Error::InvalidArgument(format!("boundary point {} is outside (0, X]", bc.at)));
        }
    }

    // D^{α_k} x^{α−m} at x_k.
    let mut a = DMatrix::<Complex64>::zeros(count, count);
    for (k, bc) in conditions.iter().enumerate() {
        for m in 0..count {
            let power = alpha - (m as f64 + 1.0);
            let entry = if bc.order == 0.0 {
                c(bc.at.powf(power))
            } else {
                let image = differintegrate(&Expr::monomial(c(power))?, c(-bc.order))?.expr;
                image.evaluate(c(bc.at))?
            };
            a[(k, m)] = entry;
        }
    }
    let lu = a.lu();

    let mut constants = vec![Complex64::new(0.0, 0.0); count];
    let mut last_change = f64::INFINITY;
    let mut damped = false;
    for iteration in 1..=MAX_OUTER_ITERATIONS {
        let current = constants.clone();
        let g = |x: f64| -> Result<ComplexScalar> {
            Ok(current
                .iter()
                .enumerate()
                .map(|(m, ck)| ck * x.powf(alpha - (m as f64 + 1.0)))
                .sum())
        };
        let (xs, ys, fs) = march(p, n, h, &g)?;
        let mut rhs = DVector::<Complex64>::zeros(count);
        for (k, bc) in conditions.iter().enumerate() {
            rhs[k] = bc.value - sampled_differint(&fs, h, alpha - bc.order, bc.at)?;
        }
        let solved = lu
            .solve(&rhs)
            .ok_or_else(|| Error::SingularSystem("boundary collocation matrix is singular".into()))?;
        let change = solved
            .iter()
            .zip(&constants)
            .map(|(u, v)| (u - v).norm())
            .fold(0.0, f64::max);
        let size = solved.iter().map(|u| u.norm()).fold(0.0, f64::max);
        if change > last_change {
            damped = true;
        }
        for (ck, new) in constants.iter_mut().zip(solved.iter()) {
            *ck = if damped { *ck + 0.5 * (new - *ck) } else { *new };
        }
        if change <= STEP_TOLERANCE * (1.0 + size) {
            let mut solution = Sampled { x: xs, y: ys };
            if (1..=count).all(|m| alpha - m as f64 >= 0.0) {
                let at_origin = (1..=count)
                    .filter(|m| alpha == *m as f64)
                    .map(|m| solved[m - 1])
                    .sum();
                solution.x.insert(0, 0.0);
                solution.y.insert(0, at_origin);
            }
            return Ok(BoundarySolution {
                constants: solved.iter().copied().collect(),
                solution,
                outer_iterations: iteration,
            });
        }
        last_change = change;
    }
    Err(Error::NonConvergence {
        what: "boundary constants",
        last: constants[0],
        previous: constants[0],
    })
}

/// Result of summing `Σ_j T^j b`.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoint {
    pub values: Vec<ComplexScalar>,
    pub terms_used: usize,
    pub last_increment: f64,
    /// Largest measured `‖Tu − Tv‖/‖u − v‖`.
    pub contraction_ratio: f64,
}

fn sup(v: &[ComplexScalar]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Partial sums of `Σ_j T^j b` in the sup norm on the sample grid, after
/// probing `T` for contraction on two pairs.
pub fn contraction_fixed_point(
    t_apply: &dyn Fn(&[ComplexScalar]) -> Result<Vec<ComplexScalar>>,
    b: &[ComplexScalar],
    count: usize,
) -> Result<FixedPoint> {
    let n = b.len();
    if n == 0 || count == 0 {
        return Err(Error::InvalidArgument("empty grid or zero term count".into()));
    }
    let zeros = vec![Complex64::new(0.0, 0.0); n];
    let ones = vec![Complex64::new(1.0, 0.0); n];
    let ramp: Vec<_> = (0..n).map(|i| c(i as f64 / n as f64)).collect();
    let mut ratio = 0.0f64;
    for (u, v) in [(b, zeros.as_slice()), (ones.as_slice(), ramp.as_slice())] {
        let du: Vec<_> = u.iter().zip(v).map(|(p, q)| p - q).collect();
        let denom = sup(&du);
        if denom == 0.0 {
            continue;
        }
        let tu = t_apply(u)?;
        let tv = t_apply(v)?;
        let dt: Vec<_> = tu.iter().zip(&tv).map(|(p, q)| p - q).collect();
        ratio = ratio.max(sup(&dt) / denom);
    }
    if ratio >= 1.0 {
        return Err(Error::NotContraction { ratio });
    }

    let mut sum = b.to_vec();
    let mut term = b.to_vec();
    let mut increment = sup(&term);
    for j in 1..count {
        if increment < STEP_TOLERANCE {
            return Ok(FixedPoint {
                values: sum,
                terms_used: j,
                last_increment: increment,
                contraction_ratio: ratio,
            });
        }
        term = t_apply(&term)?;
        if term.len() != n {
            return Err(Error::InvalidArgument("operator changed the grid length".into()));
        }
        for (s, t) in sum.iter_mut().zip(&term) {
            *s += t;
        }
        increment = sup(&term);
    }
    if increment >= STEP_TOLERANCE {
        return Err(Error::SeriesExhausted {
            terms: count,
            tail: increment,
        });
    }
    Ok(FixedPoint {
        values: sum,
        terms_used: count,
        last_increment: increment,
        contraction_ratio: ratio,
    })
}
