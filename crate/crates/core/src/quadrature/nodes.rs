//! Gauss–Jacobi node tables on [−1, 1] for weight `(1−t)^a (1+t)^b`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::rc::Rc;

use num_complex::Complex64;

use crate::special::gamma;

/// Nodes and weights, nodes ascending.
#[derive(Debug, Clone)]
pub(crate) struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn real_gamma(x: f64) -> f64 {
    gamma(Complex64::new(x, 0.0)).map(|v| v.re).unwrap_or(f64::NAN)
}

/// `P_n^{(a,b)}(t)` and `P_{n−1}^{(a,b)}(t)` by the three-term recurrence,
/// plus the derivative of `P_n`.
fn jacobi_with_derivative(n: usize, a: f64, b: f64, t: f64) -> (f64, f64, f64) {
    let ab = a + b;
    let mut p1 = 0.5 * (a - b + (2.0 + ab) * t);
    let mut p2 = 1.0;
    let mut temp = 2.0 + ab;
    for j in 2..=n {
        let jf = j as f64;
        let p3 = p2;
        p2 = p1;
        temp = 2.0 * jf + ab;
        let aa = 2.0 * jf * (jf + ab) * (temp - 2.0);
        let bb = (temp - 1.0) * (a * a - b * b + temp * (temp - 2.0) * t);
        let cc = 2.0 * (jf - 1.0 + a) * (jf - 1.0 + b) * temp;
        p1 = (bb * p2 - cc * p3) / aa;
    }
    let nf = n as f64;
    let pp = (nf * (a - b - temp * t) * p1 + 2.0 * (nf + a) * (nf + b) * p2) / (temp * (1.0 - t * t));
    (p1, p2, pp)
}

fn compute(n: usize, a: f64, b: f64) -> Rule {
    let nf = n as f64;
    let ab = a + b;
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for k in 1..=n {
        // Szegő-type asymptotic guess, descending in k.
        let theta = PI * (k as f64 - 0.25 + 0.5 * a) / (nf + 0.5 + 0.5 * ab);
        let mut t = theta.cos();
        let mut p2 = 1.0;
        let mut pp = 1.0;
        for _ in 0..100 {
            let (p1, q2, q) = jacobi_with_derivative(n, a, b, t);
            p2 = q2;
            pp = q;
            let step = p1 / pp;
            t -= step;
            if step.abs() <= 1e-15 * (1.0 + t.abs()) {
                break;
            }
        }
        let (_, q2, q) = jacobi_with_derivative(n, a, b, t);
        if q.is_finite() && q2.is_finite() {
            p2 = q2;
            pp = q;
        }
        nodes.push(t);
        weights.push(1.0 / (pp * p2));
    }
    // The common factor is fixed by the zeroth moment.
    let mu0 = 2f64.powf(ab + 1.0) * real_gamma(a + 1.0) * real_gamma(b + 1.0) / real_gamma(ab + 2.0);
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w *= mu0 / total;
    }
    nodes.reverse();
    weights.reverse();
    Rule { nodes, weights }
}

thread_local! {
    static CACHE: RefCell<HashMap<(usize, u64, u64), Rc<Rule>>> = RefCell::new(HashMap::new());
}

/// Cached Gauss–Jacobi rule with `n` nodes.
pub(crate) fn gauss_jacobi(n: usize, a: f64, b: f64) -> Rc<Rule> {
    CACHE.with(|cache| {
        cache
            .borrow_mut()
            .entry((n, a.to_bits(), b.to_bits()))
            .or_insert_with(|| Rc::new(compute(n, a, b)))
            .clone()
    })
}

pub(crate) fn gauss_legendre(n: usize) -> Rc<Rule> {
    gauss_jacobi(n, 0.0, 0.0)
}
