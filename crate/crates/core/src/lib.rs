//! Distributional differintegrals of arbitrary complex order.
//!
//! Two engines share one operator `S^α` (positive `α` integrates, negative
//! `α` differentiates, `α = 0` is the identity):
//!
//! * [`rules`] applies closed-form rules term by term to a normalized
//!   [`Expr`];
//! * [`quadrature`] integrates the defining convolution
//!   `1/Γ(α) ∫ f(ζ)(x−ζ)^{α−1} dζ` directly with endpoint-weighted
//!   Gauss-Jacobi rules, continuing to `Re(α) ≤ 0` by integer lifting.
//!
//! On top of those sit the fractional Laplace/Fourier transforms
//! ([`transforms`]) and Volterra-type solvers ([`volterra`]).

pub mod error;
pub mod expr;
pub mod quadrature;
pub mod rules;
pub mod special;
pub mod transforms;
pub mod volterra;

pub use num_complex::Complex64;

/// Complex scalar used for coefficients, orders, rates and sample points.
pub type ComplexScalar = Complex64;

pub use error::{Error, Result};
pub use expr::{Expr, Kernel, Term};
pub use quadrature::{LowerBound, QuadratureSpec};
pub use rules::{differintegrate, ComplimentarySeries, RuleResult};
pub use volterra::{FdeProblem, SeriesSolution};
