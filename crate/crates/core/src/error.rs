use crate::ComplexScalar;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{function} has a pole at {at}")]
    Pole {
        function: &'static str,
        at: ComplexScalar,
    },

    #[error("{function}: {detail}")]
    Domain {
        function: &'static str,
        detail: String,
    },

    #[error("{what} did not converge (last estimate {last}, previous {previous})")]
    NonConvergence {
        what: &'static str,
        last: ComplexScalar,
        previous: ComplexScalar,
    },

    #[error("integrand returned NaN at t = {at}")]
    NanIntegrand { at: f64 },

    #[error("{kernel} is singular at z = {at}")]
    Singular { kernel: String, at: ComplexScalar },

    #[error(
        "z^{exponent} has a negative integer exponent; write it as a zero function \
         zero({order}) scaled by Γ({order}+1) or as a logarithm derivative"
    )]
    NegativeIntegerMonomial { exponent: i64, order: i64 },

    #[error("no closed-form rule: {0}")]
    Unsupported(String),

    #[error("no product rule for {0} times an exponential; use the numeric engine")]
    NoProductRule(String),

    #[error("S^{k} f is singular at x0 = {x0}")]
    SingularCoefficient { k: usize, x0: ComplexScalar },

    #[error("integral diverges on (-inf, x]: {0}")]
    Divergent(String),

    #[error("operator is not a contraction (measured ratio {ratio})")]
    NotContraction { ratio: f64 },

    #[error("step violates contraction: L*h^a/Gamma(1+a) = {factor} >= 1")]
    StepContraction { factor: f64 },

    #[error("{0}")]
    SingularSystem(String),

    #[error("series exhausted {terms} terms with tail {tail} above tolerance")]
    SeriesExhausted { terms: usize, tail: f64 },

    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
