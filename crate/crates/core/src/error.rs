use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{what} = {value} is outside its domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("invalid model: {0}")]
    InvalidSpec(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("system size {n} exceeds the enumeration cap {cap}")]
    CapExceeded { n: usize, cap: usize },

    #[error("size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error(
        "quadrature shortfall: tilted spread {spread:.3} exceeds the resolvable limit {limit:.3}"
    )]
    QuadratureShortfall { spread: f64, limit: f64 },

    #[error("non-finite value produced in {0}")]
    NonFinite(&'static str),

    #[error("no solution layer at q = {0}")]
    MissingLayer(f64),

    #[error("{what} did not converge after {iterations} iterations (last = {last}, residual = {residual:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        last: f64,
        residual: f64,
    },

    #[error("outside theorem scope: {0}")]
    ScopeViolation(String),

    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { got: usize, need: usize },

    #[error("2D grid needs {bytes} bytes, above the guard of {limit} bytes")]
    MemoryGuard { bytes: usize, limit: usize },

    #[error("degenerate measure: {0}")]
    DegenerateMeasure(String),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::QuadratureShortfall { .. }
                | Error::NonFinite(_)
                | Error::NonConvergence { .. }
                | Error::DegenerateMeasure(_)
        )
    }
}
