use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum NehariError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("grid mismatch: expected {expected} nodes, got {actual}")]
    GridMismatch { expected: usize, actual: usize },

    #[error("no sign change on [{a}, {b}]: f(a) = {fa}, f(b) = {fb}")]
    NoBracket { a: f64, b: f64, fa: f64, fb: f64 },

    #[error("root finder did not converge after {iters} iterations (last x = {x})")]
    RootNotConverged { iters: usize, x: f64 },

    #[error("table nonlinearity evaluated at {t}, outside [{lo}, {hi}]")]
    TableOutOfRange { t: f64, lo: f64, hi: f64 },

    #[error("derivative of the nonlinearity is not available for this variant")]
    DerivativeUnavailable,

    #[error("g(t) = f(t)/t^(p-1) is singular at t = 0")]
    SingularRatio,

    #[error("trajectory blew up at t = {t} (|u| = {value} exceeds cap {cap})")]
    BlowUp { t: f64, value: f64, cap: f64 },

    #[error("no flux bracket found: u(1; m) keeps one sign over the scanned range (0, {m_max}]")]
    NoFluxBracket { m_max: f64 },

    #[error(
        "projection bracket fails for this u: alpha'(r/|u|) = {alpha_low} (needs > 0), \
         alpha'(R/|u|) = {alpha_high} (needs < 0)"
    )]
    ProjectionBracket { alpha_low: f64, alpha_high: f64 },

    #[error("eigenvalue iteration did not converge after {iters} iterations (last quotient {quotient})")]
    EigenNotConverged { iters: usize, quotient: f64 },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
}

pub type Result<T, E = NehariError> = std::result::Result<T, E>;
