use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("adaptive quadrature hit the subdivision limit ({limit}) with estimate {estimate} and error {error_estimate}")]
    SubdivisionLimit {
        limit: usize,
        estimate: f64,
        error_estimate: f64,
    },

    #[error("integrand evaluated to a non-finite value at x = {x}")]
    NonFinite { x: f64 },

    #[error("target {target} is not bracketed by [{g_lo}, {g_hi}]")]
    BracketInvalid { target: f64, g_lo: f64, g_hi: f64 },

    #[error("coefficient is not positive at x = {x} (value {value})")]
    NotPositive { x: f64, value: f64 },

    #[error("derivative mismatch at x = {x}: supplied {supplied}, finite difference {finite_difference}")]
    DerivativeMismatch {
        x: f64,
        supplied: f64,
        finite_difference: f64,
    },

    #[error("plateau index {index} is beyond the materialized cutoff {max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("x = {x} is beyond the materialized range (limit {limit})")]
    OutOfMaterializedRange { x: f64, limit: f64 },

    #[error("flow target leaves the coefficient window: {0}")]
    WindowExceeded(String),

    #[error("grid cannot resolve the requested structure: {0}")]
    ResolutionInsufficient(String),

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
}

impl Error {
    /// Errors caused by a numerical tolerance not being met, as opposed to
    /// bad input. The CLI maps these to a distinct exit status.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SubdivisionLimit { .. }
                | Error::NonFinite { .. }
                | Error::ResolutionInsufficient(_)
        )
    }
}
