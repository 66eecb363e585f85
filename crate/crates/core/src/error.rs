use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain on which the operation is defined.
    #[error("{what} = {value} is outside the admissible range {range}")]
    Domain { what: &'static str, value: f64, range: &'static str },
    /// The step-size controller could not make progress.
    #[error("integrator failed at t = {t_reached}: {reason}")]
    Integrator { t_reached: f64, reason: &'static str },
    /// Adaptive quadrature exhausted its interval budget.
    #[error("quadrature did not converge: estimate {estimate}, error {error_estimate}")]
    Quadrature { estimate: f64, error_estimate: f64 },
    /// A bracketing root finder was handed an interval without a sign change.
    #[error("root finder: no sign change on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },
    /// An expected event (such as the return to the equator) was not seen.
    #[error("event not found before t = {t_max}")]
    EventNotFound { t_max: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(what: &'static str, value: f64, range: &'static str) -> Error {
    Error::Domain { what, value, range }
}
