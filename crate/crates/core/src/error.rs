use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A named parameter is outside its domain.
    #[error("{name}: {reason} (got {value})")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("population values must be non-negative, got {0}")]
    NegativePopulation(f64),

    #[error("schedule switch times must be strictly increasing and finite")]
    UnsortedSchedule,

    #[error("x = {x} is not an equilibrium for mu = {mu} (residual {residual:e})")]
    NotAnEquilibrium { x: f64, mu: f64, residual: f64 },

    #[error("no positive equilibrium for mu = {mu}")]
    NoPositiveEquilibrium { mu: f64 },

    #[error("mu = {mu} is at the tangency boundary; x* is degenerate and has no crossing delay")]
    DegenerateEquilibrium { mu: f64 },

    #[error("characteristic root search did not converge (best residual {best_residual:e})")]
    RootNotFound { best_residual: f64 },

    #[error("history is not defined on [-tau, 0]: {0}")]
    HistoryUndefined(&'static str),

    #[error("t = {t} is outside the trajectory span [{start}, {end}]")]
    OutOfSpan { t: f64, start: f64, end: f64 },

    #[error("window {window} needs a trajectory of length at least {needed}, got {length}")]
    WindowTooLong {
        window: f64,
        needed: f64,
        length: f64,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }
}
