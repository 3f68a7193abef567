use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid dimension n = {0}, need an integer n >= 2")]
    InvalidDimension(i64),

    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    /// Adaptive quadrature ran out of its evaluation budget. Carries the best
    /// estimate so callers can decide whether it is still usable.
    #[error("quadrature failed to converge: estimate {estimate:e}, error bound {error_bound:e}")]
    QuadratureFailure { estimate: f64, error_bound: f64 },

    #[error("principal value integral diverges near s = {location}")]
    PvDivergent { location: f64 },

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("ill-posed fit: {0}")]
    IllPosedFit(String),

    #[error("insufficient smoothness: operation needs derivative order {required}, profile supports {available}")]
    InsufficientSmoothness { required: usize, available: usize },

    #[error("operand not in operator domain: {0}")]
    OperandNotInDomain(String),

    #[error("Fourier oracle inapplicable: {0}")]
    OracleInapplicable(String),

    #[error("unsupported check: {0}")]
    UnsupportedCheck(String),

    #[error("total Q-curvature integral does not converge: fitted density tail exponent {tail_exponent}")]
    FiniteTotalQViolated { tail_exponent: f64 },

    #[error("inconclusive: {0}")]
    Inconclusive(String),
}

pub type Result<T> = std::result::Result<T, Error>;
