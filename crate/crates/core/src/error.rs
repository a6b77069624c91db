use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RabiError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-real result: imaginary residual {residual:e} exceeds tolerance")]
    NonReal { residual: f64 },

    #[error("normalization discriminant is negative ({0:e}); |S_ab| must not exceed 1")]
    NegativeDiscriminant(f64),

    #[error("gamma is undefined at g = 0")]
    GammaUndefined,

    #[error("truncation not converged: n_max cap {cap} reached (last relative change {last_change:e})")]
    TruncationNotConverged { cap: usize, last_change: f64 },

    #[error("wells not separated: distance {distance} < combined radii {radii}")]
    WellsNotSeparated { distance: f64, radii: f64 },

    #[error("self-consistent iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("self-consistent iterate left the g > g_c domain")]
    LeftStrongCouplingDomain,

    #[error("no interior minimum of the frequency renormalization on the scanned range")]
    NoInteriorMinimum,

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for RabiError {
    fn from(err: std::io::Error) -> Self {
        RabiError::Io(err.to_string())
    }
}

impl From<csv::Error> for RabiError {
    fn from(err: csv::Error) -> Self {
        RabiError::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, RabiError>;
