use std::path::Path;
use std::process::ExitCode;

use rabi_core::RabiError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    NotConverged(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Invalid(_) => ExitCode::from(2),
            CliError::NotConverged(_) => ExitCode::from(3),
            CliError::Io(_) => ExitCode::from(1),
        }
    }
}

impl From<RabiError> for CliError {
    fn from(err: RabiError) -> Self {
        let msg = err.to_string();
        match err {
            RabiError::InvalidParameter(_)
            | RabiError::LeftStrongCouplingDomain
            | RabiError::GammaUndefined
            | RabiError::WellsNotSeparated { .. } => CliError::Invalid(msg),
            RabiError::Io(_) => CliError::Io(msg),
            RabiError::NonReal { .. }
            | RabiError::NegativeDiscriminant(_)
            | RabiError::TruncationNotConverged { .. }
            | RabiError::NoConvergence { .. }
            | RabiError::NoInteriorMinimum => CliError::NotConverged(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Io(err.to_string())
    }
}
