use thiserror::Error;

use bhdephase::Error as ModelError;

/// Errors surfaced by the runner, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration or usage (exit 2).
    #[error("configuration error: {0}")]
    Config(String),

    /// A method guard refused the scenario (exit 3).
    #[error("guard violation: {message}\nhint: {hint}")]
    Guard { message: String, hint: String },

    /// Eigensolver or propagator failure (exit 4).
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Guard { .. } => 3,
            CliError::Numerical(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        let message = e.to_string();
        match e {
            ModelError::InvalidParameter(_)
            | ModelError::Capacity { .. }
            | ModelError::SiteOutOfRange { .. }
            | ModelError::NonUniformGrid(_)
            | ModelError::InsufficientData(_) => CliError::Config(message),
            ModelError::DimensionCap { .. } => CliError::Guard {
                message,
                hint: "reduce Ns or nmax, or raise dim_cap if memory allows".into(),
            },
            ModelError::ValidityGate { .. } => CliError::Guard {
                message,
                hint: "use U/J >= 4(nbar+1) for the mott method, or the ed method in the intermediate regime".into(),
            },
            ModelError::DegenerateModel(_) => CliError::Guard {
                message,
                hint: "the sf method needs J > 0".into(),
            },
            ModelError::DegenerateGroundState { .. } => CliError::Guard {
                message,
                hint: "the ground state is not unique; change the lattice size or boundary".into(),
            },
            ModelError::BasisMismatch(_)
            | ModelError::EigenNotConverged { .. }
            | ModelError::PropagatorNotConverged(_)
            | ModelError::NormDrift { .. } => CliError::Numerical(message),
        }
    }
}
