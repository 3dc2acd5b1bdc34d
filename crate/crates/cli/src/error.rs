use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const VERIFICATION_FAILED: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const NUMERICAL: i32 = 3;
    pub const FILE: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(vortwave::Error),

    #[error("{path}: {message}")]
    File { path: String, message: String },

    #[error("verification failed: {0} check(s) failed")]
    VerificationFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Numerical(_) => exit::NUMERICAL,
            CliError::File { .. } => exit::FILE,
            CliError::VerificationFailed(_) => exit::VERIFICATION_FAILED,
        }
    }

    pub fn file(path: &std::path::Path, message: impl std::fmt::Display) -> Self {
        CliError::File {
            path: path.display().to_string(),
            message: message.to_string(),
        }
    }
}

impl From<vortwave::Error> for CliError {
    fn from(e: vortwave::Error) -> Self {
        match e {
            vortwave::Error::OutOfRange { r, r_c, r_0 } => {
                let upper = if r_0.is_finite() { r_0.to_string() } else { "∞".to_string() };
                CliError::Config(format!(
                    "r = {r} is outside the admissible interval ({r_c}, {upper})"
                ))
            }
            vortwave::Error::Invalid(m) => CliError::Config(m),
            other => CliError::Numerical(other),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
