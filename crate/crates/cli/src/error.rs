use laguerre_needlets::io::to_canonical_json;
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    /// A tolerance was violated; the report has already been written.
    #[error("{0}")]
    Tolerance(String),

    #[error(transparent)]
    Lib(#[from] laguerre_needlets::Error),

    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type CliResult<T> = Result<T, CliError>;

pub fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use laguerre_needlets::Error as E;
        match self {
            CliError::Tolerance(_) => 1,
            CliError::Lib(E::Convergence(_)) => 1,
            CliError::Io(_) => 1,
            _ => 2,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) | CliError::File { .. } => "usage",
            CliError::Tolerance(_) => "tolerance",
            CliError::Lib(_) => "library",
            CliError::Io(_) => "io",
        }
    }

    /// Machine-readable form written to stderr.
    pub fn to_json(&self) -> String {
        let v = json!({ "error": self.kind(), "message": self.to_string(), "exit_code": self.exit_code() });
        to_canonical_json(&v).unwrap_or_else(|_| self.to_string())
    }
}
