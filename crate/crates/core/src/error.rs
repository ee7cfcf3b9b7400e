use thiserror::Error;

/// Errors raised by the solvers and the file formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("time mesh mismatch: {0}")]
    Mesh(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("solution blew up at step {step}: {detail}")]
    BlowUp { step: usize, detail: String },

    #[error("malformed snapshot: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
