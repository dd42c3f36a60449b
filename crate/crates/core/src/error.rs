use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("size cap exceeded: {requested} qubits requested, at most {max} supported")]
    SizeCap { requested: usize, max: usize },

    #[error("constellation `{0}` is not Gray-labelled on a supported geometry")]
    NotGray(String),

    #[error("penalty {penalty} is too small, must exceed {required}")]
    InsufficientPenalty { penalty: f64, required: f64 },

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SizeCap { .. } => 2,
            _ => 1,
        }
    }
}

pub(crate) fn check_qubits(n: usize) -> Result<()> {
    if n > crate::MAX_QUBITS {
        return Err(Error::SizeCap {
            requested: n,
            max: crate::MAX_QUBITS,
        });
    }
    Ok(())
}
