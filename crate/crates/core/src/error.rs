use thiserror::Error;

/// Errors produced by the solver, the simulator and the CLI front end.
#[derive(Debug, Error)]
pub enum JcasError {
    #[error("malformed channel spec: {0}")]
    Malformed(String),

    #[error("{matrix}[state {state}][input {row}] is not a probability row: {reason}")]
    NotStochastic {
        matrix: &'static str,
        state: usize,
        row: usize,
        reason: String,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("mono-static spec is missing the sensing kernel `w_z`")]
    MissingSensingKernel,

    #[error("need at least {needed} states, channel has {found}")]
    TooFewStates { needed: usize, found: usize },

    #[error("states {0:?} are pairwise indistinguishable on the sensing kernel")]
    Indistinguishable(Vec<(usize, usize)>),

    #[error("unsupported alphabet size: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("Blahut-Arimoto did not converge after {iterations} iterations (gap {gap:e})")]
    NonConvergence { iterations: usize, gap: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("likelihood table of {cells} cells exceeds the configured cap of {cap}")]
    MemoryCap { cells: usize, cap: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl JcasError {
    /// Process exit status used by the `jcas` binary.
    pub fn exit_code(&self) -> i32 {
        match self {
            JcasError::Unsupported(_) => 3,
            JcasError::InsufficientData(_) => 4,
            JcasError::Io(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, JcasError>;
