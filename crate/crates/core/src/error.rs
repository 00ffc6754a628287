use thiserror::Error;

/// Errors raised by the emulation engines, the dispatch layer and the workload.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmuError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A caller broke a backend precondition (for example an over-long reduction).
    #[error("backend contract violated: {0}")]
    ContractViolation(String),

    #[error("non-finite value in GEMM operand")]
    NonFiniteInput,

    #[error("{moduli} moduli leave {nu} quantization bits for reduction length {k}")]
    ModuliBudgetTooSmall { moduli: usize, k: usize, nu: i64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("inconsistent moduli set: {0}")]
    InconsistentModuli(String),

    #[error("invalid value {value:?} for environment variable {var}")]
    Config { var: String, value: String },

    #[error("matrix is singular to working precision (zero pivot in column {column})")]
    SingularMatrix { column: usize },
}

pub type Result<T> = std::result::Result<T, EmuError>;
