use thiserror::Error;

/// Errors raised by the simulator and the VQE drivers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("missing `qubits: <N>` header")]
    MissingHeader,
    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitIndex { index: usize, n_qubits: usize },
    #[error("qubit count mismatch: {left} vs {right}")]
    QubitMismatch { left: usize, right: usize },
    #[error("{what} has {size} qubits/modes, above the configured cap of {cap}")]
    CapExceeded {
        what: &'static str,
        size: usize,
        cap: usize,
    },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },
    #[error("operator is not Hermitian (imaginary residue {residue:e})")]
    NonHermitian { residue: f64 },
    #[error("measurement basis must have full support (qubit {qubit} is identity)")]
    IdentityLetter { qubit: usize },
    #[error("identity observable cannot be measured")]
    IdentityObservable,
    #[error("atoms {i} and {j} are closer than {min_spacing} um ({distance} um)")]
    Spacing {
        i: usize,
        j: usize,
        distance: f64,
        min_spacing: f64,
    },
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
    #[error("budget error: {0}")]
    Budget(String),
    #[error("no insertable time label: every interval is at most twice the minimum segment")]
    SplitSaturated,
    #[error("optimizer aborted: {0}")]
    OptimizerAborted(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
}

/// Coarse error category; the CLI maps these onto exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Parse,
    Constraint,
    Budget,
    Numeric,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Parse { .. } | Error::MissingHeader | Error::QubitIndex { .. } => {
                ErrorKind::Parse
            }
            Error::Budget(_) | Error::SplitSaturated => ErrorKind::Budget,
            Error::NotNormalized { .. }
            | Error::NonHermitian { .. }
            | Error::NonFinite(_)
            | Error::OptimizerAborted(_) => ErrorKind::Numeric,
            _ => ErrorKind::Constraint,
        }
    }

    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
