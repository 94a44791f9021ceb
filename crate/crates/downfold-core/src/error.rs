use alloc::string::String;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("malformed FCIDUMP header: {0}")]
    Header(String),
    #[error("malformed FCIDUMP record at line {line}: {msg}")]
    Record { line: usize, msg: String },
    #[error("orbital index {index} out of range [1, {norb}]")]
    IndexRange { index: usize, norb: usize },
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("matrix is not positive semidefinite (residual diagonal {0:e})")]
    NotPsd(f64),
    #[error("system too large for the dense Fock-space oracle: {n} spatial orbitals (cap {cap})")]
    TooLarge { n: usize, cap: usize },
    #[error("solver diverged at iteration {iter} (residual norm {norm:e})")]
    Diverged { iter: usize, norm: f64 },
    #[error("Bloch residual {0:e} above threshold; spectrum comparison is meaningless")]
    NotDecoupled(f64),
    #[error("unknown expression id {0}")]
    UnknownExpression(usize),
    #[error("missing factorized views")]
    MissingFactors,
    #[error("downfolding step {step} (orbital {orbital}) failed: {reason}")]
    StepFailed { step: usize, orbital: usize, reason: String },
}

pub type Result<T> = core::result::Result<T, Error>;
