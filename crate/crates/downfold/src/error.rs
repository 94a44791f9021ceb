//! Command errors, their exit codes and the JSON object printed on stderr.

use serde_json::{json, Value};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("input not found: {0}")]
    NotFound(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Core(#[from] downfold_core::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    /// A verification property did not hold.
    #[error("{message}")]
    Property { message: String, counterexample: Value },
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    /// 1 for numerical failures, 2 for usage and input errors.
    pub fn exit_code(&self) -> i32 {
        use downfold_core::Error as E;
        match self {
            CliError::Usage(_) | CliError::NotFound(_) | CliError::Input(_) | CliError::Io(_) => 2,
            CliError::Core(e) => match e {
                E::Header(_) | E::Record { .. } | E::IndexRange { .. } | E::Unsupported(_) | E::Invalid(_) | E::Shape(_) => 2,
                E::TooLarge { .. } | E::UnknownExpression(_) => 2,
                _ => 1,
            },
            CliError::Property { .. } => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::NotFound(_) => "input_not_found",
            CliError::Input(_) => "input",
            CliError::Core(_) if self.exit_code() == 2 => "input",
            CliError::Core(_) => "numerical",
            CliError::Io(_) => "io",
            CliError::Property { .. } => "property_violation",
        }
    }

    pub fn to_json(&self) -> Value {
        let mut e = json!({ "kind": self.kind(), "message": self.to_string(), "exit_code": self.exit_code() });
        if let CliError::Property { counterexample, .. } = self {
            e["counterexample"] = counterexample.clone();
        }
        json!({ "error": e })
    }
}
