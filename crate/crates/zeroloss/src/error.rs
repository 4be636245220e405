use std::path::PathBuf;

use zeroloss_core::Error as CoreError;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    /// IO failure while writing outputs.
    pub const IO: i32 = 1;
    /// Bad flag, unreadable input or parameter validation failure.
    pub const USAGE: i32 = 2;
    pub const NUMERICAL: i32 = 3;
    pub const PRECONDITION: i32 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("PARSE_ERROR: {path}:{line}: {message}")]
    Parse { path: PathBuf, line: u64, message: String },
    #[error("DUPLICATE_N: {path}:{line}: n = {n} appears more than once")]
    DuplicateN { path: PathBuf, line: u64, n: u64 },
    #[error("RANGE_ERROR: {path}:{line}: {field} = {value} is out of range")]
    Range {
        path: PathBuf,
        line: u64,
        field: &'static str,
        value: f64,
    },
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Input { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },
    #[error("{code}: {0}", code = core_code(.0))]
    Core(#[from] CoreError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. }
            | CliError::DuplicateN { .. }
            | CliError::Range { .. }
            | CliError::Usage(_)
            | CliError::Input { .. } => exit::USAGE,
            CliError::Output { .. } => exit::IO,
            CliError::Core(e) => core_exit_code(e),
        }
    }

    pub(crate) fn output(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Output {
            path: path.into(),
            source,
        }
    }
}

pub fn core_exit_code(e: &CoreError) -> i32 {
    match e {
        CoreError::InvalidParameter { .. }
        | CoreError::UnsupportedPoint { .. }
        | CoreError::InvalidDegree(_)
        | CoreError::InvalidCount(_)
        | CoreError::IndexOutOfRange { .. }
        | CoreError::EmptyTrainingSet => exit::USAGE,
        CoreError::QuadratureFailure { .. }
        | CoreError::UpdateBudgetExceeded { .. }
        | CoreError::NoSolution
        | CoreError::NoRecords { .. } => exit::NUMERICAL,
        CoreError::InsufficientData { .. }
        | CoreError::Degenerate
        | CoreError::EmptyMinimaSet
        | CoreError::EmptySupport
        | CoreError::BudgetExceeded { .. }
        | CoreError::InvalidSplit => exit::PRECONDITION,
        _ => exit::NUMERICAL,
    }
}

/// Stable tag printed in front of a core error message.
pub fn core_code(e: &CoreError) -> &'static str {
    match e {
        CoreError::InvalidParameter { .. } => "INVALID_PARAMETER",
        CoreError::UnsupportedPoint { .. } => "UNSUPPORTED_POINT",
        CoreError::InvalidDegree(_) => "INVALID_DEGREE",
        CoreError::InvalidCount(_) => "INVALID_COUNT",
        CoreError::EmptyTrainingSet => "EMPTY_TRAINING_SET",
        CoreError::UpdateBudgetExceeded { .. } => "UPDATE_BUDGET_EXCEEDED",
        CoreError::NoRecords { .. } => "NO_RECORDS",
        CoreError::IndexOutOfRange { .. } => "INDEX_OUT_OF_RANGE",
        CoreError::EmptySupport => "EMPTY_SUPPORT",
        CoreError::EmptyMinimaSet => "EMPTY_MINIMA_SET",
        CoreError::BudgetExceeded { .. } => "BUDGET_EXCEEDED",
        CoreError::QuadratureFailure { .. } => "QUADRATURE_FAILURE",
        CoreError::InvalidSplit => "INVALID_SPLIT",
        CoreError::NoSolution => "NO_SOLUTION",
        CoreError::InsufficientData { .. } => "INSUFFICIENT_DATA",
        CoreError::Degenerate => "DEGENERATE_DATA",
        _ => "ERROR",
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
