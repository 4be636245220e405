use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
#[non_exhaustive]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: &'static str },
    #[error("point ({x}, {y}) is outside the supported region")]
    UnsupportedPoint { x: f64, y: f64 },
    #[error("polynomial degree must be at least 1, got {0}")]
    InvalidDegree(u32),
    #[error("sample count must be at least 1, got {0}")]
    InvalidCount(usize),
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("perceptron did not reach zero training error within {max_updates} updates")]
    UpdateBudgetExceeded { max_updates: u64 },
    #[error("no successful trials recorded for n = {n}")]
    NoRecords { n: u64 },
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("training support must not be empty")]
    EmptySupport,
    #[error("a reachable training support has no zero-training-error hypothesis")]
    EmptyMinimaSet,
    #[error("enumeration needs {required} terms, limit is {limit}")]
    BudgetExceeded { required: f64, limit: f64 },
    #[error("quadrature did not converge after {evaluations} evaluations")]
    QuadratureFailure { evaluations: usize },
    #[error("split point must satisfy e_min < a < E < 1")]
    InvalidSplit,
    #[error("bound never reaches the requested value")]
    NoSolution,
    #[error("need at least {needed} data points, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("all data points share the same n")]
    Degenerate,
}

impl Error {
    pub(crate) const fn invalid(name: &'static str, reason: &'static str) -> Self {
        Error::InvalidParameter { name, reason }
    }
}
